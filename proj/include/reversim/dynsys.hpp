#pragma once

#include <boost/rational.hpp>

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace reversim {

using Rational = boost::rational<std::int64_t>;

inline std::string to_string(const Rational& r) {
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

/// Finite invertible dynamics: a bijection f on {0..n-1} together with an
/// involution pi, both checked exactly at construction.
class FiniteDynamicalSystem {
public:
    FiniteDynamicalSystem(std::vector<int> map, std::vector<int> involution)
        : f_(std::move(map)), pi_(std::move(involution)) {
        const int n = static_cast<int>(f_.size());
        if (n < 1) throw std::invalid_argument("FiniteDynamicalSystem: empty state set");
        if (static_cast<int>(pi_.size()) != n) {
            throw std::invalid_argument("FiniteDynamicalSystem: involution size mismatch");
        }
        f_inv_.assign(n, -1);
        for (int x = 0; x < n; ++x) {
            const int y = f_[x];
            if (y < 0 || y >= n) {
                throw std::invalid_argument("FiniteDynamicalSystem: map value out of range at state " +
                                            std::to_string(x));
            }
            if (f_inv_[y] != -1) {
                throw std::invalid_argument("FiniteDynamicalSystem: map is not a bijection (state " +
                                            std::to_string(y) + " has two preimages)");
            }
            f_inv_[y] = x;
        }
        for (int x = 0; x < n; ++x) {
            const int y = pi_[x];
            if (y < 0 || y >= n || pi_[y] != x) {
                throw std::invalid_argument(
                    "FiniteDynamicalSystem: pi is not an involution at state " + std::to_string(x));
            }
        }
    }

    int size() const { return static_cast<int>(f_.size()); }

    int forward(int x, int t) const {
        check_state(x);
        if (t < 0) return backward(x, -t);
        for (int k = 0; k < t; ++k) x = f_[x];
        return x;
    }

    int backward(int x, int t) const {
        check_state(x);
        if (t < 0) return forward(x, -t);
        for (int k = 0; k < t; ++k) x = f_inv_[x];
        return x;
    }

    int reversed(int x) const {
        check_state(x);
        return pi_[x];
    }

private:
    void check_state(int x) const {
        if (x < 0 || x >= size()) {
            throw std::invalid_argument("FiniteDynamicalSystem: state " + std::to_string(x) +
                                        " out of range");
        }
    }

    std::vector<int> f_;
    std::vector<int> f_inv_;
    std::vector<int> pi_;
};

/// Subset of states; Boltzmann entropy S(M) = log|M|.
class Macrostate {
public:
    Macrostate(int n_states, std::span<const int> members) : mask_(n_states, 0) {
        if (n_states < 1) throw std::invalid_argument("Macrostate: empty state space");
        for (int x : members) {
            if (x < 0 || x >= n_states) {
                throw std::invalid_argument("Macrostate: member " + std::to_string(x) +
                                            " out of range");
            }
            if (!mask_[x]) {
                mask_[x] = 1;
                ++count_;
            }
        }
    }

    template <typename Predicate>
    static Macrostate from_predicate(int n_states, Predicate&& keep) {
        std::vector<int> members;
        for (int x = 0; x < n_states; ++x) {
            if (keep(x)) members.push_back(x);
        }
        return Macrostate(n_states, members);
    }

    int space_size() const { return static_cast<int>(mask_.size()); }
    int size() const { return count_; }
    bool contains(int x) const { return x >= 0 && x < space_size() && mask_[x]; }

    std::vector<int> members() const {
        std::vector<int> out;
        out.reserve(count_);
        for (int x = 0; x < space_size(); ++x) {
            if (mask_[x]) out.push_back(x);
        }
        return out;
    }

    double entropy() const {
        if (count_ == 0) throw std::invalid_argument("Macrostate: entropy of an empty macrostate");
        return std::log(static_cast<double>(count_));
    }

private:
    std::vector<char> mask_;
    int count_ = 0;
};

inline Macrostate pi_image(const FiniteDynamicalSystem& sys, const Macrostate& m) {
    if (m.space_size() != sys.size()) throw std::invalid_argument("pi_image: state space mismatch");
    std::vector<int> members;
    members.reserve(m.size());
    for (int x = 0; x < sys.size(); ++x) {
        if (m.contains(x)) members.push_back(sys.reversed(x));
    }
    return Macrostate(sys.size(), members);
}

struct MechanicalReversibilityReport {
    bool holds;
    int witness;  // first state with pi f^t pi != f^{-t}; -1 when none
};

/// Verifies pi(f^t(pi(x))) = f^{-t}(x) for every state.
inline MechanicalReversibilityReport check_mechanical_reversibility(const FiniteDynamicalSystem& sys,
                                                                    int t) {
    if (t < 1) throw std::invalid_argument("check_mechanical_reversibility: t must be positive");
    for (int x = 0; x < sys.size(); ++x) {
        if (sys.reversed(sys.forward(sys.reversed(x), t)) != sys.backward(x, t)) {
            return MechanicalReversibilityReport{false, x};
        }
    }
    return MechanicalReversibilityReport{true, -1};
}

/// |A ∩ f^{-t} B| / |A| as an exact rational: the fraction of states in A
/// that evolve into B after t steps of the counting-measure dynamics.
inline Rational macro_transition_probability(const FiniteDynamicalSystem& sys, const Macrostate& a,
                                             const Macrostate& b, int t) {
    if (a.space_size() != sys.size() || b.space_size() != sys.size()) {
        throw std::invalid_argument("macro_transition_probability: state space mismatch");
    }
    if (a.size() == 0) {
        throw std::invalid_argument("macro_transition_probability: empty source macrostate");
    }
    std::int64_t hits = 0;
    for (int x = 0; x < sys.size(); ++x) {
        if (a.contains(x) && b.contains(sys.forward(x, t))) ++hits;
    }
    return Rational(hits, a.size());
}

struct BalanceIdentityReport {
    bool defined;  // false when Prob[pi A | pi B] = 0 (or a macrostate is empty)
    Rational lhs;  // Prob[B|A] / Prob[pi A | pi B]
    Rational rhs;  // |B| / |A|, the exact rational form of exp(S(B) - S(A))
    bool equal;    // exact rational comparison
};

/// The exact counting form of detailed balance:
/// Prob[B|A] / Prob[pi A | pi B] = |B|/|A| for mechanically reversible
/// systems. Undefined conditionals are reported, not asserted.
inline BalanceIdentityReport check_detailed_balance_identity(const FiniteDynamicalSystem& sys,
                                                             const Macrostate& a, const Macrostate& b,
                                                             int t) {
    if (a.size() == 0 || b.size() == 0) {
        return BalanceIdentityReport{false, Rational(0), Rational(0), false};
    }
    const Rational rhs(b.size(), a.size());
    const Macrostate pa = pi_image(sys, a);
    const Macrostate pb = pi_image(sys, b);
    const Rational fwd = macro_transition_probability(sys, a, b, t);
    const Rational bwd = macro_transition_probability(sys, pb, pa, t);
    if (bwd == Rational(0)) {
        return BalanceIdentityReport{false, Rational(0), rhs, false};
    }
    const Rational lhs = fwd / bwd;
    return BalanceIdentityReport{true, lhs, rhs, lhs == rhs};
}

/// Free motion on the discrete torus Z_n x Z_n: state (q, p) at index
/// q*n + p, f(q, p) = (q + p mod n, p), pi(q, p) = (q, -p mod n).
inline FiniteDynamicalSystem free_motion_system(int n) {
    if (n < 1) throw std::invalid_argument("free_motion_system: n must be positive");
    if (n > 1000) throw std::invalid_argument("free_motion_system: n too large for exhaustive checks");
    const int size = n * n;
    std::vector<int> f(size), pi(size);
    for (int q = 0; q < n; ++q) {
        for (int p = 0; p < n; ++p) {
            f[q * n + p] = ((q + p) % n) * n + p;
            pi[q * n + p] = q * n + ((n - p) % n);
        }
    }
    return FiniteDynamicalSystem(std::move(f), std::move(pi));
}

}  // namespace reversim
