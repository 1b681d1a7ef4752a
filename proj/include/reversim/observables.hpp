#pragma once

#include "reversim/hilbert.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <bit>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace reversim {

inline constexpr double kDefaultClusterTol = 1e-8;
inline constexpr int kMaxSpins = 10;  // dimension cap 2^10

/// Thrown when an observable family is not closed under a kinematical
/// time-reversal; the reversal theorems do not apply in that case.
struct PiNotCovariant : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One measurement outcome: label, eigenvalue, eigenspace projector and its
/// dimension d_alpha = Tr[P_alpha].
struct Condition {
    std::string label;
    double eigenvalue;
    CMatrix projector;
    int dim;
};

/// Canonical condition label: 10 significant decimal digits. Values whose
/// magnitude is below zero_snap render as "0" so that numerically noisy zero
/// eigenvalues keep a stable key (anything that close to zero would have been
/// merged with an exact zero by the clustering rule anyway).
inline std::string eigenvalue_label(double value, double zero_snap = kDefaultClusterTol) {
    if (std::abs(value) < zero_snap) value = 0.0;
    if (value == 0.0) return "0";
    return format_double(value, 10);
}

/// An observable resolved into its eigenvalue clusters ("conditions"):
/// projectors are mutually orthogonal and complete, and the eigenspace
/// dimensions add up to the space dimension.
class ObservableDecomposition {
public:
    ObservableDecomposition(std::vector<Condition> conditions, int dim)
        : conds_(std::move(conditions)), dim_(dim) {
        validate();
    }

    int dim() const { return dim_; }
    std::size_t size() const { return conds_.size(); }
    const std::vector<Condition>& conditions() const { return conds_; }

    bool has(std::string_view label) const { return index_.find(label) != index_.end(); }

    const Condition& condition(std::string_view label) const {
        auto it = index_.find(label);
        if (it == index_.end()) {
            throw std::invalid_argument("unknown condition label '" + std::string(label) + "'");
        }
        return conds_[it->second];
    }

private:
    void validate() {
        if (dim_ < 1) throw std::invalid_argument("ObservableDecomposition: dimension must be positive");
        if (conds_.empty()) throw std::invalid_argument("ObservableDecomposition: no conditions");

        bool all_diagonal = true;
        for (const auto& c : conds_) {
            if (c.projector.rows() != dim_ || c.projector.cols() != dim_) {
                throw std::invalid_argument("ObservableDecomposition: projector dimension mismatch");
            }
            all_diagonal = all_diagonal && is_exactly_diagonal(c.projector);
        }

        CMatrix sum = CMatrix::Zero(dim_, dim_);
        int total_dim = 0;
        for (std::size_t i = 0; i < conds_.size(); ++i) {
            const auto& c = conds_[i];
            if (c.label.empty()) throw std::invalid_argument("ObservableDecomposition: empty label");
            if (!index_.emplace(c.label, i).second) {
                throw std::invalid_argument(
                    "ObservableDecomposition: duplicate condition label '" + c.label +
                    "' (decrease the cluster tolerance)");
            }
            if (hermiticity_defect(c.projector) > kConstructionTol) {
                throw std::invalid_argument("ObservableDecomposition: projector for '" + c.label +
                                            "' is not Hermitian");
            }
            if (!all_diagonal &&
                max_abs(CMatrix(c.projector * c.projector - c.projector)) > kConstructionTol) {
                throw std::invalid_argument("ObservableDecomposition: projector for '" + c.label +
                                            "' is not idempotent");
            }
            const double trace = c.projector.trace().real();
            const double rounded = std::round(trace);
            if (std::abs(trace - rounded) > 1e-8 || rounded < 1.0) {
                throw std::invalid_argument("ObservableDecomposition: trace of projector for '" +
                                            c.label + "' is not a positive integer");
            }
            if (c.dim != static_cast<int>(rounded)) {
                throw std::invalid_argument("ObservableDecomposition: stored dimension for '" +
                                            c.label + "' disagrees with Tr[P]");
            }
            total_dim += c.dim;
            sum += c.projector;
        }
        if (all_diagonal) {
            // exact arithmetic on the diagonals
            for (const auto& c : conds_) {
                for (int k = 0; k < dim_; ++k) {
                    const Complex p = c.projector(k, k);
                    if (std::abs(p * p - p) > kConstructionTol) {
                        throw std::invalid_argument("ObservableDecomposition: projector for '" +
                                                    c.label + "' is not idempotent");
                    }
                }
            }
            for (std::size_t i = 0; i < conds_.size(); ++i) {
                for (std::size_t j = i + 1; j < conds_.size(); ++j) {
                    for (int k = 0; k < dim_; ++k) {
                        if (std::abs(conds_[i].projector(k, k) * conds_[j].projector(k, k)) >
                            kConstructionTol) {
                            throw std::invalid_argument(
                                "ObservableDecomposition: projectors are not mutually orthogonal");
                        }
                    }
                }
            }
        } else {
            for (std::size_t i = 0; i < conds_.size(); ++i) {
                for (std::size_t j = i + 1; j < conds_.size(); ++j) {
                    if (max_abs(CMatrix(conds_[i].projector * conds_[j].projector)) >
                        kConstructionTol) {
                        throw std::invalid_argument(
                            "ObservableDecomposition: projectors are not mutually orthogonal");
                    }
                }
            }
        }
        if (max_abs(CMatrix(sum - CMatrix::Identity(dim_, dim_))) > kConstructionTol) {
            throw std::invalid_argument("ObservableDecomposition: projectors do not sum to the identity");
        }
        if (total_dim != dim_) {
            throw std::invalid_argument("ObservableDecomposition: eigenspace dimensions do not add up to d");
        }
    }

    std::vector<Condition> conds_;
    int dim_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

/// One condition per eigenvalue cluster, ascending in eigenvalue; projectors
/// are sums of outer products over the cluster's eigenbasis (basis-choice
/// independent).
inline ObservableDecomposition decompose_observable(const HermitianOperator& a,
                                                    double cluster_tol = kDefaultClusterTol) {
    const int d = a.dim();
    auto clusters = eigendecompose(a, cluster_tol);
    std::vector<Condition> conditions;
    conditions.reserve(clusters.size());
    for (const auto& cluster : clusters) {
        CMatrix projector = CMatrix::Zero(d, d);
        for (const auto& v : cluster.basis) {
            projector += v.amplitudes() * v.amplitudes().adjoint();
        }
        conditions.push_back(Condition{eigenvalue_label(cluster.eigenvalue, cluster_tol),
                                       cluster.eigenvalue, std::move(projector), cluster.dim()});
    }
    return ObservableDecomposition(std::move(conditions), d);
}

// Basis convention: site 1 occupies the most significant bit of the basis
// index; bit value 0 is spin up, so |up...up> is basis state 0.

/// m_z = (1/N) sum_i sigma^z_i, diagonal in the computational basis; the
/// entry for a basis state with k up-spins is (2k - N)/N.
inline HermitianOperator build_magnetization(int n_spins) {
    if (n_spins < 1) throw std::invalid_argument("build_magnetization: need at least one spin");
    if (n_spins > kMaxSpins) {
        throw std::invalid_argument("build_magnetization: " + std::to_string(n_spins) +
                                    " spins exceed the dimension cap 2^" + std::to_string(kMaxSpins));
    }
    const int d = 1 << n_spins;
    CMatrix m = CMatrix::Zero(d, d);
    for (int b = 0; b < d; ++b) {
        const int ups = n_spins - std::popcount(static_cast<unsigned>(b));
        m(b, b) = static_cast<double>(2 * ups - n_spins) / n_spins;
    }
    return HermitianOperator(std::move(m));
}

enum class Pauli { X, Y, Z };

inline CMatrix pauli_matrix(Pauli which) {
    CMatrix m(2, 2);
    switch (which) {
        case Pauli::X: m << 0.0, 1.0, 1.0, 0.0; break;
        case Pauli::Y: m << Complex{0.0, 0.0}, Complex{0.0, -1.0}, Complex{0.0, 1.0}, Complex{0.0, 0.0}; break;
        case Pauli::Z: m << 1.0, 0.0, 0.0, -1.0; break;
    }
    return m;
}

/// Pauli matrix at the given site (1-based), identity elsewhere.
inline HermitianOperator build_site_operator(int n_spins, int site, Pauli which) {
    if (n_spins < 1 || n_spins > kMaxSpins) {
        throw std::invalid_argument("build_site_operator: spin count out of range");
    }
    if (site < 1 || site > n_spins) {
        throw std::invalid_argument("build_site_operator: site " + std::to_string(site) +
                                    " out of range 1.." + std::to_string(n_spins));
    }
    const CMatrix eye2 = CMatrix::Identity(2, 2);
    const CMatrix sigma = pauli_matrix(which);
    CMatrix op = CMatrix::Identity(1, 1);
    for (int i = 1; i <= n_spins; ++i) {
        op = Eigen::kroneckerProduct(op, i == site ? sigma : eye2).eval();
    }
    return HermitianOperator(std::move(op));
}

/// Involutive pairing alpha <-> alpha' between condition labels.
class ConditionReversalMap {
public:
    explicit ConditionReversalMap(std::map<std::string, std::string> pairs)
        : pairs_(std::move(pairs)) {
        for (const auto& [from, to] : pairs_) {
            auto back = pairs_.find(to);
            if (back == pairs_.end() || back->second != from) {
                throw std::invalid_argument("ConditionReversalMap: pairing is not involutive at '" +
                                            from + "'");
            }
        }
    }

    const std::string& reversed(const std::string& label) const {
        auto it = pairs_.find(label);
        if (it == pairs_.end()) {
            throw std::invalid_argument("ConditionReversalMap: unknown label '" + label + "'");
        }
        return it->second;
    }

    const std::map<std::string, std::string>& pairs() const { return pairs_; }

private:
    std::map<std::string, std::string> pairs_;
};

/// For each condition alpha finds alpha' with pi P_alpha pi = P_alpha'.
/// Throws PiNotCovariant if some conjugated projector matches no projector
/// of the decomposition within tol.
inline ConditionReversalMap reverse_conditions(const AntiunitaryInvolution& pi,
                                               const ObservableDecomposition& obs,
                                               double tol = kConstructionTol) {
    if (pi.dim() != obs.dim()) throw std::invalid_argument("reverse_conditions: dimension mismatch");
    std::map<std::string, std::string> pairs;
    std::set<std::string> targets;
    for (const auto& cond : obs.conditions()) {
        const CMatrix conjugated = conjugate_operator(pi, cond.projector);
        const Condition* best = nullptr;
        double best_dev = std::numeric_limits<double>::infinity();
        for (const auto& candidate : obs.conditions()) {
            const double dev = max_abs(CMatrix(conjugated - candidate.projector));
            if (dev < best_dev) {
                best_dev = dev;
                best = &candidate;
            }
        }
        if (best == nullptr || best_dev > tol) {
            throw PiNotCovariant("condition '" + cond.label +
                                 "' has no counterpart under pi (closest projector deviates by " +
                                 format_double(best_dev, 6) + ")");
        }
        pairs[cond.label] = best->label;
        if (!targets.insert(best->label).second) {
            throw PiNotCovariant("two conditions map onto '" + best->label +
                                 "' under pi; pairing is not a bijection");
        }
    }
    return ConditionReversalMap(std::move(pairs));
}

}  // namespace reversim
