#pragma once

#include "reversim/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace reversim {

inline constexpr double kRowStochasticTol = 1e-12;
inline constexpr double kStationaryTol = 1e-10;

/// Finite-state chain with a row-stochastic transition matrix p(x, x') and
/// an optional stationary distribution (validated when present).
class MarkovChain {
public:
    MarkovChain(std::vector<std::string> states, Eigen::MatrixXd transition)
        : states_(std::move(states)), p_(std::move(transition)) {
        validate_transition();
    }

    MarkovChain(std::vector<std::string> states, Eigen::MatrixXd transition,
                Eigen::VectorXd stationary)
        : states_(std::move(states)), p_(std::move(transition)), rho_(std::move(stationary)) {
        validate_transition();
        validate_stationary();
    }

    std::size_t size() const { return states_.size(); }
    const std::vector<std::string>& states() const { return states_; }
    const Eigen::MatrixXd& transition() const { return p_; }
    const std::optional<Eigen::VectorXd>& stationary() const { return rho_; }

private:
    void validate_transition() {
        const auto n = static_cast<Eigen::Index>(states_.size());
        if (n < 1) throw std::invalid_argument("MarkovChain: empty state set");
        if (p_.rows() != n || p_.cols() != n) {
            throw std::invalid_argument("MarkovChain: transition matrix must be " +
                                        std::to_string(n) + "x" + std::to_string(n));
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            double row_sum = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (p_(i, j) < 0.0) {
                    throw std::invalid_argument("MarkovChain: negative entry p(" + states_[i] +
                                                ", " + states_[j] + ")");
                }
                row_sum += p_(i, j);
            }
            if (std::abs(row_sum - 1.0) > kRowStochasticTol) {
                throw std::invalid_argument("MarkovChain: row for state '" + states_[i] +
                                            "' sums to " + format_double(row_sum, 17));
            }
        }
    }

    void validate_stationary() {
        const auto n = static_cast<Eigen::Index>(states_.size());
        if (rho_->size() != n) throw std::invalid_argument("MarkovChain: stationary size mismatch");
        double sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if ((*rho_)(i) < 0.0) {
                throw std::invalid_argument("MarkovChain: negative stationary probability at '" +
                                            states_[i] + "'");
            }
            sum += (*rho_)(i);
        }
        if (std::abs(sum - 1.0) > kStationaryTol) {
            throw std::invalid_argument("MarkovChain: stationary distribution sums to " +
                                        format_double(sum, 17));
        }
        const double residual = (rho_->transpose() * p_ - rho_->transpose()).cwiseAbs().maxCoeff();
        if (residual > kStationaryTol) {
            throw std::invalid_argument("MarkovChain: rho p != rho (residual " +
                                        format_double(residual, 6) + ")");
        }
    }

    std::vector<std::string> states_;
    Eigen::MatrixXd p_;
    std::optional<Eigen::VectorXd> rho_;
};

namespace detail {

/// Strongly connected components of the positive-transition digraph
/// (communicating classes), by Kosaraju's two passes.
inline std::vector<std::vector<int>> communicating_classes(const Eigen::MatrixXd& p) {
    const int n = static_cast<int>(p.rows());
    std::vector<int> order;
    order.reserve(n);
    std::vector<char> seen(n, 0);
    for (int start = 0; start < n; ++start) {
        if (seen[start]) continue;
        // iterative post-order
        std::vector<std::pair<int, int>> stack{{start, 0}};
        seen[start] = 1;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            bool descended = false;
            for (int j = next; j < n; ++j) {
                if (p(node, j) > 0.0 && !seen[j]) {
                    next = j + 1;
                    seen[j] = 1;
                    stack.emplace_back(j, 0);
                    descended = true;
                    break;
                }
            }
            if (!descended) {
                order.push_back(node);
                stack.pop_back();
            }
        }
    }
    std::vector<std::vector<int>> classes;
    std::vector<char> assigned(n, 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (assigned[*it]) continue;
        std::vector<int> component{*it};
        assigned[*it] = 1;
        std::vector<int> stack{*it};
        while (!stack.empty()) {
            const int node = stack.back();
            stack.pop_back();
            for (int j = 0; j < n; ++j) {
                if (p(j, node) > 0.0 && !assigned[j]) {  // reversed edges
                    assigned[j] = 1;
                    component.push_back(j);
                    stack.push_back(j);
                }
            }
        }
        std::sort(component.begin(), component.end());
        classes.push_back(std::move(component));
    }
    return classes;
}

}  // namespace detail

/// Unique rho with rho p = rho, by direct linear solve with the
/// normalization row. Requires irreducibility; otherwise the error names the
/// communicating classes.
inline Eigen::VectorXd stationary_distribution(const MarkovChain& chain) {
    const auto n = static_cast<Eigen::Index>(chain.size());
    const auto classes = detail::communicating_classes(chain.transition());
    if (classes.size() != 1) {
        std::string msg = "stationary_distribution: chain is reducible; communicating classes:";
        for (const auto& cls : classes) {
            msg += " {";
            for (std::size_t i = 0; i < cls.size(); ++i) {
                if (i > 0) msg += ", ";
                msg += chain.states()[cls[i]];
            }
            msg += "}";
        }
        throw std::invalid_argument(msg);
    }
    Eigen::MatrixXd a = chain.transition().transpose() - Eigen::MatrixXd::Identity(n, n);
    a.row(0).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(0) = 1.0;
    Eigen::VectorXd rho = a.fullPivLu().solve(b);
    for (Eigen::Index i = 0; i < n; ++i) rho(i) = std::max(rho(i), 0.0);
    rho /= rho.sum();
    const double residual =
        (rho.transpose() * chain.transition() - rho.transpose()).cwiseAbs().maxCoeff();
    if (residual > kStationaryTol) {
        throw std::runtime_error("stationary_distribution: solve residual " +
                                 format_double(residual, 6));
    }
    return rho;
}

/// Copy of the chain with its stationary distribution attached.
inline MarkovChain with_stationary(const MarkovChain& chain) {
    if (chain.stationary()) return chain;
    return MarkovChain(chain.states(), chain.transition(), stationary_distribution(chain));
}

/// Bayes reversal p~(y, y') = p(y', y) rho(y') / rho(y); row-stochastic with
/// the same stationary distribution.
inline MarkovChain reverse_chain(const MarkovChain& chain) {
    const auto n = static_cast<Eigen::Index>(chain.size());
    const Eigen::VectorXd rho =
        chain.stationary() ? *chain.stationary() : stationary_distribution(chain);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(rho(i) > 0.0)) {
            throw std::invalid_argument("reverse_chain: stationary probability of state '" +
                                        chain.states()[i] + "' is zero");
        }
    }
    Eigen::MatrixXd reversed(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            reversed(i, j) = chain.transition()(j, i) * rho(j) / rho(i);
        }
    }
    return MarkovChain(chain.states(), std::move(reversed), rho);
}

/// Bayes reversal composed with a kinematical involution on states:
/// p~(y, y') = p(pi y', pi y) rho(pi y') / rho(pi y); the stationary
/// distribution becomes rho o pi.
inline MarkovChain reverse_chain(const MarkovChain& chain, std::span<const int> state_involution) {
    const auto n = static_cast<Eigen::Index>(chain.size());
    if (static_cast<Eigen::Index>(state_involution.size()) != n) {
        throw std::invalid_argument("reverse_chain: involution size mismatch");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const int image = state_involution[i];
        if (image < 0 || image >= n || state_involution[image] != i) {
            throw std::invalid_argument("reverse_chain: state map is not an involution");
        }
    }
    const MarkovChain plain = reverse_chain(chain);
    const Eigen::VectorXd& rho = *plain.stationary();
    Eigen::MatrixXd relabeled(n, n);
    Eigen::VectorXd rho_pi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        rho_pi(i) = rho(state_involution[i]);
        for (Eigen::Index j = 0; j < n; ++j) {
            relabeled(i, j) = plain.transition()(state_involution[i], state_involution[j]);
        }
    }
    return MarkovChain(chain.states(), std::move(relabeled), std::move(rho_pi));
}

struct DetailedBalanceCertificate {
    bool holds;
    double max_violation;  // max |rho(y) p(y,y') - rho(y') p(y',y)|
    int witness_from;      // worst pair (-1 when n == 1)
    int witness_to;
};

inline DetailedBalanceCertificate is_detailed_balance(const MarkovChain& chain,
                                                      double tol = kRowStochasticTol) {
    const auto n = static_cast<Eigen::Index>(chain.size());
    const Eigen::VectorXd rho =
        chain.stationary() ? *chain.stationary() : stationary_distribution(chain);
    DetailedBalanceCertificate cert{true, 0.0, -1, -1};
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double violation =
                std::abs(rho(i) * chain.transition()(i, j) - rho(j) * chain.transition()(j, i));
            if (violation > cert.max_violation) {
                cert.max_violation = violation;
                cert.witness_from = static_cast<int>(i);
                cert.witness_to = static_cast<int>(j);
            }
        }
    }
    cert.holds = cert.max_violation <= tol;
    return cert;
}

/// Symmetric nonnegative interaction Phi and a potential V defining
/// transition rates p(y, y') = Phi(y, y') exp([V(y) - V(y')]/2).
class PotentialForm {
public:
    PotentialForm(Eigen::MatrixXd interaction, Eigen::VectorXd potential)
        : phi_(std::move(interaction)), v_(std::move(potential)) {
        const auto n = phi_.rows();
        if (n < 1 || phi_.cols() != n) throw std::invalid_argument("PotentialForm: Phi must be square");
        if (v_.size() != n) throw std::invalid_argument("PotentialForm: potential size mismatch");
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (phi_(i, j) != phi_(j, i)) {
                    throw std::invalid_argument("PotentialForm: Phi is not symmetric");
                }
                if (phi_(i, j) < 0.0) throw std::invalid_argument("PotentialForm: Phi has a negative entry");
            }
        }
    }

    Eigen::Index size() const { return v_.size(); }
    const Eigen::MatrixXd& interaction() const { return phi_; }
    const Eigen::VectorXd& potential() const { return v_; }

private:
    Eigen::MatrixXd phi_;
    Eigen::VectorXd v_;
};

/// Chain with off-diagonal p(y, y') = Phi(y, y') exp([V(y) - V(y')]/2) and
/// the diagonal as the row remainder. Detailed balance holds by construction
/// and rho ∝ exp(-V) is stationary.
inline MarkovChain gibbs_chain(const PotentialForm& form, std::vector<std::string> states = {}) {
    const Eigen::Index n = form.size();
    if (states.empty()) {
        for (Eigen::Index i = 0; i < n; ++i) states.push_back(std::to_string(i));
    }
    if (static_cast<Eigen::Index>(states.size()) != n) {
        throw std::invalid_argument("gibbs_chain: state label count mismatch");
    }
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            p(i, j) = form.interaction()(i, j) *
                      std::exp(0.5 * (form.potential()(i) - form.potential()(j)));
            row_sum += p(i, j);
        }
        if (row_sum > 1.0 + kRowStochasticTol) {
            throw std::invalid_argument(
                "gibbs_chain: off-diagonal row sum " + format_double(row_sum, 6) + " at state '" +
                states[i] + "' exceeds 1; rescale Phi by a factor of at most " +
                format_double(1.0 / row_sum, 6));
        }
        p(i, i) = std::max(0.0, 1.0 - row_sum);
    }
    Eigen::VectorXd rho(n);
    for (Eigen::Index i = 0; i < n; ++i) rho(i) = std::exp(-form.potential()(i));
    rho /= rho.sum();
    return MarkovChain(std::move(states), std::move(p), std::move(rho));
}

}  // namespace reversim
