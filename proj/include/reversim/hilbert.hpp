#pragma once

#include "reversim/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace reversim {

// Construction invariants are checked at 1e-10, algebraic identities at 1e-12.
inline constexpr double kConstructionTol = 1e-10;
inline constexpr double kAlgebraTol = 1e-12;

/// Normalized complex amplitude vector on a d-dimensional space.
class StateVector {
public:
    explicit StateVector(CVector amplitudes) : amps_(std::move(amplitudes)) {
        if (amps_.size() == 0) {
            throw std::invalid_argument("StateVector: empty amplitude vector");
        }
        const double norm = amps_.norm();
        if (!(norm > 1e-12)) {
            throw std::invalid_argument("StateVector: cannot normalize a zero vector");
        }
        amps_ /= norm;
    }

    static StateVector basis_state(int dim, int index) {
        if (dim < 1 || index < 0 || index >= dim) {
            throw std::invalid_argument("StateVector::basis_state: index out of range");
        }
        CVector v = CVector::Zero(dim);
        v(index) = 1.0;
        return StateVector(std::move(v));
    }

    int dim() const { return static_cast<int>(amps_.size()); }
    const CVector& amplitudes() const { return amps_; }

private:
    CVector amps_;
};

/// Ray equality: | |<a|b>| - 1 | <= tol, ignoring the global phase.
inline bool same_up_to_phase(const StateVector& a, const StateVector& b,
                             double tol = kConstructionTol) {
    if (a.dim() != b.dim()) return false;
    return std::abs(std::abs(a.amplitudes().dot(b.amplitudes())) - 1.0) <= tol;
}

/// Hermitian, unit-trace, positive-semidefinite matrix.
class DensityMatrix {
public:
    explicit DensityMatrix(CMatrix entries) : m_(std::move(entries)) {
        if (m_.rows() != m_.cols() || m_.rows() == 0) {
            throw std::invalid_argument("DensityMatrix: matrix must be square and non-empty");
        }
        const double herm = hermiticity_defect(m_);
        if (herm > kConstructionTol) {
            throw std::invalid_argument("DensityMatrix: not Hermitian (defect " +
                                        format_double(herm, 6) + ")");
        }
        const double trace_err = std::abs(m_.trace() - Complex{1.0, 0.0});
        if (trace_err > kConstructionTol) {
            throw std::invalid_argument("DensityMatrix: trace differs from 1 by " +
                                        format_double(trace_err, 6));
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(m_, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) {
            throw std::runtime_error("DensityMatrix: eigenvalue check failed to converge");
        }
        const double min_eig = solver.eigenvalues().minCoeff();
        if (min_eig < -kConstructionTol) {
            throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                        format_double(min_eig, 6));
        }
    }

    static DensityMatrix maximally_mixed(int dim) {
        if (dim < 1) throw std::invalid_argument("DensityMatrix: dimension must be positive");
        return DensityMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
    }

    static DensityMatrix pure(const StateVector& psi) {
        return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
    }

    int dim() const { return static_cast<int>(m_.rows()); }
    const CMatrix& entries() const { return m_; }

private:
    CMatrix m_;
};

class HermitianOperator {
public:
    explicit HermitianOperator(CMatrix entries) : m_(std::move(entries)) {
        if (m_.rows() != m_.cols() || m_.rows() == 0) {
            throw std::invalid_argument("HermitianOperator: matrix must be square and non-empty");
        }
        const double defect = hermiticity_defect(m_);
        if (defect > kConstructionTol) {
            throw std::invalid_argument("HermitianOperator: not Hermitian (max asymmetry " +
                                        format_double(defect, 6) + ")");
        }
    }

    static HermitianOperator zero(int dim) {
        return HermitianOperator(CMatrix::Zero(dim, dim));
    }

    int dim() const { return static_cast<int>(m_.rows()); }
    const CMatrix& matrix() const { return m_; }

private:
    CMatrix m_;
};

inline HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("operator+: dimension mismatch");
    return HermitianOperator(a.matrix() + b.matrix());
}

inline HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("operator-: dimension mismatch");
    return HermitianOperator(a.matrix() - b.matrix());
}

inline HermitianOperator operator*(double scale, const HermitianOperator& a) {
    return HermitianOperator(scale * a.matrix());
}

class UnitaryOperator {
public:
    explicit UnitaryOperator(CMatrix entries) : m_(std::move(entries)) {
        if (m_.rows() != m_.cols() || m_.rows() == 0) {
            throw std::invalid_argument("UnitaryOperator: matrix must be square and non-empty");
        }
        const double defect = unitarity_defect(m_);
        if (defect > kConstructionTol) {
            throw std::invalid_argument("UnitaryOperator: not unitary (defect " +
                                        format_double(defect, 6) + ")");
        }
    }

    StateVector apply(const StateVector& psi) const {
        if (psi.dim() != dim()) throw std::invalid_argument("UnitaryOperator: dimension mismatch");
        return StateVector(m_ * psi.amplitudes());
    }

    int dim() const { return static_cast<int>(m_.rows()); }
    const CMatrix& matrix() const { return m_; }

private:
    CMatrix m_;
};

/// Antiunitary involution psi -> V conj(psi) with V unitary and
/// V conj(V) = 1, so applying it twice is the identity.
class AntiunitaryInvolution {
public:
    explicit AntiunitaryInvolution(CMatrix basis_map) : v_(std::move(basis_map)) {
        if (v_.rows() != v_.cols() || v_.rows() == 0) {
            throw std::invalid_argument("AntiunitaryInvolution: matrix must be square and non-empty");
        }
        const double udef = unitarity_defect(v_);
        if (udef > kConstructionTol) {
            throw std::invalid_argument("AntiunitaryInvolution: basis map not unitary (defect " +
                                        format_double(udef, 6) + ")");
        }
        const double idef =
            max_abs(CMatrix(v_ * v_.conjugate() - CMatrix::Identity(v_.rows(), v_.cols())));
        if (idef > kConstructionTol) {
            throw std::invalid_argument(
                "AntiunitaryInvolution: squares to something other than the identity (defect " +
                format_double(idef, 6) + ")");
        }
    }

    /// Plain complex conjugation in the computational basis (V = 1).
    static AntiunitaryInvolution conjugation(int dim) {
        return AntiunitaryInvolution(CMatrix::Identity(dim, dim));
    }

    /// The spin convention V = tensor power of i*sigma_y. For an odd number
    /// of spin-1/2 sites this squares to -1 (Kramers), so it is rejected.
    static AntiunitaryInvolution spin_flip(int n_spins) {
        if (n_spins < 1) throw std::invalid_argument("spin_flip: need at least one spin");
        if (n_spins % 2 != 0) {
            throw std::invalid_argument(
                "spin_flip: i*sigma_y per site squares to -1 for an odd number of "
                "spin-1/2 sites and is not an involution");
        }
        CMatrix factor(2, 2);
        factor << 0.0, 1.0, -1.0, 0.0;
        CMatrix v = CMatrix::Identity(1, 1);
        for (int i = 0; i < n_spins; ++i) {
            CMatrix next(v.rows() * 2, v.cols() * 2);
            next.topLeftCorner(v.rows(), v.cols()) = factor(0, 0) * v;
            next.topRightCorner(v.rows(), v.cols()) = factor(0, 1) * v;
            next.bottomLeftCorner(v.rows(), v.cols()) = factor(1, 0) * v;
            next.bottomRightCorner(v.rows(), v.cols()) = factor(1, 1) * v;
            v = std::move(next);
        }
        return AntiunitaryInvolution(std::move(v));
    }

    int dim() const { return static_cast<int>(v_.rows()); }
    const CMatrix& basis_map() const { return v_; }

private:
    CMatrix v_;
};

/// Eigenvalue cluster of a Hermitian operator: representative eigenvalue
/// (mean of the merged values) and an orthonormal eigenbasis.
struct EigenvalueCluster {
    double eigenvalue;
    std::vector<StateVector> basis;

    int dim() const { return static_cast<int>(basis.size()); }
};

/// Full Hermitian eigendecomposition with eigenvalues ascending; successive
/// eigenvalues closer than cluster_tol are merged into one cluster. Exactly
/// diagonal operators decompose exactly in the computational basis.
inline std::vector<EigenvalueCluster> eigendecompose(const HermitianOperator& h,
                                                     double cluster_tol) {
    if (!(cluster_tol > 0.0)) {
        throw std::invalid_argument("eigendecompose: cluster tolerance must be positive");
    }
    const int d = h.dim();
    std::vector<double> values(d);
    std::vector<CVector> vectors(d);
    if (is_exactly_diagonal(h.matrix())) {
        std::vector<int> order(d);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return h.matrix()(a, a).real() < h.matrix()(b, b).real();
        });
        for (int k = 0; k < d; ++k) {
            values[k] = h.matrix()(order[k], order[k]).real();
            CVector v = CVector::Zero(d);
            v(order[k]) = 1.0;
            vectors[k] = std::move(v);
        }
    } else {
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix());
        if (solver.info() != Eigen::Success) {
            throw std::runtime_error("eigendecompose: eigensolver did not converge");
        }
        for (int k = 0; k < d; ++k) {
            values[k] = solver.eigenvalues()(k);
            vectors[k] = solver.eigenvectors().col(k);
        }
    }

    std::vector<EigenvalueCluster> clusters;
    double running_sum = 0.0;
    for (int k = 0; k < d; ++k) {
        if (clusters.empty() || values[k] - values[k - 1] > cluster_tol) {
            clusters.push_back(EigenvalueCluster{values[k], {}});
            running_sum = 0.0;
        }
        running_sum += values[k];
        clusters.back().basis.emplace_back(std::move(vectors[k]));
        clusters.back().eigenvalue = running_sum / clusters.back().basis.size();
    }
    return clusters;
}

/// U(t) = exp(-i t H) via eigendecomposition (hbar = 1). U(0) is the exact
/// identity; diagonal Hamiltonians exponentiate exactly.
inline UnitaryOperator evolve(const HermitianOperator& h, double t) {
    const int d = h.dim();
    if (t == 0.0) return UnitaryOperator(CMatrix::Identity(d, d));
    const Complex minus_i{0.0, -1.0};
    if (is_exactly_diagonal(h.matrix())) {
        CMatrix u = CMatrix::Zero(d, d);
        for (int k = 0; k < d; ++k) {
            u(k, k) = std::exp(minus_i * t * h.matrix()(k, k).real());
        }
        return UnitaryOperator(std::move(u));
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix());
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("evolve: eigensolver did not converge");
    }
    CVector phases(d);
    for (int k = 0; k < d; ++k) {
        phases(k) = std::exp(minus_i * t * solver.eigenvalues()(k));
    }
    CMatrix u = solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
    return UnitaryOperator(std::move(u));
}

/// pi(psi) = V conj(psi).
inline StateVector apply_involution(const AntiunitaryInvolution& pi, const StateVector& psi) {
    if (pi.dim() != psi.dim()) {
        throw std::invalid_argument("apply_involution: dimension mismatch");
    }
    return StateVector(pi.basis_map() * psi.amplitudes().conjugate());
}

/// The matrix B with B psi = pi(A(pi psi)) for all psi, i.e.
/// B = V conj(A) V^dagger.
inline CMatrix conjugate_operator(const AntiunitaryInvolution& pi, const CMatrix& a) {
    if (a.rows() != pi.dim() || a.cols() != pi.dim()) {
        throw std::invalid_argument("conjugate_operator: dimension mismatch");
    }
    return pi.basis_map() * a.conjugate() * pi.basis_map().adjoint();
}

struct ReversalSymmetryReport {
    bool holds;
    double max_deviation;
};

/// Deviation of pi U(t) pi from U(t)^dagger in the max norm. Equivalent to
/// testing pi H pi = H; holding at one t implies holding at every t.
inline ReversalSymmetryReport check_reversal_symmetry(const HermitianOperator& h,
                                                      const AntiunitaryInvolution& pi, double t,
                                                      double tol = kConstructionTol) {
    if (h.dim() != pi.dim()) {
        throw std::invalid_argument("check_reversal_symmetry: dimension mismatch");
    }
    const CMatrix u = evolve(h, t).matrix();
    const double deviation = max_abs(CMatrix(conjugate_operator(pi, u) - u.adjoint()));
    return ReversalSymmetryReport{deviation <= tol, deviation};
}

}  // namespace reversim
