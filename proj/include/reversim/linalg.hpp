#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <complex>
#include <string>

namespace reversim {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

template <typename Derived>
inline double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Largest entry of |M - M^dagger|; zero iff M is exactly Hermitian.
inline double hermiticity_defect(const CMatrix& m) {
    return max_abs(m - m.adjoint());
}

inline double unitarity_defect(const CMatrix& m) {
    return max_abs(m.adjoint() * m - CMatrix::Identity(m.rows(), m.cols()));
}

/// Tr[A B] without forming the product, O(d^2).
inline Complex trace_product(const CMatrix& a, const CMatrix& b) {
    return a.transpose().cwiseProduct(b).sum();
}

inline bool is_exactly_diagonal(const CMatrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (i != j && m(i, j) != Complex{0.0, 0.0}) return false;
        }
    }
    return true;
}

/// Locale-independent decimal rendering with the given number of
/// significant digits (printf %g semantics).
inline std::string format_double(double value, int significant_digits) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value,
                             std::chars_format::general, significant_digits);
    return std::string(buf, res.ptr);
}

}  // namespace reversim
