// linalg.hpp — dense complex matrix helpers: Kronecker products, partial traces,
// vectorization, Hermiticity checks

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <complex>
#include <stdexcept>

namespace qsn {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline constexpr Complex imag_unit{0.0, 1.0};

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    out = Eigen::kroneckerProduct(a, b);
    return out;
}

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }
inline Matrix anticommutator(const Matrix& a, const Matrix& b) { return a * b + b * a; }

inline double max_abs(const Matrix& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& a, double tol = 1e-12) {
    return a.rows() == a.cols() && max_abs(a - a.adjoint()) <= tol;
}

inline Matrix hermitize(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

// Partial trace over the trailing factor: rho acts on C^dA x C^dB, returns the
// dA x dA reduced matrix. Index convention: row = iA*dB + iB.
inline Matrix ptrace_tail(const Matrix& rho, Eigen::Index dim_a, Eigen::Index dim_b) {
    if (dim_a <= 0 || dim_b <= 0) throw std::invalid_argument("ptrace_tail: dims must be > 0");
    if (rho.rows() != dim_a * dim_b || rho.cols() != dim_a * dim_b) {
        throw std::invalid_argument("ptrace_tail: dimension mismatch");
    }
    Matrix out = Matrix::Zero(dim_a, dim_a);
    for (Eigen::Index i = 0; i < dim_a; ++i) {
        for (Eigen::Index k = 0; k < dim_a; ++k) {
            Complex sum{0.0, 0.0};
            for (Eigen::Index b = 0; b < dim_b; ++b) {
                sum += rho(i * dim_b + b, k * dim_b + b);
            }
            out(i, k) = sum;
        }
    }
    return out;
}

// Column-major flattening, so vec(A rho B) = kron(B^T, A) vec(rho).
inline Vector vec(const Matrix& a) {
    return Eigen::Map<const Vector>(a.data(), a.size());
}

inline Matrix unvec(const Vector& v, Eigen::Index n) {
    if (v.size() != n * n) throw std::invalid_argument("unvec: size mismatch");
    return Eigen::Map<const Matrix>(v.data(), n, n);
}

inline Matrix super_left(const Matrix& a) {
    return kron(Matrix::Identity(a.rows(), a.rows()), a);
}

inline Matrix super_right(const Matrix& b) {
    return kron(b.transpose(), Matrix::Identity(b.rows(), b.rows()));
}

// kron(conj(B^dag)^T, A) applied to vec(rho) gives vec(A rho B^dag) when built
// as super_sandwich(A, B) with B the operator on the right of rho.
inline Matrix super_sandwich(const Matrix& left, const Matrix& right) {
    return kron(right.transpose(), left);
}

inline double min_eigenvalue_hermitian(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(a));
    if (es.info() != Eigen::Success) throw std::runtime_error("min_eigenvalue_hermitian: eigensolve failed");
    return es.eigenvalues().minCoeff();
}

} // namespace qsn
