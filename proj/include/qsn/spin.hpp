// spin.hpp — spin-J quantum numbers, angular momentum operators, spin coherent
// states, and the magnetization observable
//
// Basis convention throughout: |j,m> ordered by decreasing m, so index 0 is
// m = +J ("top") and index d-1 is m = -J. Sz is diagonal with entries equal to
// the m-values in that order.

#pragma once

#include "qsn/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qsn {

// Half-integer spin quantum number. Stored as 2J so J = 1/2, 1, 3/2, ... are
// represented exactly.
struct SpinQuantum {
    int two_j{1};

    SpinQuantum() = default;

    explicit SpinQuantum(double j) {
        const double doubled = 2.0 * j;
        const double rounded = std::round(doubled);
        if (!(j > 0.0) || std::abs(doubled - rounded) > 1e-9) {
            throw std::invalid_argument("SpinQuantum: J must be a positive multiple of 1/2");
        }
        two_j = static_cast<int>(rounded);
    }

    double j() const { return 0.5 * two_j; }
    int dim() const { return two_j + 1; }

    // m-values J, J-1, ..., -J
    std::vector<double> m_values() const {
        std::vector<double> ms(static_cast<std::size_t>(dim()));
        for (int i = 0; i < dim(); ++i) ms[static_cast<std::size_t>(i)] = 0.5 * (two_j - 2 * i);
        return ms;
    }

    friend bool operator==(const SpinQuantum& a, const SpinQuantum& b) { return a.two_j == b.two_j; }
    friend bool operator!=(const SpinQuantum& a, const SpinQuantum& b) { return !(a == b); }
};

struct SpinOperatorSet {
    SpinQuantum spin;
    Matrix sx, sy, sz, splus, sminus;
};

// Standard matrix elements <j,m'|S±|j,m> = sqrt(j(j+1) - m(m±1)) δ_{m',m±1}.
inline SpinOperatorSet make_spin_operators(SpinQuantum spin) {
    const int d = spin.dim();
    const double j = spin.j();
    const auto ms = spin.m_values();

    Matrix splus = Matrix::Zero(d, d);
    for (int col = 1; col < d; ++col) {
        const double m = ms[static_cast<std::size_t>(col)];
        splus(col - 1, col) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
    Matrix sminus = splus.adjoint();

    SpinOperatorSet ops;
    ops.spin = spin;
    ops.splus = splus;
    ops.sminus = sminus;
    ops.sx = 0.5 * (splus + sminus);
    ops.sy = -0.5 * imag_unit * (splus - sminus);
    ops.sz = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) ops.sz(i, i) = ms[static_cast<std::size_t>(i)];
    return ops;
}

// Probe state: d x d density matrix tagged with its spin quantum number.
struct DensityMatrix {
    SpinQuantum spin;
    Matrix rho;

    int dim() const { return spin.dim(); }

    double trace_real() const { return rho.trace().real(); }

    // Hermitian to tol_herm, unit trace to tol_trace, spectrum >= -tol_psd.
    bool is_valid(double tol_herm = 1e-12, double tol_trace = 1e-12, double tol_psd = 1e-10) const {
        if (rho.rows() != dim() || rho.cols() != dim()) return false;
        if (!is_hermitian(rho, tol_herm)) return false;
        if (std::abs(rho.trace() - Complex{1.0, 0.0}) > tol_trace) return false;
        return min_eigenvalue_hermitian(rho) >= -tol_psd;
    }
};

inline void check_angles(double theta, double phi) {
    if (!(theta >= 0.0 && theta <= M_PI)) throw std::invalid_argument("theta must lie in [0, pi]");
    if (!(phi >= 0.0 && phi < 2.0 * M_PI)) throw std::invalid_argument("phi must lie in [0, 2*pi)");
}

// Amplitudes of |theta, phi> over |j,m>, m = J..-J:
//   sqrt(C(2j, j-m)) cos(theta/2)^(j+m) (sin(theta/2) e^{i phi})^(j-m)
inline Vector spin_coherent_amplitudes(SpinQuantum spin, double theta, double phi) {
    check_angles(theta, phi);
    const int d = spin.dim();
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    Vector amp(d);
    for (int i = 0; i < d; ++i) {
        const int k = i;                 // k = j - m, runs 0..2j from the top
        const int n = spin.two_j;
        double binom = 1.0;
        for (int t = 0; t < k; ++t) binom *= static_cast<double>(n - t) / static_cast<double>(t + 1);
        amp(i) = std::sqrt(binom) * std::pow(c, n - k) * std::pow(s, k) *
                 std::exp(imag_unit * (static_cast<double>(k) * phi));
    }
    return amp;
}

inline DensityMatrix spin_coherent_state(SpinQuantum spin, double theta, double phi) {
    const Vector amp = spin_coherent_amplitudes(spin, theta, phi);
    return DensityMatrix{spin, amp * amp.adjoint()};
}

// Tr[rho Sz] / J. The imaginary residue must be numerical noise.
inline double normalized_magnetization(const DensityMatrix& state) {
    const auto ops = make_spin_operators(state.spin);
    if (state.rho.rows() != ops.sz.rows() || state.rho.cols() != ops.sz.cols()) {
        throw std::invalid_argument("normalized_magnetization: dimension mismatch");
    }
    const Complex val = (state.rho * ops.sz).trace();
    if (std::abs(val.imag()) > 1e-12) {
        throw std::runtime_error("normalized_magnetization: non-real expectation");
    }
    return val.real() / state.spin.j();
}

} // namespace qsn
