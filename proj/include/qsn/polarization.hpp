// polarization.hpp — Clebsch-Gordan coefficients and the orthonormal
// irreducible tensor (polarization operator) basis for spin-J density matrices

#pragma once

#include "qsn/spin.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qsn {

namespace detail {

inline long double factorial_ld(int n) {
    static const auto table = [] {
        std::array<long double, 64> t{};
        t[0] = 1.0L;
        for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * static_cast<long double>(i);
        return t;
    }();
    if (n < 0 || n >= static_cast<int>(table.size())) throw std::out_of_range("factorial_ld: argument out of range");
    return table[static_cast<std::size_t>(n)];
}

} // namespace detail

// <j1 m1; j2 m2 | J M> by Racah's sum formula. Angular momenta are passed
// doubled so half-integers stay exact.
inline double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_J, int two_M) {
    using detail::factorial_ld;
    if (two_M != two_m1 + two_m2) return 0.0;
    if (two_J < std::abs(two_j1 - two_j2) || two_J > two_j1 + two_j2) return 0.0;
    if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 || std::abs(two_M) > two_J) return 0.0;
    // All of these are even by selection rules; halve to integer factorial args.
    const int a1 = (two_j1 + two_j2 - two_J) / 2;
    const int a2 = (two_j1 - two_j2 + two_J) / 2;
    const int a3 = (-two_j1 + two_j2 + two_J) / 2;
    const int a4 = (two_j1 + two_j2 + two_J) / 2 + 1;
    const int jm1 = (two_j1 + two_m1) / 2, jn1 = (two_j1 - two_m1) / 2;
    const int jm2 = (two_j2 + two_m2) / 2, jn2 = (two_j2 - two_m2) / 2;
    const int JM = (two_J + two_M) / 2, JN = (two_J - two_M) / 2;

    const long double prefactor =
        std::sqrt(static_cast<long double>(two_J + 1) *
                  factorial_ld(a1) * factorial_ld(a2) * factorial_ld(a3) / factorial_ld(a4) *
                  factorial_ld(JM) * factorial_ld(JN) *
                  factorial_ld(jm1) * factorial_ld(jn1) * factorial_ld(jm2) * factorial_ld(jn2));

    const int b1 = (two_J - two_j2 + two_m1) / 2;   // J - j2 + m1
    const int b2 = (two_J - two_j1 - two_m2) / 2;   // J - j1 - m2
    int k_min = std::max(0, std::max(-b1, -b2));
    int k_max = std::min(a1, std::min(jn1, jm2));

    long double sum = 0.0L;
    for (int k = k_min; k <= k_max; ++k) {
        const long double term = factorial_ld(k) * factorial_ld(a1 - k) * factorial_ld(jn1 - k) *
                                 factorial_ld(jm2 - k) * factorial_ld(b1 + k) * factorial_ld(b2 + k);
        sum += ((k % 2 == 0) ? 1.0L : -1.0L) / term;
    }
    return static_cast<double>(prefactor * sum);
}

// Polarization operators T_lm, l = 1..2J, m = -l..l, with matrix elements
//   <j m' | T_lm | j m> = sqrt((2l+1)/(2j+1)) <j m; l m_t | j m'>.
// Together with 1/sqrt(d) they form an orthonormal basis under Tr[A† B].
struct PolarizationBasis {
    struct Component {
        int l;
        int m;
        Matrix t;
    };

    SpinQuantum spin;
    std::vector<Component> components;
};

inline PolarizationBasis make_polarization_basis(SpinQuantum spin) {
    const int d = spin.dim();
    const int two_j = spin.two_j;
    PolarizationBasis basis;
    basis.spin = spin;
    for (int l = 1; l <= two_j; ++l) {
        for (int m = -l; m <= l; ++m) {
            Matrix t = Matrix::Zero(d, d);
            const double scale = std::sqrt(static_cast<double>(2 * l + 1) / static_cast<double>(d));
            for (int row = 0; row < d; ++row) {
                for (int col = 0; col < d; ++col) {
                    const int two_mp = two_j - 2 * row;
                    const int two_m = two_j - 2 * col;
                    t(row, col) = scale * clebsch_gordan(two_j, two_m, 2 * l, 2 * m, two_j, two_mp);
                }
            }
            basis.components.push_back({l, m, std::move(t)});
        }
    }
    return basis;
}

// Generalized Bloch vector r_lm = Tr[T_lm† rho], in component order.
inline std::vector<Complex> decompose(const PolarizationBasis& basis, const Matrix& rho) {
    if (rho.rows() != basis.spin.dim() || rho.cols() != basis.spin.dim()) {
        throw std::invalid_argument("decompose: dimension mismatch");
    }
    std::vector<Complex> r;
    r.reserve(basis.components.size());
    for (const auto& c : basis.components) r.push_back((c.t.adjoint() * rho).trace());
    return r;
}

inline Matrix reconstruct(const PolarizationBasis& basis, const std::vector<Complex>& r) {
    if (r.size() != basis.components.size()) throw std::invalid_argument("reconstruct: coefficient count mismatch");
    const int d = basis.spin.dim();
    Matrix rho = Matrix::Identity(d, d) / static_cast<double>(d);
    for (std::size_t i = 0; i < r.size(); ++i) rho += r[i] * basis.components[i].t;
    return rho;
}

} // namespace qsn
