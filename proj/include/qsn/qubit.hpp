// qubit.hpp — reservoir unit states and their ladder-operator expectations
//
// Qubit basis: |e> = (1,0), |g> = (0,1). sigma_plus = |e><g| raises, so
// <sigma_plus sigma_minus> is the excited-state population p_e.

#pragma once

#include "qsn/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace qsn {

struct QubitState {
    Matrix rho{Matrix::Zero(2, 2)};

    double p_e() const { return rho(0, 0).real(); }       // <sigma+ sigma->
    double p_g() const { return rho(1, 1).real(); }       // <sigma- sigma+>
    Complex e_minus() const { return rho(0, 1); }          // <sigma->
    Complex e_plus() const { return rho(1, 0); }           // <sigma+>
    double sigma_z() const { return p_e() - p_g(); }

    double purity() const { return (rho * rho).trace().real(); }

    // Population-only copy; coherences dropped. Models a unit stream with
    // uniformly random phase per collision.
    QubitState dephased() const {
        QubitState out;
        out.rho(0, 0) = rho(0, 0);
        out.rho(1, 1) = rho(1, 1);
        return out;
    }

    bool is_valid(double tol = 1e-12) const {
        if (!is_hermitian(rho, tol)) return false;
        if (std::abs(rho.trace() - Complex{1.0, 0.0}) > tol) return false;
        const double mn = min_eigenvalue_hermitian(rho);
        const double mx = -min_eigenvalue_hermitian(Matrix(-rho));
        return mn >= -tol && mx <= 1.0 + tol;
    }
};

inline void check_qubit_angles(double theta, double phi) {
    if (!(theta >= 0.0 && theta <= M_PI)) throw std::invalid_argument("theta must lie in [0, pi]");
    if (!(phi >= 0.0 && phi < 2.0 * M_PI)) throw std::invalid_argument("phi must lie in [0, 2*pi)");
}

// Pure unit state
//   [[ (1+cos t)/2,        e^{-i p} sin t / 2 ],
//    [ e^{i p} sin t / 2,  (1-cos t)/2        ]]
inline QubitState reservoir_unit_state(double theta, double phi) {
    check_qubit_angles(theta, phi);
    QubitState q;
    q.rho(0, 0) = 0.5 * (1.0 + std::cos(theta));
    q.rho(1, 1) = 0.5 * (1.0 - std::cos(theta));
    q.rho(0, 1) = 0.5 * std::sin(theta) * std::exp(-imag_unit * phi);
    q.rho(1, 0) = 0.5 * std::sin(theta) * std::exp(imag_unit * phi);
    return q;
}

// Diagonal unit with the given <sigma_z> in [-1, 1].
inline QubitState qubit_from_sigma_z(double sz) {
    if (!(sz >= -1.0 && sz <= 1.0)) throw std::invalid_argument("qubit_from_sigma_z: <sigma_z> must lie in [-1, 1]");
    QubitState q;
    q.rho(0, 0) = 0.5 * (1.0 + sz);
    q.rho(1, 1) = 0.5 * (1.0 - sz);
    return q;
}

} // namespace qsn
