// support.hpp — shared test helpers: seeded generators for states and reservoirs

#pragma once

#include "qsn/linalg.hpp"
#include "qsn/qubit.hpp"
#include "qsn/spin.hpp"

#include <random>

namespace qsn::test {

inline std::mt19937& rng() {
    static std::mt19937 gen(0x51a9e7u);
    return gen;
}

inline double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(rng());
}

// Ginibre construction: G G† normalized to unit trace is a valid random state.
inline Matrix random_density(int dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int k = 0; k < dim; ++k) g(i, k) = Complex{normal(rng()), normal(rng())};
    }
    Matrix rho = g * g.adjoint();
    rho /= rho.trace();
    return rho;
}

inline Matrix random_hermitian(int dim, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int k = 0; k < dim; ++k) a(i, k) = Complex{normal(rng()), normal(rng())};
    }
    return hermitize(a);
}

inline QubitState random_pure_unit() {
    return reservoir_unit_state(uniform(0.0, M_PI), uniform(0.0, 2.0 * M_PI - 1e-12));
}

inline QubitState random_diagonal_unit(double p_min = 0.05, double p_max = 0.95) {
    return qubit_from_sigma_z(2.0 * uniform(p_min, p_max) - 1.0);
}

} // namespace qsn::test
