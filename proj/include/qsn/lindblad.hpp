// lindblad.hpp — coarse-grained master equation for the collision model:
// RHS evaluation, RK4 integration, Liouvillian null-space steady states, and
// the closed-form steady magnetization/coherences for J = 1/2 and J = 1
//
// Generator (probe space):
//   d rho/dt = -i[H_eff, rho] + sum_i g_i^2 (xi_i+ L[S+] + xi_i- L[S-])
//              + sum_{i<j} g_i g_j (xi_s+ L_s[S-] + xi_s- L_s[S+])
// with H_eff = r tau sum_i g_i (<s_i-> S+ + <s_i+> S-),
//      xi_i± = r tau^2 <s_i± s_i∓> / 2,  xi_s± = 2 r tau^2 <s_i±><s_j±>,
//      L[o]   = 2 o rho o† - o†o rho - rho o†o,
//      L_s[o] = 2 o rho o  - o^2 rho - rho o^2.

#pragma once

#include "qsn/collision.hpp"
#include "qsn/qubit.hpp"
#include "qsn/spin.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace qsn {

struct LindbladReservoir {
    double g{0.0};
    QubitState unit;
};

struct LindbladSpec {
    SpinQuantum spin{0.5};
    std::vector<LindbladReservoir> reservoirs;
    double r{1.0};
    double tau{3.0};

    void validate() const {
        if (reservoirs.empty()) throw std::invalid_argument("LindbladSpec: reservoir list must be non-empty");
        if (!(r > 0.0)) throw std::invalid_argument("LindbladSpec: r must be > 0");
        if (!(tau > 0.0)) throw std::invalid_argument("LindbladSpec: tau must be > 0");
        for (const auto& res : reservoirs) {
            if (res.g < 0.0) throw std::invalid_argument("LindbladSpec: couplings must be >= 0");
        }
    }

    double coupling_square_sum() const {
        double s = 0.0;
        for (const auto& res : reservoirs) s += res.g * res.g;
        return s;
    }
};

inline LindbladSpec lindblad_spec_from_angles(SpinQuantum spin, const std::vector<ReservoirSpec>& reservoirs,
                                              UnitPhase phase = UnitPhase::fixed, double r = 1.0, double tau = 3.0) {
    LindbladSpec spec;
    spec.spin = spin;
    spec.r = r;
    spec.tau = tau;
    for (const auto& res : reservoirs) {
        const QubitState q = res.unit_state();
        spec.reservoirs.push_back({res.g, phase == UnitPhase::averaged ? q.dephased() : q});
    }
    return spec;
}

struct LindbladCoefficients {
    Complex gamma_p1{0.0, 0.0};   // i r tau sum_i g_i <s_i+>
    Complex gamma_m1{0.0, 0.0};   // i r tau sum_i g_i <s_i->
    double gamma_p2{0.0};         // r tau^2 sum_i g_i^2 <s_i+ s_i-> / 2
    double gamma_m2{0.0};         // r tau^2 sum_i g_i^2 <s_i- s_i+> / 2
    Complex gamma_p3{0.0, 0.0};   // 2 r tau^2 sum_{i<j} g_i g_j <s_i+><s_j+>
    Complex gamma_m3{0.0, 0.0};   // 2 r tau^2 sum_{i<j} g_i g_j <s_i-><s_j->

    std::vector<double> xi_p, xi_m;       // per reservoir: r tau^2 <s± s∓> / 2
    struct PairTerm {
        std::size_t i, j;
        Complex xi_s_p, xi_s_m;           // 2 r tau^2 <s_i±><s_j±>
    };
    std::vector<PairTerm> pairs;
};

inline LindbladCoefficients make_coefficients(const LindbladSpec& spec) {
    spec.validate();
    LindbladCoefficients c;
    const double rt = spec.r * spec.tau;
    const double rt2 = spec.r * spec.tau * spec.tau;
    for (const auto& res : spec.reservoirs) {
        c.gamma_p1 += imag_unit * rt * res.g * res.unit.e_plus();
        c.gamma_m1 += imag_unit * rt * res.g * res.unit.e_minus();
        c.xi_p.push_back(0.5 * rt2 * res.unit.p_e());
        c.xi_m.push_back(0.5 * rt2 * res.unit.p_g());
        c.gamma_p2 += res.g * res.g * c.xi_p.back();
        c.gamma_m2 += res.g * res.g * c.xi_m.back();
    }
    for (std::size_t i = 0; i < spec.reservoirs.size(); ++i) {
        for (std::size_t j = i + 1; j < spec.reservoirs.size(); ++j) {
            LindbladCoefficients::PairTerm p;
            p.i = i;
            p.j = j;
            p.xi_s_p = 2.0 * rt2 * spec.reservoirs[i].unit.e_plus() * spec.reservoirs[j].unit.e_plus();
            p.xi_s_m = 2.0 * rt2 * spec.reservoirs[i].unit.e_minus() * spec.reservoirs[j].unit.e_minus();
            const double gg = spec.reservoirs[i].g * spec.reservoirs[j].g;
            c.gamma_p3 += gg * p.xi_s_p;
            c.gamma_m3 += gg * p.xi_s_m;
            c.pairs.push_back(p);
        }
    }
    return c;
}

// H_eff = r tau sum_i g_i (<s_i-> S+ + <s_i+> S-). With gamma_±1 = i alpha(±),
// this is -i (gamma_m1 S+ + gamma_p1 S-).
inline Matrix effective_hamiltonian(const LindbladSpec& spec) {
    const auto ops = make_spin_operators(spec.spin);
    Matrix h = Matrix::Zero(spec.spin.dim(), spec.spin.dim());
    for (const auto& res : spec.reservoirs) {
        h += spec.r * spec.tau * res.g * (res.unit.e_minus() * ops.splus + res.unit.e_plus() * ops.sminus);
    }
    return h;
}

inline Matrix dissipator(const Matrix& o, const Matrix& rho) {
    const Matrix odag_o = o.adjoint() * o;
    return 2.0 * o * rho * o.adjoint() - odag_o * rho - rho * odag_o;
}

inline Matrix squeezing_dissipator(const Matrix& o, const Matrix& rho) {
    const Matrix o2 = o * o;
    return 2.0 * o * rho * o - o2 * rho - rho * o2;
}

inline Matrix lindblad_rhs(const Matrix& rho, const LindbladSpec& spec) {
    if (rho.rows() != spec.spin.dim() || rho.cols() != spec.spin.dim()) {
        throw std::invalid_argument("lindblad_rhs: dimension mismatch");
    }
    const auto ops = make_spin_operators(spec.spin);
    const auto c = make_coefficients(spec);

    Matrix out = -imag_unit * commutator(effective_hamiltonian(spec), rho);
    out += c.gamma_p2 * dissipator(ops.splus, rho);
    out += c.gamma_m2 * dissipator(ops.sminus, rho);
    out += c.gamma_m3 * squeezing_dissipator(ops.splus, rho);
    out += c.gamma_p3 * squeezing_dissipator(ops.sminus, rho);
    return out;
}

// r (Tr_R[U (rho (x) rho_R) U† ] - rho) with the full joint propagator; the
// second-order mode reproduces lindblad_rhs up to O((g tau)^3).
inline Matrix coarse_grained_rhs(const Matrix& rho, const LindbladSpec& spec, PropagatorMode mode) {
    spec.validate();
    if (rho.rows() != spec.spin.dim() || rho.cols() != spec.spin.dim()) {
        throw std::invalid_argument("coarse_grained_rhs: dimension mismatch");
    }
    std::vector<ReservoirSpec> shells;
    shells.reserve(spec.reservoirs.size());
    for (const auto& res : spec.reservoirs) shells.push_back({0.0, 0.0, res.g});
    const Matrix h = interaction_hamiltonian(spec.spin, shells);
    const Matrix u = propagator(h, spec.tau, mode);

    Matrix env = Matrix::Identity(1, 1);
    for (const auto& res : spec.reservoirs) env = kron(env, res.unit.rho);
    const Eigen::Index env_dim = env.rows();

    const Matrix joint = kron(rho, env);
    return spec.r * (ptrace_tail(u * joint * u.adjoint(), spec.spin.dim(), env_dim) - rho);
}

// ----------------------------- Liouvillian ----------------------------------

inline Matrix liouvillian_matrix(const LindbladSpec& spec) {
    const auto ops = make_spin_operators(spec.spin);
    const auto c = make_coefficients(spec);
    const Eigen::Index d = spec.spin.dim();
    const Matrix id = Matrix::Identity(d, d);

    const auto dissipator_super = [&](const Matrix& o) -> Matrix {
        const Matrix odag_o = o.adjoint() * o;
        return 2.0 * super_sandwich(o, o.adjoint()) - super_left(odag_o) - super_right(odag_o);
    };
    const auto squeezing_super = [&](const Matrix& o) -> Matrix {
        const Matrix o2 = o * o;
        return 2.0 * super_sandwich(o, o) - super_left(o2) - super_right(o2);
    };

    const Matrix h = effective_hamiltonian(spec);
    Matrix L = -imag_unit * (super_left(h) - super_right(h));
    L += c.gamma_p2 * dissipator_super(ops.splus);
    L += c.gamma_m2 * dissipator_super(ops.sminus);
    L += c.gamma_m3 * squeezing_super(ops.splus);
    L += c.gamma_p3 * squeezing_super(ops.sminus);
    return L;
}

// Null-space steady state via SVD of the vectorized Liouvillian. A degenerate
// null space (dimension > 1) is reported, not silently resolved.
inline DensityMatrix steady_state(const LindbladSpec& spec) {
    spec.validate();
    const Eigen::Index d = spec.spin.dim();
    Matrix L = liouvillian_matrix(spec);
    const double scale = max_abs(L);
    if (!(scale > 0.0)) throw std::runtime_error("steady_state: zero Liouvillian (degenerate null space)");
    L /= scale;

    Eigen::BDCSVD<Matrix> svd(L, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const Eigen::Index n = sv.size();
    if (n >= 2 && sv(n - 2) < 1e-10 * sv(0)) {
        std::ostringstream msg;
        msg << "steady_state: degenerate null space (second singular value " << sv(n - 2) << ")";
        throw std::runtime_error(msg.str());
    }
    Matrix rho = unvec(svd.matrixV().col(n - 1), d);
    const Complex tr = rho.trace();
    if (std::abs(tr) < 1e-8) throw std::runtime_error("steady_state: traceless null vector");
    rho /= tr;
    rho = hermitize(rho);

    const double residual = (liouvillian_matrix(spec) * vec(rho)).cwiseAbs().maxCoeff();
    if (residual > 1e-10 * std::max(1.0, scale)) {
        std::ostringstream msg;
        msg << "steady_state: residual " << residual << " exceeds tolerance";
        throw std::runtime_error(msg.str());
    }
    return DensityMatrix{spec.spin, rho};
}

// ------------------------------ Integration ---------------------------------

// Fixed-step RK4 in master-equation time.
inline Trajectory integrate(const DensityMatrix& initial, const LindbladSpec& spec, double t_end, double dt) {
    spec.validate();
    if (initial.spin != spec.spin) throw std::invalid_argument("integrate: spin mismatch");
    if (!(dt > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("integrate: t_end and dt must be > 0");
    const double dt_max = 0.1 / (spec.r * spec.tau * spec.tau * spec.coupling_square_sum());
    if (dt > dt_max) {
        std::ostringstream msg;
        msg << "integrate: dt " << dt << " exceeds stability bound " << dt_max;
        throw std::invalid_argument(msg.str());
    }

    const auto ops = make_spin_operators(spec.spin);
    const double j = spec.spin.j();
    const auto rhs = [&](const Matrix& rho) { return lindblad_rhs(rho, spec); };

    const int steps = static_cast<int>(std::ceil(t_end / dt));
    Matrix rho = initial.rho;
    Trajectory traj;
    traj.points.reserve(static_cast<std::size_t>(steps) + 1);
    traj.points.push_back({0, 0.0, (rho * ops.sz).trace().real() / j});
    traj.snapshots.emplace_back(0, DensityMatrix{spec.spin, rho});
    for (int k = 1; k <= steps; ++k) {
        const Matrix k1 = rhs(rho);
        const Matrix k2 = rhs(rho + 0.5 * dt * k1);
        const Matrix k3 = rhs(rho + 0.5 * dt * k2);
        const Matrix k4 = rhs(rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        traj.points.push_back({k, k * dt, (rho * ops.sz).trace().real() / j});
        if (k % 32 == 0 || k == steps) {
            const double min_eig = min_eigenvalue_hermitian(rho);
            if (min_eig < -1e-8) {
                std::ostringstream msg;
                msg << "integrate: positivity violated at t = " << k * dt << " (min eigenvalue " << min_eig << ")";
                throw std::runtime_error(msg.str());
            }
        }
        if (k % 10 == 0) traj.snapshots.emplace_back(k, DensityMatrix{spec.spin, rho});
    }
    const double drift = std::abs(rho.trace().real() - 1.0);
    if (drift > 1e-9) {
        std::ostringstream msg;
        msg << "integrate: trace drift " << drift << " exceeds 1e-9";
        throw std::runtime_error(msg.str());
    }
    return traj;
}

// ------------------------------ Closed forms --------------------------------

// Normalized steady magnetization from the population rate balance, with
// E = sum g_i^2 p_e_i and G = sum g_i^2 p_g_i:
//   J=1/2: (E - G) / (E + G)
//   J=1:   (E^2 - G^2) / (E^2 + E G + G^2)
inline double steady_magnetization_closed_form(const LindbladSpec& spec) {
    spec.validate();
    double e = 0.0, g = 0.0;
    for (const auto& res : spec.reservoirs) {
        e += res.g * res.g * res.unit.p_e();
        g += res.g * res.g * res.unit.p_g();
    }
    if (!(e + g > 0.0)) throw std::invalid_argument("steady_magnetization_closed_form: all couplings are zero");
    if (spec.spin.two_j == 1) return (e - g) / (e + g);
    if (spec.spin.two_j == 2) return (e * e - g * g) / (e * e + e * g + g * g);
    throw std::invalid_argument("steady_magnetization_closed_form: closed form available for J = 1/2 and J = 1 only");
}

// Steady coherences <Sx>_ss = (<Sz>_ss/sqrt(2)) (gamma_m1 - gamma_p1) and
// <Sy>_ss = i (<Sz>_ss/sqrt(2)) (gamma_m1 + gamma_p1), in <Sz> units.
struct SteadyCoherences {
    double sx{0.0};
    double sy{0.0};
};

inline SteadyCoherences steady_coherences_closed_form(const LindbladSpec& spec) {
    const double m_norm = steady_magnetization_closed_form(spec);
    const double sz_ss = m_norm * spec.spin.j();
    const auto c = make_coefficients(spec);
    const Complex sx = (sz_ss / std::sqrt(2.0)) * (c.gamma_m1 - c.gamma_p1);
    const Complex sy = imag_unit * (sz_ss / std::sqrt(2.0)) * (c.gamma_m1 + c.gamma_p1);
    if (std::abs(sx.imag()) > 1e-12 || std::abs(sy.imag()) > 1e-12) {
        throw std::runtime_error("steady_coherences_closed_form: non-real result");
    }
    return SteadyCoherences{sx.real(), sy.real()};
}

} // namespace qsn
