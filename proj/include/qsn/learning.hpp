// learning.hpp — gradient descent over reservoir coupling rates: quadratic
// cost on the steady magnetization, analytic gradient for J = 1/2 and J = 1,
// finite-difference gradient over the null-space solver for any J

#pragma once

#include "qsn/lindblad.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace qsn {

// Thrown when the descent diverges; carries the suggested remedy.
struct divergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// C = (m_des - m_act)^2 / 2, both in normalized magnetization units.
inline double cost(double m_des, double m_act) {
    const double d = m_des - m_act;
    return 0.5 * d * d;
}

namespace detail {

inline LindbladSpec with_couplings(LindbladSpec spec, const std::vector<double>& g) {
    if (g.size() != spec.reservoirs.size()) throw std::invalid_argument("with_couplings: coupling count mismatch");
    for (std::size_t i = 0; i < g.size(); ++i) spec.reservoirs[i].g = g[i];
    return spec;
}

// Population-balance steady normalized magnetization for a single diagonal
// reservoir, valid for any J: populations follow the geometric ratio
// w = p_e / p_g down the Sz ladder.
inline double single_reservoir_steady(SpinQuantum spin, double p_e) {
    const double p_g = 1.0 - p_e;
    const int d = spin.dim();
    if (p_g <= 0.0) return 1.0;
    if (p_e <= 0.0) return -1.0;
    const double w = p_e / p_g;
    double num = 0.0, den = 0.0, wk = 1.0;
    for (int k = 0; k < d; ++k) {   // k rungs above m = -J
        num += (static_cast<double>(k) - spin.j()) * wk;
        den += wk;
        wk *= w;
    }
    return num / (den * spin.j());
}

} // namespace detail

// d C / d g_i from the closed-form quotient A = X/Y, J in {1/2, 1}.
inline std::vector<double> grad_cost_analytic(const std::vector<double>& g, const LindbladSpec& base,
                                              double m_des) {
    if (base.spin.two_j > 2) {
        throw std::invalid_argument("grad_cost_analytic: closed form available for J = 1/2 and J = 1 only");
    }
    const LindbladSpec spec = detail::with_couplings(base, g);
    double e = 0.0, gg = 0.0;
    for (const auto& res : spec.reservoirs) {
        e += res.g * res.g * res.unit.p_e();
        gg += res.g * res.g * res.unit.p_g();
    }

    double x, y;
    std::vector<double> dx(g.size()), dy(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double de = 2.0 * g[i] * spec.reservoirs[i].unit.p_e();
        const double dg = 2.0 * g[i] * spec.reservoirs[i].unit.p_g();
        if (base.spin.two_j == 1) {
            dx[i] = de - dg;
            dy[i] = de + dg;
        } else {
            dx[i] = 2.0 * e * de - 2.0 * gg * dg;
            dy[i] = 2.0 * e * de + de * gg + e * dg + 2.0 * gg * dg;
        }
    }
    if (base.spin.two_j == 1) {
        x = e - gg;
        y = e + gg;
    } else {
        x = e * e - gg * gg;
        y = e * e + e * gg + gg * gg;
    }
    if (!(y > 0.0)) throw std::invalid_argument("grad_cost_analytic: denominator vanishes (all couplings zero)");

    const double m_act = x / y;
    std::vector<double> grad(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double da = (dx[i] * y - dy[i] * x) / (y * y);
        grad[i] = (m_des - m_act) * (-da);
    }
    return grad;
}

// Central differences of the cost over the null-space steady state. Pass
// h <= 0 for the default per-component step 1e-5 * max(g_i, 1e-6).
inline std::vector<double> grad_cost_numeric(const std::vector<double>& g, const LindbladSpec& base,
                                             double m_des, double h = 0.0) {
    const auto cost_at = [&](const std::vector<double>& gv) {
        const LindbladSpec spec = detail::with_couplings(base, gv);
        return cost(m_des, normalized_magnetization(steady_state(spec)));
    };
    std::vector<double> grad(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double hi = h > 0.0 ? h : 1e-5 * std::max(g[i], 1e-6);
        std::vector<double> up = g, down = g;
        up[i] += hi;
        down[i] = std::max(0.0, down[i] - hi);
        const double span = up[i] - down[i];
        grad[i] = (cost_at(up) - cost_at(down)) / span;
    }
    return grad;
}

enum class GradMode { analytic, numeric };

struct TrainingConfig {
    SpinQuantum spin{0.5};
    std::vector<LindbladReservoir> reservoirs;   // couplings here are the initial g^(0)
    double m_des{0.0};                           // normalized magnetization units
    double eta{1e-5};
    int max_iters{10000};
    double eps{1e-12};
    GradMode grad_mode{GradMode::analytic};
    double r{1.0};
    double tau{3.0};

    LindbladSpec lindblad_spec() const {
        LindbladSpec spec;
        spec.spin = spin;
        spec.reservoirs = reservoirs;
        spec.r = r;
        spec.tau = tau;
        return spec;
    }

    void validate() const {
        if (!(eta >= 0.0)) throw std::invalid_argument("TrainingConfig: eta must be >= 0");
        if (max_iters < 1) throw std::invalid_argument("TrainingConfig: max_iters must be >= 1");
        if (!(m_des >= -1.0 && m_des <= 1.0)) throw std::invalid_argument("TrainingConfig: m_des must lie in [-1, 1]");
        lindblad_spec().validate();
        if (grad_mode == GradMode::analytic && spin.two_j > 2) {
            throw std::invalid_argument("TrainingConfig: analytic gradient requires J = 1/2 or J = 1");
        }
        double lo = 1.0, hi = -1.0;
        for (const auto& res : reservoirs) {
            const double m = detail::single_reservoir_steady(spin, res.unit.p_e());
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
        if (m_des < lo - 1e-12 || m_des > hi + 1e-12) {
            std::cerr << "warning: m_des = " << m_des << " lies outside the reachable range [" << lo << ", "
                      << hi << "] spanned by single-reservoir steady values\n";
        }
    }
};

struct TrainState {
    int iter{0};
    std::vector<double> g;
    double cost{0.0};
    std::vector<double> grad;
    double m_act{0.0};
    bool clamped{false};
};

// Simultaneous updates g <- max(0, g - eta * grad) until the cost drops below
// eps or the iteration budget runs out. Ten consecutive cost increases abort
// with a diagnostic.
inline std::vector<TrainState> train(const TrainingConfig& config) {
    config.validate();
    const LindbladSpec base = config.lindblad_spec();
    const bool closed_form = config.grad_mode == GradMode::analytic;

    const auto m_act_at = [&](const std::vector<double>& g) {
        const LindbladSpec spec = detail::with_couplings(base, g);
        return closed_form ? steady_magnetization_closed_form(spec)
                           : normalized_magnetization(steady_state(spec));
    };
    const auto grad_at = [&](const std::vector<double>& g) {
        return closed_form ? grad_cost_analytic(g, base, config.m_des)
                           : grad_cost_numeric(g, base, config.m_des);
    };

    std::vector<double> g;
    g.reserve(config.reservoirs.size());
    for (const auto& res : config.reservoirs) g.push_back(res.g);

    std::vector<TrainState> history;
    history.reserve(static_cast<std::size_t>(config.max_iters) + 1);
    int rising = 0;
    double prev_cost = 0.0;
    bool clamped_last = false;
    for (int k = 0; k <= config.max_iters; ++k) {
        TrainState state;
        state.iter = k;
        state.g = g;
        state.m_act = m_act_at(g);
        state.cost = cost(config.m_des, state.m_act);
        state.grad = grad_at(g);
        state.clamped = clamped_last;
        history.push_back(state);

        if (state.cost < config.eps || k == config.max_iters) break;
        if (k > 0 && state.cost > prev_cost) {
            if (++rising >= 10) {
                std::ostringstream msg;
                msg << "train: cost increased for 10 consecutive iterations (C = " << state.cost
                    << " at iter " << k << "); reduce eta";
                throw divergence_error(msg.str());
            }
        } else {
            rising = 0;
        }
        prev_cost = state.cost;

        clamped_last = false;
        for (std::size_t i = 0; i < g.size(); ++i) {
            double next = g[i] - config.eta * state.grad[i];
            if (next < 0.0) {
                next = 0.0;
                clamped_last = true;
                std::cerr << "train: coupling g" << i + 1 << " clamped to 0 at iter " << k + 1 << "\n";
            }
            g[i] = next;
        }
    }
    return history;
}

} // namespace qsn
