// collision.hpp — repeated-interaction dynamics: joint probe/reservoir
// Hamiltonian, exact and truncated propagators, collision maps, trajectories,
// and steadiness detection
//
// Each collision couples the probe to one fresh unit from every reservoir at
// once through H = sum_i g_i (S+ sigma_i- + S- sigma_i+). The units are
// discarded (traced out) after the interaction.

#pragma once

#include "qsn/qubit.hpp"
#include "qsn/spin.hpp"

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qsn {

struct ReservoirSpec {
    double theta{0.0};   // radians
    double phi{0.0};     // radians
    double g{0.0};       // coupling, dimensionless

    QubitState unit_state() const { return reservoir_unit_state(theta, phi); }
};

// Mixture weights P_i = g_i / sum_j g_j.
inline std::vector<double> reservoir_weights(const std::vector<ReservoirSpec>& reservoirs) {
    double total = 0.0;
    for (const auto& r : reservoirs) {
        if (r.g < 0.0) throw std::invalid_argument("reservoir_weights: couplings must be >= 0");
        total += r.g;
    }
    if (!(total > 0.0)) throw std::invalid_argument("reservoir_weights: at least one coupling must be > 0");
    std::vector<double> w;
    w.reserve(reservoirs.size());
    for (const auto& r : reservoirs) w.push_back(r.g / total);
    return w;
}

enum class PropagatorMode { exact, second_order };

// Unit preparation entering the dynamics. `averaged` collides with the
// phase-averaged (diagonal) unit, equivalent to a fresh uniformly random phase
// per collision; `fixed` keeps the coherent (theta, phi) unit as given.
enum class UnitPhase { averaged, fixed };

// `simultaneous` couples the probe to one unit per reservoir in a single
// joint collision; `mixture` applies per-reservoir collisions convexly
// weighted by P_i.
enum class MapModel { simultaneous, mixture };

struct CollisionConfig {
    SpinQuantum spin{0.5};
    std::vector<ReservoirSpec> reservoirs;
    double tau{3.0};
    double r{1.0};                 // collision success rate; master-equation coarse-graining only
    int n_collisions{1};
    PropagatorMode propagator_mode{PropagatorMode::exact};
    UnitPhase unit_phase{UnitPhase::averaged};
    MapModel map_model{MapModel::simultaneous};
    double omega0{1.0};            // free frequencies, resonant; the interaction-picture
    double omega_i{1.0};           // propagator never uses them
    int snapshot_stride{10};

    void validate() const {
        if (reservoirs.empty()) throw std::invalid_argument("CollisionConfig: no reservoirs");
        if (reservoirs.size() > 4) throw std::invalid_argument("CollisionConfig: joint dimension cap allows at most 4 reservoirs");
        if (!(tau > 0.0)) throw std::invalid_argument("CollisionConfig: tau must be > 0");
        if (n_collisions < 1) throw std::invalid_argument("CollisionConfig: n_collisions must be >= 1");
        double gsum = 0.0;
        for (const auto& r : reservoirs) {
            if (r.g < 0.0) throw std::invalid_argument("CollisionConfig: couplings must be >= 0");
            if (r.g * tau > 0.5) throw std::invalid_argument("CollisionConfig: g*tau exceeds weak-coupling bound 0.5");
            if (r.g * tau > 0.2) {
                std::cerr << "warning: g*tau = " << r.g * tau << " above 0.2; weak-coupling accuracy degrades\n";
            }
            gsum += r.g;
        }
        // All-zero couplings are the identity channel; only the mixture model
        // needs normalizable weights.
        if (map_model == MapModel::mixture && !(gsum > 0.0)) {
            throw std::invalid_argument("CollisionConfig: mixture weights need at least one coupling > 0");
        }
    }
};

// H = sum_i g_i (S+ (x) sigma_i- + S- (x) sigma_i+) on probe (x) unit_1 ... unit_N.
inline Matrix interaction_hamiltonian(SpinQuantum spin, const std::vector<ReservoirSpec>& reservoirs) {
    const std::size_t n = reservoirs.size();
    if (n == 0) throw std::invalid_argument("interaction_hamiltonian: no reservoirs");
    if (n > 4) throw std::invalid_argument("interaction_hamiltonian: joint dimension cap allows at most 4 reservoirs");

    const auto ops = make_spin_operators(spin);
    Matrix sig_minus(2, 2), sig_plus(2, 2);
    sig_minus.setZero();
    sig_plus.setZero();
    sig_minus(1, 0) = 1.0;   // |g><e|
    sig_plus(0, 1) = 1.0;    // |e><g|

    const Matrix id2 = Matrix::Identity(2, 2);
    const Eigen::Index joint_dim = spin.dim() * (Eigen::Index{1} << n);
    Matrix h = Matrix::Zero(joint_dim, joint_dim);
    for (std::size_t i = 0; i < n; ++i) {
        Matrix lower = Matrix::Identity(1, 1);
        Matrix raise = Matrix::Identity(1, 1);
        for (std::size_t k = 0; k < n; ++k) {
            lower = kron(lower, k == i ? sig_minus : id2);
            raise = kron(raise, k == i ? sig_plus : id2);
        }
        h += reservoirs[i].g * (kron(ops.splus, lower) + kron(ops.sminus, raise));
    }
    return h;
}

// Exact mode: exp(-i H tau) via Hermitian eigendecomposition.
// Second-order mode: 1 - i tau H - tau^2 H^2 / 2.
inline Matrix propagator(const Matrix& h, double tau, PropagatorMode mode) {
    if (!is_hermitian(h, 1e-12 * std::max(1.0, max_abs(h)))) {
        throw std::invalid_argument("propagator: Hamiltonian must be Hermitian");
    }
    if (mode == PropagatorMode::second_order) {
        const Eigen::Index n = h.rows();
        return Matrix::Identity(n, n) - imag_unit * tau * h - 0.5 * tau * tau * (h * h);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h));
    if (es.info() != Eigen::Success) throw std::runtime_error("propagator: eigensolve failed");
    const Eigen::VectorXd w = es.eigenvalues();
    Vector phases(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) phases(i) = std::exp(-imag_unit * (w(i) * tau));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

namespace detail {

struct JointChannel {
    Eigen::Index probe_dim{0};
    Eigen::Index env_dim{0};
    Matrix u;            // propagator on probe (x) env
    Matrix env_state;    // fresh unit states, tensored

    Matrix apply(const Matrix& rho) const {
        return ptrace_tail(u * kron(rho, env_state) * u.adjoint(), probe_dim, env_dim);
    }
};

inline Matrix unit_for_phase(const ReservoirSpec& spec, UnitPhase phase) {
    const QubitState q = spec.unit_state();
    return phase == UnitPhase::averaged ? q.dephased().rho : q.rho;
}

} // namespace detail

// One collision as a reusable channel; the propagator and the fresh-unit
// state are fixed by the config, so precompute them once per trajectory.
class CollisionEngine {
  public:
    explicit CollisionEngine(const CollisionConfig& config) : config_(config) {
        config.validate();
        if (config.map_model == MapModel::simultaneous) {
            auto& ch = channels_.emplace_back();
            ch.probe_dim = config.spin.dim();
            ch.env_dim = Eigen::Index{1} << config.reservoirs.size();
            Matrix env = Matrix::Identity(1, 1);
            for (const auto& r : config.reservoirs) env = kron(env, detail::unit_for_phase(r, config.unit_phase));
            ch.env_state = std::move(env);
            ch.u = propagator(interaction_hamiltonian(config.spin, config.reservoirs), config.tau,
                              config.propagator_mode);
            weights_ = {1.0};
        } else {
            weights_ = reservoir_weights(config.reservoirs);
            for (const auto& r : config.reservoirs) {
                auto& ch = channels_.emplace_back();
                ch.probe_dim = config.spin.dim();
                ch.env_dim = 2;
                ch.env_state = detail::unit_for_phase(r, config.unit_phase);
                ch.u = propagator(interaction_hamiltonian(config.spin, {r}), config.tau, config.propagator_mode);
            }
        }
    }

    const CollisionConfig& config() const { return config_; }

    Matrix step(const Matrix& rho) const {
        if (rho.rows() != config_.spin.dim() || rho.cols() != config_.spin.dim()) {
            throw std::invalid_argument("CollisionEngine::step: dimension mismatch");
        }
        if (channels_.size() == 1) return channels_[0].apply(rho);
        Matrix out = Matrix::Zero(rho.rows(), rho.cols());
        for (std::size_t i = 0; i < channels_.size(); ++i) out += weights_[i] * channels_[i].apply(rho);
        return out;
    }

    // Normalized magnetization robust against the truncated propagator's
    // O((g tau)^4) trace drift.
    double magnetization(const Matrix& rho) const {
        const auto ops = make_spin_operators(config_.spin);
        const double tr = rho.trace().real();
        return (rho * ops.sz).trace().real() / (config_.spin.j() * tr);
    }

  private:
    CollisionConfig config_;
    std::vector<detail::JointChannel> channels_;
    std::vector<double> weights_;
};

inline DensityMatrix collide_once(const DensityMatrix& state, const CollisionConfig& config) {
    if (state.spin != config.spin) throw std::invalid_argument("collide_once: spin mismatch");
    CollisionEngine engine(config);
    return DensityMatrix{state.spin, engine.step(state.rho)};
}

struct TrajectoryPoint {
    int n{0};
    double elapsed_time{0.0};
    double sz_norm{0.0};
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;                  // every collision, index 0 = initial state
    std::vector<std::pair<int, DensityMatrix>> snapshots; // full states at the snapshot stride

    std::vector<double> sz_values() const {
        std::vector<double> v;
        v.reserve(points.size());
        for (const auto& p : points) v.push_back(p.sz_norm);
        return v;
    }
};

inline Trajectory run_dynamics(const DensityMatrix& initial, const CollisionConfig& config) {
    if (initial.spin != config.spin) throw std::invalid_argument("run_dynamics: spin mismatch");
    CollisionEngine engine(config);

    Trajectory traj;
    traj.points.reserve(static_cast<std::size_t>(config.n_collisions) + 1);
    Matrix rho = initial.rho;
    traj.points.push_back({0, 0.0, engine.magnetization(rho)});
    traj.snapshots.emplace_back(0, DensityMatrix{config.spin, rho});
    for (int n = 1; n <= config.n_collisions; ++n) {
        rho = engine.step(rho);
        traj.points.push_back({n, n * config.tau, engine.magnetization(rho)});
        if (config.snapshot_stride > 0 && n % config.snapshot_stride == 0) {
            traj.snapshots.emplace_back(n, DensityMatrix{config.spin, rho});
        }
    }
    return traj;
}

struct SteadyResult {
    double value{0.0};   // mean over the first flat window
    int index{0};        // first sample index of that window
};

// First window of `window` consecutive samples whose max-min spread is at
// most abs_tol; returns its start index and mean.
inline std::optional<SteadyResult> detect_steady(const std::vector<double>& sz, double abs_tol, int window) {
    if (window < 2) throw std::invalid_argument("detect_steady: window must be >= 2");
    if (static_cast<int>(sz.size()) < window) return std::nullopt;
    for (std::size_t start = 0; start + static_cast<std::size_t>(window) <= sz.size(); ++start) {
        double lo = sz[start], hi = sz[start];
        double sum = 0.0;
        for (int k = 0; k < window; ++k) {
            const double v = sz[start + static_cast<std::size_t>(k)];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        if (hi - lo <= abs_tol) return SteadyResult{sum / window, static_cast<int>(start)};
    }
    return std::nullopt;
}

inline std::optional<SteadyResult> detect_steady(const Trajectory& traj, double abs_tol, int window) {
    return detect_steady(traj.sz_values(), abs_tol, window);
}

// Run collisions until the trailing window is flat or the cap is reached.
struct SteadySearch {
    double value{0.0};
    int index{0};
    bool converged{false};
    Matrix final_state;
};

inline SteadySearch run_until_steady(const DensityMatrix& initial, CollisionConfig config,
                                     double abs_tol, int window, int max_collisions) {
    if (window < 2) throw std::invalid_argument("run_until_steady: window must be >= 2");
    config.n_collisions = 1;   // validated configuration; stepping is manual here
    CollisionEngine engine(config);

    std::vector<double> sz;
    sz.reserve(1024);
    Matrix rho = initial.rho;
    sz.push_back(engine.magnetization(rho));
    SteadySearch out;
    for (int n = 1; n <= max_collisions; ++n) {
        rho = engine.step(rho);
        sz.push_back(engine.magnetization(rho));
        if (static_cast<int>(sz.size()) >= window) {
            const std::size_t start = sz.size() - static_cast<std::size_t>(window);
            double lo = sz[start], hi = sz[start], sum = 0.0;
            for (int k = 0; k < window; ++k) {
                const double v = sz[start + static_cast<std::size_t>(k)];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                sum += v;
            }
            if (hi - lo <= abs_tol) {
                out.value = sum / window;
                out.index = static_cast<int>(start);
                out.converged = true;
                out.final_state = std::move(rho);
                return out;
            }
        }
    }
    out.value = sz.back();
    out.index = static_cast<int>(sz.size()) - 1;
    out.converged = false;
    out.final_state = std::move(rho);
    return out;
}

} // namespace qsn
