// experiments.hpp — figure-style experiment runners behind the CLI: dynamics
// trajectories, activation sweeps, coupling sweeps, and training runs, all
// emitting deterministic CSV tables
//
// Sweep points fan out to a small worker pool; results land in index-ordered
// slots so the output is independent of scheduling.

#pragma once

#include "qsn/collision.hpp"
#include "qsn/csv.hpp"
#include "qsn/learning.hpp"
#include "qsn/lindblad.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qsn::experiments {

inline double deg_to_rad(double deg) { return deg * M_PI / 180.0; }

inline std::string format_j(double j) {
    std::ostringstream out;
    out << j;
    return out.str();
}

inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
    unsigned n_threads = jobs > 0 ? static_cast<unsigned>(jobs) : std::thread::hardware_concurrency();
    n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(count ? count : 1)));
    if (n_threads == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// ------------------------------- dynamics -----------------------------------

struct DynamicsArgs {
    double j{0.5};
    std::vector<double> theta_deg{0.0, 60.0, 80.0, 90.0, 100.0, 120.0, 180.0};
    double phi_deg{0.0};
    double tau{3.0};
    double g{0.02};
    int collisions{3000};
    PropagatorMode propagator{PropagatorMode::exact};
    UnitPhase unit_phase{UnitPhase::averaged};
    int jobs{0};
};

inline csv::Table run_dynamics_experiment(const DynamicsArgs& args) {
    if (args.theta_deg.empty()) throw std::invalid_argument("dynamics: theta list must be non-empty");
    csv::Table table;
    table.header = {"theta_deg", "n", "elapsed_time", "Sz_norm"};

    std::vector<Trajectory> results(args.theta_deg.size());
    parallel_for(args.theta_deg.size(), args.jobs, [&](std::size_t i) {
        CollisionConfig config;
        config.spin = SpinQuantum(args.j);
        config.reservoirs = {{deg_to_rad(args.theta_deg[i]), deg_to_rad(args.phi_deg), args.g}};
        config.tau = args.tau;
        config.n_collisions = args.collisions;
        config.propagator_mode = args.propagator;
        config.unit_phase = args.unit_phase;
        config.snapshot_stride = 0;
        results[i] = run_dynamics(spin_coherent_state(config.spin, M_PI / 2.0, 0.0), config);
    });

    for (std::size_t i = 0; i < results.size(); ++i) {
        for (const auto& p : results[i].points) {
            table.add_row({csv::format_double(args.theta_deg[i]), std::to_string(p.n),
                           csv::format_double(p.elapsed_time), csv::format_double(p.sz_norm)});
        }
    }
    return table;
}

// ------------------------------ activation ----------------------------------

enum class SteadySolver { collision, nullspace };

struct ActivationArgs {
    double j{0.5};
    int points{61};
    double phi_deg{0.0};
    double tau{3.0};
    double g{0.02};
    SteadySolver solver{SteadySolver::collision};
    PropagatorMode propagator{PropagatorMode::exact};
    UnitPhase unit_phase{UnitPhase::averaged};
    double steady_tol{1e-6};
    int steady_window{200};
    int max_collisions{20000};
    int jobs{0};
};

struct ActivationPoint {
    double theta_deg{0.0};
    double x{0.0};
    double sz_norm{0.0};
    bool converged{true};
};

struct ActivationResult {
    csv::Table table;
    std::vector<ActivationPoint> points;
    int non_converged{0};
};

// theta in [pi, 0] maps linearly onto x in [-2 pi, 2 pi].
inline double activation_x(double theta_rad) { return 4.0 * (M_PI / 2.0 - theta_rad); }

inline ActivationResult run_activation_experiment(const ActivationArgs& args) {
    if (args.points < 2) throw std::invalid_argument("activation: need at least 2 grid points");
    ActivationResult result;
    result.points.resize(static_cast<std::size_t>(args.points));

    parallel_for(result.points.size(), args.jobs, [&](std::size_t i) {
        const double theta_deg = 180.0 * static_cast<double>(i) / (args.points - 1);
        const double theta = deg_to_rad(theta_deg);
        ActivationPoint point;
        point.theta_deg = theta_deg;
        point.x = activation_x(theta);
        const ReservoirSpec reservoir{theta, deg_to_rad(args.phi_deg), args.g};
        if (args.solver == SteadySolver::collision) {
            CollisionConfig config;
            config.spin = SpinQuantum(args.j);
            config.reservoirs = {reservoir};
            config.tau = args.tau;
            config.propagator_mode = args.propagator;
            config.unit_phase = args.unit_phase;
            const auto steady = run_until_steady(spin_coherent_state(config.spin, M_PI / 2.0, 0.0), config,
                                                 args.steady_tol, args.steady_window, args.max_collisions);
            point.sz_norm = steady.value;
            point.converged = steady.converged;
        } else {
            const auto spec = lindblad_spec_from_angles(SpinQuantum(args.j), {reservoir}, args.unit_phase,
                                                        1.0, args.tau);
            point.sz_norm = normalized_magnetization(steady_state(spec));
        }
        result.points[i] = point;
    });

    result.table.header = {"theta_deg", "x_mapped", "Sz_norm_steady", "tanh_reference"};
    for (const auto& p : result.points) {
        if (!p.converged) ++result.non_converged;
        result.table.add_row({csv::format_double(p.theta_deg), csv::format_double(p.x),
                              csv::format_double(p.sz_norm), csv::format_double(std::tanh(p.x))});
    }
    return result;
}

// ------------------------------- couplings ----------------------------------

struct CouplingsArgs {
    std::vector<double> j_list{0.5, 2.5};
    int points{21};
    double g{0.02};
    double tau{3.0};
    double theta1_deg{0.0};
    double theta2_deg{180.0};
    SteadySolver solver{SteadySolver::collision};
    PropagatorMode propagator{PropagatorMode::exact};
    UnitPhase unit_phase{UnitPhase::averaged};
    double steady_tol{1e-7};
    int steady_window{200};
    int max_collisions{40000};
    int jobs{0};
};

struct CouplingsResult {
    csv::Table table;
    std::vector<std::vector<double>> values;   // [j index][grid index]
    int non_converged{0};
};

inline CouplingsResult run_couplings_experiment(const CouplingsArgs& args) {
    if (args.points < 2) throw std::invalid_argument("couplings: need at least 2 grid points");
    if (args.j_list.empty()) throw std::invalid_argument("couplings: J list must be non-empty");

    CouplingsResult result;
    result.values.assign(args.j_list.size(), std::vector<double>(static_cast<std::size_t>(args.points), 0.0));
    std::vector<int> failures(args.j_list.size() * static_cast<std::size_t>(args.points), 0);

    const std::size_t total = args.j_list.size() * static_cast<std::size_t>(args.points);
    parallel_for(total, args.jobs, [&](std::size_t flat) {
        const std::size_t ji = flat / static_cast<std::size_t>(args.points);
        const std::size_t pi = flat % static_cast<std::size_t>(args.points);
        const double frac = -0.5 + static_cast<double>(pi) / (args.points - 1);
        const double g1 = args.g / 2.0 + frac * args.g;
        const double g2 = args.g / 2.0 - frac * args.g;
        const std::vector<ReservoirSpec> reservoirs = {
            {deg_to_rad(args.theta1_deg), 0.0, g1},
            {deg_to_rad(args.theta2_deg), 0.0, g2},
        };
        const SpinQuantum spin(args.j_list[ji]);
        if (args.solver == SteadySolver::collision) {
            CollisionConfig config;
            config.spin = spin;
            config.reservoirs = reservoirs;
            config.tau = args.tau;
            config.propagator_mode = args.propagator;
            config.unit_phase = args.unit_phase;
            const auto steady = run_until_steady(spin_coherent_state(spin, M_PI / 2.0, 0.0), config,
                                                 args.steady_tol, args.steady_window, args.max_collisions);
            result.values[ji][pi] = steady.value;
            failures[flat] = steady.converged ? 0 : 1;
        } else {
            const auto spec = lindblad_spec_from_angles(spin, reservoirs, args.unit_phase, 1.0, args.tau);
            result.values[ji][pi] = normalized_magnetization(steady_state(spec));
        }
    });

    for (int f : failures) result.non_converged += f;
    result.table.header = {"delta_g_fraction"};
    for (double j : args.j_list) result.table.header.push_back("Sz_norm_steady_J" + format_j(j));
    for (int pi = 0; pi < args.points; ++pi) {
        const double frac = -0.5 + static_cast<double>(pi) / (args.points - 1);
        std::vector<std::string> row{csv::format_double(frac)};
        for (std::size_t ji = 0; ji < args.j_list.size(); ++ji) {
            row.push_back(csv::format_double(result.values[ji][static_cast<std::size_t>(pi)]));
        }
        result.table.add_row(std::move(row));
    }
    return result;
}

// -------------------------------- training ----------------------------------

struct TrainArgs {
    std::vector<double> j_list{0.5};
    std::optional<double> theta1_deg, theta2_deg;   // pure-unit angles, phi = 0, phase-averaged
    std::optional<double> sigma_z1, sigma_z2;       // diagonal units
    double g1{0.001};
    double g2{0.04};
    double m_des{0.42};
    std::string m_des_units{"normalized"};          // "normalized" | "sz"
    std::optional<double> eta;                      // default: 1.2e-2 * initial g1
    int max_iters{10000};
    double eps{1e-12};
    std::string grad_mode{"auto"};                  // auto | analytic | numeric
    double tau{3.0};
    bool surface{false};
    double surface_g1_max{0.05};
    double surface_g2_max{0.05};
    int surface_points{51};
};

struct TrainRun {
    double j{0.5};
    std::vector<TrainState> history;
};

struct TrainResult {
    csv::Table history;
    std::optional<csv::Table> surface;
    std::vector<TrainRun> runs;
};

inline TrainingConfig make_training_config(const TrainArgs& args, double j) {
    TrainingConfig config;
    config.spin = SpinQuantum(j);
    const auto unit = [&](std::optional<double> theta_deg, std::optional<double> sigma_z,
                          const char* which) -> QubitState {
        if (sigma_z.has_value()) return qubit_from_sigma_z(*sigma_z);
        if (theta_deg.has_value()) return reservoir_unit_state(deg_to_rad(*theta_deg), 0.0).dephased();
        throw std::invalid_argument(std::string("train: reservoir ") + which +
                                    " needs either theta or sigma_z");
    };
    config.reservoirs = {{args.g1, unit(args.theta1_deg, args.sigma_z1, "1")},
                         {args.g2, unit(args.theta2_deg, args.sigma_z2, "2")}};
    if (args.m_des_units == "sz") {
        config.m_des = args.m_des / config.spin.j();
    } else if (args.m_des_units == "normalized") {
        config.m_des = args.m_des;
    } else {
        throw std::invalid_argument("train: m_des units must be 'normalized' or 'sz'");
    }
    config.eta = args.eta.value_or(1.2e-2 * args.g1);
    config.max_iters = args.max_iters;
    config.eps = args.eps;
    config.tau = args.tau;
    if (args.grad_mode == "analytic") {
        config.grad_mode = GradMode::analytic;
    } else if (args.grad_mode == "numeric") {
        config.grad_mode = GradMode::numeric;
    } else if (args.grad_mode == "auto") {
        config.grad_mode = config.spin.two_j <= 2 ? GradMode::analytic : GradMode::numeric;
    } else {
        throw std::invalid_argument("train: grad mode must be 'auto', 'analytic', or 'numeric'");
    }
    return config;
}

inline TrainResult run_training_experiment(const TrainArgs& args) {
    if (args.j_list.empty()) throw std::invalid_argument("train: J list must be non-empty");
    TrainResult result;
    const bool multi = args.j_list.size() > 1;

    for (double j : args.j_list) {
        TrainRun run;
        run.j = j;
        run.history = train(make_training_config(args, j));
        result.runs.push_back(std::move(run));
    }

    if (multi) {
        result.history.header = {"J", "iter", "g1", "g2", "cost", "m_act"};
    } else {
        result.history.header = {"iter", "g1", "g2", "cost", "m_act"};
    }
    for (const auto& run : result.runs) {
        for (const auto& s : run.history) {
            std::vector<std::string> row;
            if (multi) row.push_back(format_j(run.j));
            row.push_back(std::to_string(s.iter));
            row.push_back(csv::format_double(s.g[0]));
            row.push_back(csv::format_double(s.g[1]));
            row.push_back(csv::format_double(s.cost));
            row.push_back(csv::format_double(s.m_act));
            result.history.add_row(std::move(row));
        }
    }

    if (args.surface) {
        if (multi) throw std::invalid_argument("train: surface output needs a single J");
        const TrainingConfig config = make_training_config(args, args.j_list.front());
        const LindbladSpec base = config.lindblad_spec();
        csv::Table surface;
        surface.header = {"g1", "g2", "cost"};
        for (int a = 0; a < args.surface_points; ++a) {
            for (int b = 0; b < args.surface_points; ++b) {
                const double g1 = args.surface_g1_max * a / (args.surface_points - 1);
                const double g2 = args.surface_g2_max * b / (args.surface_points - 1);
                double c;
                if (g1 == 0.0 && g2 == 0.0) {
                    c = std::numeric_limits<double>::quiet_NaN();
                } else {
                    LindbladSpec spec = base;
                    spec.reservoirs[0].g = g1;
                    spec.reservoirs[1].g = g2;
                    const double m = config.spin.two_j <= 2 ? steady_magnetization_closed_form(spec)
                                                            : normalized_magnetization(steady_state(spec));
                    c = cost(config.m_des, m);
                }
                surface.add_row({csv::format_double(g1), csv::format_double(g2), csv::format_double(c)});
            }
        }
        result.surface = std::move(surface);
    }
    return result;
}

// -------------------------------- presets -----------------------------------

struct Presets {
    static DynamicsArgs dynamics(const std::string& name) {
        DynamicsArgs args;
        if (name == "fig1a") {
            args.j = 0.5;
        } else if (name == "fig1b") {
            args.j = 2.5;
        } else {
            throw std::invalid_argument("unknown dynamics preset: " + name);
        }
        return args;
    }

    static ActivationArgs activation(const std::string& name) {
        ActivationArgs args;
        if (name == "fig2a") {
            args.j = 0.5;
        } else if (name == "fig2b") {
            args.j = 2.5;
        } else if (name == "fig2c") {
            args.j = 4.5;
        } else {
            throw std::invalid_argument("unknown activation preset: " + name);
        }
        return args;
    }

    static CouplingsArgs couplings(const std::string& name) {
        if (name != "fig3") throw std::invalid_argument("unknown couplings preset: " + name);
        return CouplingsArgs{};
    }

    static TrainArgs train(const std::string& name) {
        TrainArgs args;
        if (name == "fig4a") {
            args.j_list = {0.5};
            args.sigma_z1 = 0.94;
            args.sigma_z2 = -0.10;
            args.g1 = 0.002;
            args.g2 = 0.05;
            args.m_des = 0.42;
        } else if (name == "fig4b") {
            args.j_list = {0.5, 1.0};
            args.sigma_z1 = 0.95;
            args.sigma_z2 = -0.11;
            args.g1 = 0.001;
            args.g2 = 0.04;
            args.m_des = 0.42;
        } else if (name == "fig5") {
            args.j_list = {1.0};
            args.sigma_z1 = 0.96;
            args.sigma_z2 = -0.64;
            args.g1 = 0.001;
            args.g2 = 0.04;
            args.m_des = 0.12;
            args.eta = 2.4e-5;
            args.surface = true;
        } else if (name == "fig6") {
            args.j_list = {0.5, 1.0, 1.5, 2.5};
            args.sigma_z1 = 0.95;
            args.sigma_z2 = -0.11;
            args.g1 = 0.001;
            args.g2 = 0.04;
            args.m_des = 0.42;
        } else {
            throw std::invalid_argument("unknown train preset: " + name);
        }
        return args;
    }
};

} // namespace qsn::experiments
