// qsn_cli.cpp — experiment runner: reproduces the figure families as
// plot-ready CSV data with run manifests, plus manifest verification
//
// Exit codes: 0 success, 2 invalid arguments, 3 non-convergence,
// 4 numerical failure.

#include "qsn/experiments.hpp"
#include "qsn/manifest.hpp"
#include "qsn/version.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace qsn;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invalid_args = 2;
constexpr int exit_non_convergence = 3;
constexpr int exit_numerical_failure = 4;

struct RunWriter {
    fs::path dir;
    manifest::RunManifest run;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    void write_table(const std::string& name, const csv::Table& table) {
        fs::create_directories(dir);
        const fs::path path = dir / name;
        csv::write_table(path, table);
        run.outputs.push_back({name, manifest::digest_file(path), fs::file_size(path)});
    }

    void finish(const std::string& base_name) {
        run.duration_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        fs::create_directories(dir);
        manifest::write_manifest(dir / (base_name + ".manifest"), run);
    }
};

PropagatorMode parse_propagator(const std::string& s) {
    if (s == "exact") return PropagatorMode::exact;
    if (s == "second-order") return PropagatorMode::second_order;
    throw CLI::ValidationError("--propagator must be 'exact' or 'second-order'");
}

UnitPhase parse_unit_phase(const std::string& s) {
    if (s == "averaged") return UnitPhase::averaged;
    if (s == "fixed") return UnitPhase::fixed;
    throw CLI::ValidationError("--unit-phase must be 'averaged' or 'fixed'");
}

experiments::SteadySolver parse_solver(const std::string& s) {
    if (s == "collision") return experiments::SteadySolver::collision;
    if (s == "nullspace") return experiments::SteadySolver::nullspace;
    throw CLI::ValidationError("--solver must be 'collision' or 'nullspace'");
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += csv::format_double(v[i]);
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::string token;
    std::istringstream in(s);
    while (std::getline(in, token, ',')) out.push_back(std::stod(manifest::trim(token)));
    return out;
}

// ------------------------------- dynamics -----------------------------------

struct DynamicsCli {
    experiments::DynamicsArgs args;
    std::string out_dir = ".";
    std::string preset;
    std::string propagator = "exact";
    std::string unit_phase = "averaged";

    int run() {
        if (!preset.empty()) {
            auto base = experiments::Presets::dynamics(preset);
            base.propagator = parse_propagator(propagator);
            base.unit_phase = parse_unit_phase(unit_phase);
            base.jobs = args.jobs;
            args = base;
        } else {
            args.propagator = parse_propagator(propagator);
            args.unit_phase = parse_unit_phase(unit_phase);
        }
        RunWriter writer{fs::path(out_dir)};
        writer.run.subcommand = "dynamics";
        writer.run.params = {{"j", csv::format_double(args.j)},
                             {"theta_deg", join_doubles(args.theta_deg)},
                             {"phi_deg", csv::format_double(args.phi_deg)},
                             {"tau", csv::format_double(args.tau)},
                             {"g", csv::format_double(args.g)},
                             {"collisions", std::to_string(args.collisions)},
                             {"propagator", propagator},
                             {"unit_phase", unit_phase}};
        const std::string base = preset.empty() ? "dynamics" : preset;
        writer.write_table(base + ".csv", experiments::run_dynamics_experiment(args));
        writer.finish(base);
        return exit_ok;
    }
};

// ------------------------------ activation ----------------------------------

struct ActivationCli {
    experiments::ActivationArgs args;
    std::string out_dir = ".";
    std::string preset;
    std::string propagator = "exact";
    std::string unit_phase = "averaged";
    std::string solver = "collision";

    int run() {
        if (!preset.empty()) {
            auto base = experiments::Presets::activation(preset);
            base.jobs = args.jobs;
            args = base;
        }
        args.propagator = parse_propagator(propagator);
        args.unit_phase = parse_unit_phase(unit_phase);
        args.solver = parse_solver(solver);

        RunWriter writer{fs::path(out_dir)};
        writer.run.subcommand = "activation";
        writer.run.params = {{"j", csv::format_double(args.j)},
                             {"points", std::to_string(args.points)},
                             {"phi_deg", csv::format_double(args.phi_deg)},
                             {"tau", csv::format_double(args.tau)},
                             {"g", csv::format_double(args.g)},
                             {"solver", solver},
                             {"propagator", propagator},
                             {"unit_phase", unit_phase},
                             {"steady_tol", csv::format_double(args.steady_tol)},
                             {"steady_window", std::to_string(args.steady_window)},
                             {"max_collisions", std::to_string(args.max_collisions)}};
        const auto result = experiments::run_activation_experiment(args);
        for (const auto& p : result.points) {
            if (!p.converged) {
                std::cerr << "warning: theta = " << p.theta_deg << " deg did not reach steadiness within "
                          << args.max_collisions << " collisions\n";
            }
        }
        const std::string base = preset.empty() ? "activation" : preset;
        writer.write_table(base + ".csv", result.table);
        writer.finish(base);
        return result.non_converged > 0 ? exit_non_convergence : exit_ok;
    }
};

// ------------------------------- couplings ----------------------------------

struct CouplingsCli {
    experiments::CouplingsArgs args;
    std::string out_dir = ".";
    std::string preset;
    std::string propagator = "exact";
    std::string unit_phase = "averaged";
    std::string solver = "collision";

    int run() {
        if (!preset.empty()) {
            auto base = experiments::Presets::couplings(preset);
            base.jobs = args.jobs;
            args = base;
        }
        args.propagator = parse_propagator(propagator);
        args.unit_phase = parse_unit_phase(unit_phase);
        args.solver = parse_solver(solver);

        RunWriter writer{fs::path(out_dir)};
        writer.run.subcommand = "couplings";
        writer.run.params = {{"j_list", join_doubles(args.j_list)},
                             {"points", std::to_string(args.points)},
                             {"g", csv::format_double(args.g)},
                             {"tau", csv::format_double(args.tau)},
                             {"theta1_deg", csv::format_double(args.theta1_deg)},
                             {"theta2_deg", csv::format_double(args.theta2_deg)},
                             {"solver", solver},
                             {"propagator", propagator},
                             {"unit_phase", unit_phase}};
        const auto result = experiments::run_couplings_experiment(args);
        if (result.non_converged > 0) {
            std::cerr << "warning: " << result.non_converged << " sweep points did not converge\n";
        }
        const std::string base = preset.empty() ? "couplings" : preset;
        writer.write_table(base + ".csv", result.table);
        writer.finish(base);
        return result.non_converged > 0 ? exit_non_convergence : exit_ok;
    }
};

// -------------------------------- training ----------------------------------

struct TrainCli {
    experiments::TrainArgs args;
    std::string out_dir = ".";
    std::string preset;
    std::string config_file;

    // option handles so explicit flags override preset/config values
    CLI::Option* opt_j{};
    CLI::Option* opt_theta1{};
    CLI::Option* opt_theta2{};
    CLI::Option* opt_sz1{};
    CLI::Option* opt_sz2{};
    CLI::Option* opt_g1{};
    CLI::Option* opt_g2{};
    CLI::Option* opt_mdes{};
    CLI::Option* opt_units{};
    CLI::Option* opt_eta{};
    CLI::Option* opt_iters{};
    CLI::Option* opt_eps{};
    CLI::Option* opt_grad{};
    CLI::Option* opt_tau{};
    CLI::Option* opt_surface{};

    std::vector<double> flag_j{0.5};
    double flag_theta1{}, flag_theta2{}, flag_sz1{}, flag_sz2{}, flag_g1{}, flag_g2{};
    double flag_mdes{}, flag_eta{}, flag_eps{}, flag_tau{};
    int flag_iters{};
    std::string flag_units, flag_grad;
    bool flag_surface{false};

    void apply_config_file() {
        const auto doc = manifest::load_document(config_file);
        const auto get = [&](const char* key) -> std::optional<std::string> {
            const auto it = doc.find(key);
            return it == doc.end() ? std::nullopt : std::optional<std::string>(it->second);
        };
        if (auto v = get("j")) args.j_list = parse_double_list(*v);
        if (auto v = get("theta1")) args.theta1_deg = std::stod(*v);
        if (auto v = get("theta2")) args.theta2_deg = std::stod(*v);
        if (auto v = get("sigma_z1")) args.sigma_z1 = std::stod(*v);
        if (auto v = get("sigma_z2")) args.sigma_z2 = std::stod(*v);
        if (auto v = get("g1")) args.g1 = std::stod(*v);
        if (auto v = get("g2")) args.g2 = std::stod(*v);
        if (auto v = get("m_des")) args.m_des = std::stod(*v);
        if (auto v = get("m_des_units")) args.m_des_units = *v;
        if (auto v = get("eta")) args.eta = std::stod(*v);
        if (auto v = get("max_iters")) args.max_iters = std::stoi(*v);
        if (auto v = get("eps")) args.eps = std::stod(*v);
        if (auto v = get("grad_mode")) args.grad_mode = *v;
        if (auto v = get("tau")) args.tau = std::stod(*v);
        if (auto v = get("surface")) args.surface = (*v == "true" || *v == "1");
    }

    void apply_flags() {
        if (opt_j->count()) args.j_list = flag_j;
        if (opt_theta1->count()) args.theta1_deg = flag_theta1;
        if (opt_theta2->count()) args.theta2_deg = flag_theta2;
        if (opt_sz1->count()) args.sigma_z1 = flag_sz1;
        if (opt_sz2->count()) args.sigma_z2 = flag_sz2;
        if (opt_g1->count()) args.g1 = flag_g1;
        if (opt_g2->count()) args.g2 = flag_g2;
        if (opt_mdes->count()) args.m_des = flag_mdes;
        if (opt_units->count()) args.m_des_units = flag_units;
        if (opt_eta->count()) args.eta = flag_eta;
        if (opt_iters->count()) args.max_iters = flag_iters;
        if (opt_eps->count()) args.eps = flag_eps;
        if (opt_grad->count()) args.grad_mode = flag_grad;
        if (opt_tau->count()) args.tau = flag_tau;
        if (opt_surface->count()) args.surface = flag_surface;
    }

    int run() {
        if (!preset.empty()) args = experiments::Presets::train(preset);
        if (!config_file.empty()) apply_config_file();
        apply_flags();

        RunWriter writer{fs::path(out_dir)};
        writer.run.subcommand = "train";
        writer.run.params = {{"j_list", join_doubles(args.j_list)},
                             {"g1", csv::format_double(args.g1)},
                             {"g2", csv::format_double(args.g2)},
                             {"m_des", csv::format_double(args.m_des)},
                             {"m_des_units", args.m_des_units},
                             {"eta", args.eta ? csv::format_double(*args.eta) : "default"},
                             {"max_iters", std::to_string(args.max_iters)},
                             {"eps", csv::format_double(args.eps)},
                             {"grad_mode", args.grad_mode},
                             {"tau", csv::format_double(args.tau)},
                             {"surface", args.surface ? "true" : "false"}};
        if (args.sigma_z1) writer.run.params["sigma_z1"] = csv::format_double(*args.sigma_z1);
        if (args.sigma_z2) writer.run.params["sigma_z2"] = csv::format_double(*args.sigma_z2);
        if (args.theta1_deg) writer.run.params["theta1_deg"] = csv::format_double(*args.theta1_deg);
        if (args.theta2_deg) writer.run.params["theta2_deg"] = csv::format_double(*args.theta2_deg);

        const auto result = experiments::run_training_experiment(args);
        const std::string base = preset.empty() ? "train" : preset;
        writer.write_table(base + ".csv", result.history);
        if (result.surface) writer.write_table(base + "_surface.csv", *result.surface);
        writer.finish(base);
        return exit_ok;
    }
};

// --------------------------------- verify -----------------------------------

int run_verify(const std::string& manifest_path) {
    const auto entries = manifest::verify_manifest(manifest_path);
    bool all_ok = true;
    for (const auto& e : entries) {
        std::cout << (e.ok ? "OK      " : "MISMATCH") << "  " << e.path;
        if (!e.ok) std::cout << "  expected " << e.expected << " got " << e.actual;
        std::cout << "\n";
        all_ok = all_ok && e.ok;
    }
    return all_ok ? exit_ok : exit_numerical_failure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qsn: collision-model spin neuron simulator"};
    app.set_version_flag("--version", std::string("qsn ") + qsn::version);
    app.require_subcommand(1);

    DynamicsCli dynamics;
    auto* dyn = app.add_subcommand("dynamics", "magnetization trajectory against collision number");
    dyn->add_option("--j", dynamics.args.j, "spin quantum number (multiple of 1/2)");
    dyn->add_option("--theta", dynamics.args.theta_deg, "reservoir polar angles, degrees")->delimiter(',');
    dyn->add_option("--phi", dynamics.args.phi_deg, "reservoir azimuth, degrees");
    dyn->add_option("--tau", dynamics.args.tau, "interaction time");
    dyn->add_option("--g", dynamics.args.g, "coupling rate");
    dyn->add_option("--collisions", dynamics.args.collisions, "number of collisions");
    dyn->add_option("--propagator", dynamics.propagator, "exact|second-order");
    dyn->add_option("--unit-phase", dynamics.unit_phase, "averaged|fixed");
    dyn->add_option("--preset", dynamics.preset, "fig1a|fig1b");
    dyn->add_option("--jobs", dynamics.args.jobs, "worker threads (0 = auto)");
    dyn->add_option("--out", dynamics.out_dir, "output directory");

    ActivationCli activation;
    auto* act = app.add_subcommand("activation", "steady magnetization against the reservoir angle");
    act->add_option("--j", activation.args.j, "spin quantum number");
    act->add_option("--points", activation.args.points, "theta grid size over [0, 180] deg");
    act->add_option("--phi", activation.args.phi_deg, "reservoir azimuth, degrees");
    act->add_option("--tau", activation.args.tau, "interaction time");
    act->add_option("--g", activation.args.g, "coupling rate");
    act->add_option("--solver", activation.solver, "collision|nullspace");
    act->add_option("--propagator", activation.propagator, "exact|second-order");
    act->add_option("--unit-phase", activation.unit_phase, "averaged|fixed");
    act->add_option("--steady-tol", activation.args.steady_tol, "steadiness window tolerance");
    act->add_option("--steady-window", activation.args.steady_window, "steadiness window length");
    act->add_option("--max-collisions", activation.args.max_collisions, "collision cap per grid point");
    act->add_option("--preset", activation.preset, "fig2a|fig2b|fig2c");
    act->add_option("--jobs", activation.args.jobs, "worker threads (0 = auto)");
    act->add_option("--out", activation.out_dir, "output directory");

    CouplingsCli couplings;
    auto* cpl = app.add_subcommand("couplings", "steady magnetization against the coupling asymmetry");
    cpl->add_option("--j", couplings.args.j_list, "spin quantum numbers")->delimiter(',');
    cpl->add_option("--points", couplings.args.points, "delta-g grid size over [-0.5, 0.5]");
    cpl->add_option("--g", couplings.args.g, "total coupling budget");
    cpl->add_option("--tau", couplings.args.tau, "interaction time");
    cpl->add_option("--theta1", couplings.args.theta1_deg, "first reservoir angle, degrees");
    cpl->add_option("--theta2", couplings.args.theta2_deg, "second reservoir angle, degrees");
    cpl->add_option("--solver", couplings.solver, "collision|nullspace");
    cpl->add_option("--propagator", couplings.propagator, "exact|second-order");
    cpl->add_option("--unit-phase", couplings.unit_phase, "averaged|fixed");
    cpl->add_option("--preset", couplings.preset, "fig3");
    cpl->add_option("--jobs", couplings.args.jobs, "worker threads (0 = auto)");
    cpl->add_option("--out", couplings.out_dir, "output directory");

    TrainCli training;
    auto* trn = app.add_subcommand("train", "gradient descent over the coupling rates");
    training.opt_j = trn->add_option("--j", training.flag_j, "spin quantum numbers")->delimiter(',');
    training.opt_theta1 = trn->add_option("--theta1", training.flag_theta1, "reservoir 1 angle, degrees");
    training.opt_theta2 = trn->add_option("--theta2", training.flag_theta2, "reservoir 2 angle, degrees");
    training.opt_sz1 = trn->add_option("--sigma-z1", training.flag_sz1, "reservoir 1 <sigma_z>");
    training.opt_sz2 = trn->add_option("--sigma-z2", training.flag_sz2, "reservoir 2 <sigma_z>");
    training.opt_g1 = trn->add_option("--g1", training.flag_g1, "initial coupling 1");
    training.opt_g2 = trn->add_option("--g2", training.flag_g2, "initial coupling 2");
    training.opt_mdes = trn->add_option("--mdes", training.flag_mdes, "desired magnetization");
    training.opt_units = trn->add_option("--mdes-units", training.flag_units, "normalized|sz");
    training.opt_eta = trn->add_option("--eta", training.flag_eta, "learning rate");
    training.opt_iters = trn->add_option("--max-iters", training.flag_iters, "iteration budget");
    training.opt_eps = trn->add_option("--eps", training.flag_eps, "stop threshold on the cost");
    training.opt_grad = trn->add_option("--grad", training.flag_grad, "auto|analytic|numeric");
    training.opt_tau = trn->add_option("--tau", training.flag_tau, "interaction time");
    training.opt_surface = trn->add_flag("--surface", training.flag_surface, "emit the cost surface grid");
    trn->add_option("--preset", training.preset, "fig4a|fig4b|fig5|fig6");
    trn->add_option("--config", training.config_file, "key = value configuration file");
    trn->add_option("--out", training.out_dir, "output directory");

    std::string manifest_path;
    auto* ver = app.add_subcommand("verify", "recompute digests for a run manifest");
    ver->add_option("manifest", manifest_path, "path to a .manifest file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);   // --help / --version
        app.exit(e);
        return exit_invalid_args;
    }

    try {
        if (dyn->parsed()) return dynamics.run();
        if (act->parsed()) return activation.run();
        if (cpl->parsed()) return couplings.run();
        if (trn->parsed()) return training.run();
        if (ver->parsed()) return run_verify(manifest_path);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_invalid_args;
    } catch (const divergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_non_convergence;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_invalid_args;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical_failure;
    }
    return exit_invalid_args;
}
