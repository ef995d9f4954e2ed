#include "qsn/collision.hpp"

#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace qsn;

namespace {

CollisionConfig single_reservoir_config(double j, double theta_rad, double g = 0.02, double tau = 3.0) {
    CollisionConfig config;
    config.spin = SpinQuantum(j);
    config.reservoirs = {{theta_rad, 0.0, g}};
    config.tau = tau;
    return config;
}

DensityMatrix equator_state(double j) { return spin_coherent_state(SpinQuantum(j), M_PI / 2.0, 0.0); }

} // namespace

TEST_CASE("interaction Hamiltonian for J=1 and one reservoir has the ladder block structure") {
    const double g = 0.07;
    const Matrix h = interaction_hamiltonian(SpinQuantum(1.0), {{0.3, 0.1, g}});
    REQUIRE(h.rows() == 6);

    Matrix sig_minus(2, 2), sig_plus(2, 2);
    sig_minus.setZero();
    sig_plus.setZero();
    sig_minus(1, 0) = 1.0;
    sig_plus(0, 1) = 1.0;
    const double elem = std::sqrt(2.0) * g;   // J=1 ladder matrix element times the coupling

    const auto block = [&](int r, int c) { return Matrix(h.block(2 * r, 2 * c, 2, 2)); };
    CHECK(max_abs(block(0, 1) - elem * sig_minus) < 1e-14);
    CHECK(max_abs(block(1, 2) - elem * sig_minus) < 1e-14);
    CHECK(max_abs(block(1, 0) - elem * sig_plus) < 1e-14);
    CHECK(max_abs(block(2, 1) - elem * sig_plus) < 1e-14);
    CHECK(max_abs(block(0, 0)) < 1e-14);
    CHECK(max_abs(block(1, 1)) < 1e-14);
    CHECK(max_abs(block(2, 2)) < 1e-14);
    CHECK(max_abs(block(0, 2)) < 1e-14);
    CHECK(max_abs(block(2, 0)) < 1e-14);
}

TEST_CASE("interaction Hamiltonian is Hermitian and respects the reservoir cap") {
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<ReservoirSpec> reservoirs;
        const int n = 1 + trial % 3;
        for (int i = 0; i < n; ++i) {
            reservoirs.push_back({test::uniform(0.0, M_PI), test::uniform(0.0, 6.28), test::uniform(0.0, 0.1)});
        }
        const Matrix h = interaction_hamiltonian(SpinQuantum(0.5 * (1 + trial % 4)), reservoirs);
        CHECK(max_abs(h - h.adjoint()) < 1e-14);
    }
    CHECK_THROWS_AS(interaction_hamiltonian(SpinQuantum(0.5), {}), std::invalid_argument);
    std::vector<ReservoirSpec> too_many(5, ReservoirSpec{0.0, 0.0, 0.01});
    CHECK_THROWS_AS(interaction_hamiltonian(SpinQuantum(0.5), too_many), std::invalid_argument);
}

TEST_CASE("two-reservoir Hamiltonian couples the single-excitation states with g1 and g2") {
    // Basis index = probe*4 + unit1*2 + unit2 with 0 = excited in each factor.
    const double g1 = 0.011, g2 = 0.023;
    const Matrix h = interaction_hamiltonian(SpinQuantum(0.5), {{0.0, 0.0, g1}, {0.0, 0.0, g2}});
    const int up_gg = 0 * 4 + 1 * 2 + 1;
    const int down_eg = 1 * 4 + 0 * 2 + 1;
    const int down_ge = 1 * 4 + 1 * 2 + 0;
    CHECK(h(down_eg, up_gg).real() == Catch::Approx(g1));
    CHECK(h(down_ge, up_gg).real() == Catch::Approx(g2));
    CHECK(std::abs(h(down_eg, down_ge)) < 1e-15);
    CHECK(std::abs(h(up_gg, up_gg)) < 1e-15);
}

TEST_CASE("propagator at tau = 0 is the identity") {
    const Matrix h = test::random_hermitian(4);
    CHECK(max_abs(propagator(h, 0.0, PropagatorMode::exact) - Matrix::Identity(4, 4)) < 1e-13);
    CHECK(max_abs(propagator(h, 0.0, PropagatorMode::second_order) - Matrix::Identity(4, 4)) < 1e-15);
}

TEST_CASE("exact propagator is unitary") {
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix h = test::random_hermitian(5);
        const Matrix u = propagator(h, 0.7, PropagatorMode::exact);
        CHECK(max_abs(u * u.adjoint() - Matrix::Identity(5, 5)) < 1e-12);
    }
}

TEST_CASE("second-order propagator deviates from unitarity by exactly tau^4 H^4 / 4") {
    const Matrix h = test::random_hermitian(4, 0.3);
    const double tau = 0.9;
    const Matrix u = propagator(h, tau, PropagatorMode::second_order);
    const Matrix expected = Matrix::Identity(4, 4) + std::pow(tau, 4) / 4.0 * (h * h * h * h);
    CHECK(max_abs(u.adjoint() * u - expected) < 1e-13);
}

TEST_CASE("truncated propagator error follows the cubic Taylor bound") {
    for (double g_tau : {0.01, 0.03, 0.06, 0.1}) {
        const Matrix h = interaction_hamiltonian(SpinQuantum(1.0), {{0.4, 0.0, g_tau}});
        const Matrix diff =
            propagator(h, 1.0, PropagatorMode::exact) - propagator(h, 1.0, PropagatorMode::second_order);
        Eigen::SelfAdjointEigenSolver<Matrix> es(h);
        const double hnorm = es.eigenvalues().cwiseAbs().maxCoeff();
        CHECK(max_abs(diff) <= std::pow(hnorm, 3) / 6.0 * 1.25 + 1e-15);
    }
}

TEST_CASE("propagator rejects non-Hermitian input") {
    Matrix bad(2, 2);
    bad << 0.0, 1.0, 0.0, 0.0;
    CHECK_THROWS_AS(propagator(bad, 1.0, PropagatorMode::exact), std::invalid_argument);
}

TEST_CASE("collision with an aligned reservoir leaves the dark state unchanged") {
    auto config = single_reservoir_config(0.5, 0.0);
    const auto up = spin_coherent_state(SpinQuantum(0.5), 0.0, 0.0);
    const auto out = collide_once(up, config);
    CHECK(max_abs(out.rho - up.rho) < 1e-14);
}

TEST_CASE("zero coupling gives the identity channel") {
    auto config = single_reservoir_config(1.0, 1.2, 0.0);
    const auto state = equator_state(1.0);
    const auto out = collide_once(state, config);
    CHECK(max_abs(out.rho - state.rho) < 1e-14);
}

TEST_CASE("single collision with an opposed reservoir matches the excitation-swap value") {
    // Probe |up>, unit |g>: two-level exchange gives <sigma_z> = cos(2 g tau).
    auto config = single_reservoir_config(0.5, M_PI);
    const auto up = spin_coherent_state(SpinQuantum(0.5), 0.0, 0.0);
    const auto out = collide_once(up, config);
    const double m = normalized_magnetization(out);
    CHECK(m == Catch::Approx(std::cos(2.0 * 0.02 * 3.0)).epsilon(1e-12));
    CHECK(m == Catch::Approx(0.992809).margin(1e-6));

    for (double g_tau : {0.01, 0.05, 0.1, 0.2}) {
        auto cfg = single_reservoir_config(0.5, M_PI, g_tau, 1.0);
        const double swap = 1.0 - 2.0 * std::pow(std::sin(g_tau), 2);
        CHECK(normalized_magnetization(collide_once(up, cfg)) == Catch::Approx(swap).epsilon(1e-12));
    }
}

TEST_CASE("exact collisions preserve trace, Hermiticity, and positivity over long runs") {
    auto config = single_reservoir_config(0.5, M_PI / 3.0);
    config.unit_phase = UnitPhase::fixed;
    config.n_collisions = 5000;
    config.snapshot_stride = 250;
    const auto traj = run_dynamics(equator_state(0.5), config);
    for (const auto& [n, state] : traj.snapshots) {
        CHECK(std::abs(state.rho.trace() - Complex{1.0, 0.0}) < 1e-10);
        CHECK(max_abs(state.rho - state.rho.adjoint()) < 1e-10);
        CHECK(min_eigenvalue_hermitian(state.rho) >= -1e-10);
    }

    // per-step bound
    const auto one = collide_once(equator_state(0.5), single_reservoir_config(0.5, M_PI / 3.0));
    CHECK(std::abs(one.rho.trace() - Complex{1.0, 0.0}) < 1e-13);
}

TEST_CASE("polar reservoir equilibrates to +1 near two thousand collisions") {
    auto config = single_reservoir_config(0.5, 0.0);
    config.n_collisions = 4000;
    const auto traj = run_dynamics(equator_state(0.5), config);
    const auto steady = detect_steady(traj, 1e-4, 100);
    REQUIRE(steady.has_value());
    CHECK(steady->index >= 1000);
    CHECK(steady->index <= 4000);
    CHECK(steady->value == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("equatorial reservoir keeps the magnetization at zero") {
    auto config = single_reservoir_config(0.5, M_PI / 2.0);
    config.n_collisions = 1500;
    const auto traj = run_dynamics(equator_state(0.5), config);
    CHECK(std::abs(traj.points.back().sz_norm) < 1e-9);
}

TEST_CASE("higher spin approaches the poles more sharply") {
    auto half = single_reservoir_config(0.5, 0.0);
    auto high = single_reservoir_config(2.5, 0.0);
    half.n_collisions = high.n_collisions = 300;
    const auto m_half = run_dynamics(equator_state(0.5), half).points.back().sz_norm;
    const auto m_high = run_dynamics(equator_state(2.5), high).points.back().sz_norm;
    CHECK(m_half > 0.0);
    CHECK(m_high > m_half);

    auto down = single_reservoir_config(2.5, M_PI);
    const auto steady = run_until_steady(equator_state(2.5), down, 1e-5, 100, 20000);
    REQUIRE(steady.converged);
    CHECK(steady.value == Catch::Approx(-1.0).margin(1e-3));
}

TEST_CASE("fidelity to the target pole is nondecreasing along the trajectory") {
    auto config = single_reservoir_config(1.5, 0.0);
    config.n_collisions = 2000;
    config.snapshot_stride = 50;
    const auto traj = run_dynamics(equator_state(1.5), config);
    double prev = -1.0;
    for (const auto& [n, state] : traj.snapshots) {
        const double fid = state.rho(0, 0).real();   // overlap with the pure m = +J pole
        CHECK(fid >= prev - 1e-12);
        prev = fid;
    }
}

TEST_CASE("second-order and exact steady magnetizations agree at weak coupling") {
    auto exact_cfg = single_reservoir_config(0.5, M_PI / 3.0);
    auto trunc_cfg = exact_cfg;
    trunc_cfg.propagator_mode = PropagatorMode::second_order;
    const auto exact = run_until_steady(equator_state(0.5), exact_cfg, 1e-6, 100, 20000);
    const auto trunc = run_until_steady(equator_state(0.5), trunc_cfg, 1e-6, 100, 20000);
    REQUIRE(exact.converged);
    REQUIRE(trunc.converged);
    CHECK(std::abs(exact.value - trunc.value) < 5e-3);
}

TEST_CASE("coupling sweep between opposed reservoirs is monotone with exact limits") {
    const double g = 0.02;
    std::vector<double> values;
    for (int k = 0; k <= 10; ++k) {
        const double frac = -0.5 + 0.1 * k;
        CollisionConfig config;
        config.spin = SpinQuantum(0.5);
        config.reservoirs = {{0.0, 0.0, g / 2.0 + frac * g}, {M_PI, 0.0, g / 2.0 - frac * g}};
        config.tau = 3.0;
        const auto steady = run_until_steady(equator_state(0.5), config, 1e-6, 100, 30000);
        REQUIRE(steady.converged);
        values.push_back(steady.value);
    }
    CHECK(values.front() == Catch::Approx(-1.0).margin(1e-3));
    CHECK(values.back() == Catch::Approx(1.0).margin(1e-3));
    CHECK(std::abs(values[5]) < 1e-6);
    for (std::size_t k = 1; k < values.size(); ++k) CHECK(values[k] >= values[k - 1] - 1e-9);
}

TEST_CASE("mixture map model reproduces the pole limits") {
    for (double frac : {-0.5, 0.5}) {
        const double g = 0.02;
        CollisionConfig config;
        config.spin = SpinQuantum(0.5);
        config.reservoirs = {{0.0, 0.0, g / 2.0 + frac * g}, {M_PI, 0.0, g / 2.0 - frac * g}};
        config.tau = 3.0;
        config.map_model = MapModel::mixture;
        const auto steady = run_until_steady(equator_state(0.5), config, 1e-6, 100, 30000);
        REQUIRE(steady.converged);
        CHECK(steady.value == Catch::Approx(frac > 0 ? 1.0 : -1.0).margin(1e-3));
    }
}

TEST_CASE("steadiness detection conventions") {
    const std::vector<double> constant(50, 0.42);
    const auto hit = detect_steady(constant, 1e-8, 10);
    REQUIRE(hit.has_value());
    CHECK(hit->index == 0);
    CHECK(hit->value == Catch::Approx(0.42));

    std::vector<double> ramp;
    for (int i = 0; i < 100; ++i) ramp.push_back(0.01 * i);
    CHECK(!detect_steady(ramp, 1e-3, 10).has_value());

    CHECK_THROWS_AS(detect_steady(constant, 1e-8, 1), std::invalid_argument);
}

TEST_CASE("configuration validation enforces the weak-coupling bound") {
    CollisionConfig config;
    config.spin = SpinQuantum(0.5);
    config.reservoirs = {{0.0, 0.0, 0.3}};
    config.tau = 3.0;   // g*tau = 0.9 > 0.5
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);

    config.reservoirs = {{0.0, 0.0, 0.02}};
    config.tau = -1.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}
