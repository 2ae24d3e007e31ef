#include <doctest.h>

#include <cmath>
#include <memory>

#include "bvflow/errors.hpp"
#include "bvflow/flow.hpp"
#include "bvflow/parallel.hpp"

using namespace bvflow;

TEST_CASE("zero drift reduces to a translation of the noise") {
    TimeGrid g(1.0, 1e-2);
    NoisePath w = make_noise(g, 9, 0);
    auto drift = std::make_shared<BVDrift>(BVDrift::zero());
    FlowTrajectory traj = simulate_flow(drift, {-1.0, 0.0, 2.5}, g, w);
    // accumulate exactly the way the engine does: one increment per step
    double x0 = -1.0, x1 = 0.0, x2 = 2.5;
    for (std::int64_t k = 1; k <= g.n_steps; ++k) {
        double dw = w.increments[static_cast<std::size_t>(k - 1)];
        x0 += dw;
        x1 += dw;
        x2 += dw;
        CHECK(traj.state(k, 0) == x0);
        CHECK(traj.state(k, 1) == x1);
        CHECK(traj.state(k, 2) == x2);
    }
    CHECK(traj.ordering_violations == 0);
}

TEST_CASE("constant drift gives the exact affine update") {
    TimeGrid g(2.0, 0.5);
    NoisePath w = make_noise(g, 11, 3);
    auto drift = std::make_shared<BVDrift>(BVDrift::constant(0.7));
    FlowTrajectory traj = simulate_flow(drift, {1.0}, g, w);
    double x = 1.0;
    for (std::int64_t k = 0; k < g.n_steps; ++k) {
        x = x + 0.7 * 0.5 + w.increments[static_cast<std::size_t>(k)];
        CHECK(traj.state(k + 1, 0) == x);
    }
}

TEST_CASE("shared noise cancels exactly in differences when drift is zero") {
    TimeGrid g(1.0, 1e-3);
    NoisePath w = make_noise(g, 21, 0);
    auto drift = std::make_shared<BVDrift>(BVDrift::zero());
    FlowTrajectory traj = simulate_flow(drift, {0.0, 0.3}, g, w);
    for (std::int64_t k = 0; k <= g.n_steps; ++k)
        CHECK(traj.state(k, 1) - traj.state(k, 0) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("two-level stable run keeps the ordering") {
    TimeGrid g(10.0, 1e-3);
    NoisePath w = make_noise(g, 4, 0);
    auto drift = std::make_shared<BVDrift>(BVDrift::two_level(-1.0, 1.0));
    FlowTrajectory traj = simulate_flow(drift, {-1.0, 1.0}, g, w);
    CHECK(traj.ordering_violations == 0);
}

TEST_CASE("mollified drift under the step-size condition is strictly monotone") {
    // Lip(alpha_n) = |a-b| n g(0) = 2 * 10 * 35/32; dt = 1e-3 keeps dt*Lip < 1
    auto drift = std::make_shared<MollifiedDrift>(BVDrift::two_level(-1.0, 1.0).mollify(10));
    TimeGrid g(5.0, 1e-3);
    NoisePath w = make_noise(g, 8, 2);
    FlowTrajectory traj = simulate_flow(drift, {-0.4, -0.1, 0.02, 0.5}, g, w);
    CHECK(traj.ordering_violations == 0);
}

TEST_CASE("blow-up aborts with the step index") {
    auto drift = std::make_shared<BVDrift>(BVDrift::constant(1e7));
    TimeGrid g(1.0, 1.0);
    NoisePath w = zero_noise(g);
    CHECK_THROWS_AS(simulate_flow(drift, {0.0}, g, w), NumericalError);
    try {
        simulate_flow(drift, {0.0}, g, w);
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("numerical blow-up at step 0") != std::string::npos);
    }
}

TEST_CASE("initial points must increase strictly") {
    TimeGrid g(1.0, 0.5);
    NoisePath w = zero_noise(g);
    auto drift = std::make_shared<BVDrift>(BVDrift::zero());
    CHECK_THROWS_AS(simulate_flow(drift, {0.0, 0.0}, g, w), std::invalid_argument);
}

TEST_CASE("grid mismatch between noise and request is refused") {
    auto drift = std::make_shared<BVDrift>(BVDrift::zero());
    NoisePath w = make_noise(TimeGrid(1.0, 0.1), 1, 0);
    CHECK_THROWS_AS(simulate_flow(drift, {0.0}, TimeGrid(1.0, 0.2), w), std::invalid_argument);
}

TEST_CASE("simulation is bit-identical for any thread count of the batch") {
    TimeGrid g(1.0, 1e-3);
    auto drift = std::make_shared<BVDrift>(BVDrift::two_level(-1.0, 1.0));
    auto run_batch = [&](int threads) {
        std::vector<double> finals(16);
        parallel_for(16, threads, [&](std::size_t p) {
            NoisePath w = make_noise(g, 123, p);
            finals[p] = simulate_flow(drift, {0.1}, g, w).final_state(0);
        });
        return finals;
    };
    auto a = run_batch(1);
    auto b = run_batch(4);
    auto c = run_batch(16);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == b[i]);
        CHECK(a[i] == c[i]);
    }
}

TEST_CASE("euler strong error shrinks when the step is halved") {
    // smooth drift, coarse path derived from the fine one so both ride the
    // same Brownian motion
    auto drift = std::make_shared<BVDrift>(BVDrift::minus_tanh());
    const int paths = 1000;
    double err_coarse = 0.0, err_fine = 0.0;
    TimeGrid fine_grid(1.0, 5e-3);       // halved step
    TimeGrid finer_grid(1.0, 2.5e-3);
    for (int p = 0; p < paths; ++p) {
        {
            NoisePath fine = make_noise(fine_grid, 77, static_cast<std::uint64_t>(p));
            NoisePath coarse = coarsen(fine);
            double a = simulate_flow(drift, {0.3}, fine_grid, fine).final_state(0);
            double b = simulate_flow(drift, {0.3}, coarse.grid, coarse).final_state(0);
            err_coarse += std::abs(a - b);
        }
        {
            NoisePath fine = make_noise(finer_grid, 78, static_cast<std::uint64_t>(p));
            NoisePath coarse = coarsen(fine);
            double a = simulate_flow(drift, {0.3}, finer_grid, fine).final_state(0);
            double b = simulate_flow(drift, {0.3}, coarse.grid, coarse).final_state(0);
            err_fine += std::abs(a - b);
        }
    }
    CHECK(err_fine < err_coarse);
}

TEST_CASE("mollified convergence report: zero drift is exactly zero") {
    auto rows = mollified_convergence_report(BVDrift::zero(), 0.0, TimeGrid(1.0, 1e-2),
                                             {10, 100}, 100, 5);
    for (const auto& r : rows) {
        CHECK(r.mean_abs == 0.0);
        CHECK(r.mean_sq == 0.0);
    }
}

TEST_CASE("mollified convergence report: constant drift is exact for every order") {
    auto rows = mollified_convergence_report(BVDrift::constant(0.4), 0.2, TimeGrid(1.0, 1e-2),
                                             {1, 10}, 100, 6);
    for (const auto& r : rows) CHECK(r.mean_abs <= 1e-14);
}

TEST_CASE("mollified convergence report decreases in n for the two-level drift") {
    auto rows = mollified_convergence_report(BVDrift::two_level(-1.0, 1.0), 0.5,
                                             TimeGrid(1.0, 1e-3), {10, 100, 1000}, 400, 7, 4);
    CHECK(rows[0].mean_abs / std::max(rows[2].mean_abs, 1e-300) >= 1.5);
}
