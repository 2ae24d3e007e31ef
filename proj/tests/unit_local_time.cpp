#include <doctest.h>

#include <cmath>
#include <memory>

#include "bvflow/errors.hpp"
#include "bvflow/local_time.hpp"
#include "bvflow/parallel.hpp"

using namespace bvflow;

namespace {

FlowTrajectory constant_path(double value, double T, double dt) {
    TimeGrid g(T, dt);
    auto drift = std::make_shared<BVDrift>(BVDrift::zero());
    // zero drift + zero noise pins the path at its initial point
    return simulate_flow(drift, {value}, g, zero_noise(g));
}

// E|Z| for a standard normal, evaluated by quadrature rather than the closed
// form, so the constant below is independently derived
double gaussian_abs_mean() {
    const int n = 40000;
    const double hi = 12.0;
    double h = hi / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        double z = (i + 0.5) * h;
        acc += 2.0 * z * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI) * h;
    }
    return acc;
}

} // namespace

TEST_CASE("occupation estimate is zero when the path never enters the window") {
    FlowTrajectory traj = constant_path(5.0, 1.0, 0.01);
    CHECK(occupation_estimate(traj, 0, 0.0, 0.5) == 0.0);
}

TEST_CASE("a path pinned inside the window accrues T/eps") {
    const double eps = 0.2;
    FlowTrajectory traj = constant_path(0.0 + eps / 2.0, 1.0, 0.01);
    CHECK(occupation_estimate(traj, 0, 0.0, eps) == doctest::Approx(1.0 / eps).epsilon(1e-12));
}

TEST_CASE("running occupation estimates are nondecreasing with exact increments") {
    TimeGrid g(1.0, 1e-3);
    auto drift = std::make_shared<BVDrift>(BVDrift::zero());
    FlowTrajectory traj = simulate_flow(drift, {0.0}, g, make_noise(g, 31, 0));
    auto running = occupation_running(traj, 0, 0.0, 0.05);
    for (std::size_t k = 1; k < running.size(); ++k) CHECK(running[k] >= running[k - 1]);
    CHECK(running.back() == doctest::Approx(occupation_estimate(traj, 0, 0.0, 0.05)).epsilon(1e-12));
}

TEST_CASE("brownian local time at zero: both estimators near E|w_1|") {
    const double target = gaussian_abs_mean(); // = sqrt(2/pi)
    CHECK(target == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-6));
    TimeGrid g(1.0, 1e-4);
    auto drift = std::make_shared<BVDrift>(BVDrift::zero());
    const int paths = 2000;
    std::vector<double> occ(paths), tan(paths);
    parallel_for(paths, 4, [&](std::size_t p) {
        NoisePath w = make_noise(g, 55, p);
        FlowTrajectory traj = simulate_flow(drift, {0.0}, g, w);
        occ[p] = occupation_estimate(traj, 0, 0.0, 0.01);
        tan[p] = tanaka_estimate(traj, w, *drift, 0, 0.0);
    });
    double mo = 0, mt = 0;
    for (int p = 0; p < paths; ++p) {
        mo += occ[p];
        mt += tan[p];
    }
    mo /= paths;
    mt /= paths;
    CHECK(std::abs(mo / target - 1.0) < 0.05);
    CHECK(std::abs(mt / target - 1.0) < 0.05);
}

TEST_CASE("tanaka estimate vanishes when the path stays below the level") {
    FlowTrajectory traj = constant_path(-1.0, 1.0, 0.01);
    BVDrift zero = BVDrift::zero();
    CHECK(tanaka_estimate(traj, traj.noise, zero, 0, 0.0) == 0.0);
}

TEST_CASE("tanaka and occupation agree on coupled two-level paths") {
    // the two estimators target the same local time; pathwise they differ by
    // mean-zero estimation noise, so the agreement statement is about the
    // path-averaged difference
    TimeGrid g(1.0, 1e-4);
    auto drift = std::make_shared<BVDrift>(BVDrift::two_level(-1.0, 1.0));
    const int paths = 1000;
    std::vector<double> diff(paths);
    parallel_for(paths, 4, [&](std::size_t p) {
        NoisePath w = make_noise(g, 71, p);
        FlowTrajectory traj = simulate_flow(drift, {0.0}, g, w);
        diff[p] = tanaka_estimate(traj, w, *drift, 0, 0.0) -
                  occupation_estimate(traj, 0, 0.0, 0.01);
    });
    double mean = 0;
    for (double d : diff) mean += d;
    mean /= paths;
    CHECK(std::abs(mean) < 0.05);
}

TEST_CASE("tanaka refuses a mismatched noise path") {
    TimeGrid g(1.0, 1e-2);
    auto drift = std::make_shared<BVDrift>(BVDrift::zero());
    FlowTrajectory traj = simulate_flow(drift, {0.0}, g, make_noise(g, 1, 0));
    NoisePath other = make_noise(TimeGrid(1.0, 2e-2), 1, 0);
    CHECK_THROWS_WITH(tanaka_estimate(traj, other, *drift, 0, 0.0), "trajectory/noise mismatch");
}

TEST_CASE("occupation profiles: nonnegative, supported on the visited range") {
    TimeGrid g(1.0, 1e-3);
    auto drift = std::make_shared<BVDrift>(BVDrift::two_level(-1.0, 1.0));
    FlowTrajectory traj = simulate_flow(drift, {0.2}, g, make_noise(g, 13, 0));
    LocalTimeProfile prof = occupation_profile(traj, 0, -6.0, 1200, 0.01);
    REQUIRE(prof.levels.size() == prof.values.size());
    for (std::size_t m = 0; m < prof.levels.size(); ++m) {
        CHECK(prof.values[m] >= 0.0);
        if (prof.levels[m] < prof.traj_min - prof.bandwidth || prof.levels[m] > prof.traj_max)
            CHECK(prof.values[m] == 0.0);
    }
    // binned fast path agrees with the direct estimator
    for (std::size_t m = 100; m < 1100; m += 97)
        CHECK(prof.values[m] ==
              doctest::Approx(occupation_estimate(traj, 0, prof.levels[m], 0.01)).epsilon(1e-12));
}

TEST_CASE("bandwidth consistency: eps and eps/2 agree within noise for BM") {
    TimeGrid g(1.0, 1e-4);
    auto drift = std::make_shared<BVDrift>(BVDrift::zero());
    const int paths = 1000;
    std::vector<double> diff(paths);
    parallel_for(paths, 4, [&](std::size_t p) {
        NoisePath w = make_noise(g, 99, p);
        FlowTrajectory traj = simulate_flow(drift, {0.0}, g, w);
        diff[p] = occupation_estimate(traj, 0, 0.0, 0.04) - occupation_estimate(traj, 0, 0.0, 0.02);
    });
    double mean = 0, var = 0;
    for (double d : diff) mean += d;
    mean /= paths;
    for (double d : diff) var += (d - mean) * (d - mean);
    double se = std::sqrt(var / (static_cast<double>(paths) * (paths - 1.0)));
    CHECK(std::abs(mean) < 3.0 * se + 0.01);
}

TEST_CASE("occupation-times identity: constant and zero integrands") {
    TimeGrid g(1.0, 1e-4);
    auto drift = std::make_shared<BVDrift>(BVDrift::zero());
    FlowTrajectory traj = simulate_flow(drift, {0.0}, g, make_noise(g, 17, 0));
    auto range = traj.visited_range(0);
    std::vector<double> grid;
    for (double y = std::floor((range.first - 0.05) * 100.0) / 100.0; y <= range.second + 0.05;
         y += 0.01)
        grid.push_back(y);

    auto one = occupation_formula_check(traj, 0, [](double) { return 1.0; }, grid);
    CHECK(one.lhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(one.abs_error < 0.01);

    auto zero = occupation_formula_check(traj, 0, [](double) { return 0.0; }, grid);
    CHECK(zero.lhs == 0.0);
    CHECK(zero.rhs == 0.0);
    CHECK(zero.abs_error == 0.0);

    auto square = occupation_formula_check(traj, 0, [](double z) { return z * z; }, grid);
    CHECK(square.abs_error <= 0.02 * std::max(std::abs(square.lhs), 0.05));
}
