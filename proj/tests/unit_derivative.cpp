#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "bvflow/derivative.hpp"
#include "bvflow/errors.hpp"
#include "bvflow/parallel.hpp"

using namespace bvflow;

namespace {

LocalTimeProfile fixture_profile(std::vector<double> levels, std::vector<double> values,
                                 double lo, double hi, double t) {
    LocalTimeProfile prof;
    prof.levels = std::move(levels);
    prof.values = std::move(values);
    prof.bandwidth = 0.01;
    prof.method = "occupation";
    prof.traj_min = lo;
    prof.traj_max = hi;
    prof.horizon = t;
    return prof;
}

} // namespace

TEST_CASE("zero drift: every method returns exactly one") {
    TimeGrid g(1.0, 1e-3);
    auto drift = std::make_shared<BVDrift>(BVDrift::zero());
    NoisePath w = make_noise(g, 3, 0);
    FlowTrajectory traj = simulate_flow(drift, {0.0}, g, w);
    LocalTimeProfile prof = occupation_profile(traj, 0, -5.0, 1000, 0.01);
    CHECK(derivative_via_local_time(prof, *drift).psi == 1.0);
    CHECK(smooth_derivative(traj, 0).psi == 1.0);
    CHECK(finite_difference(drift, 0.0, 0.01, g, w).psi == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-level fixture: psi = exp((a-b) L_0)") {
    BVDrift d = BVDrift::two_level(-1.0, 1.0);
    // flat profile with L(0) = 0.5 around the atom
    LocalTimeProfile prof =
        fixture_profile({-1.0, -0.5, 0.0, 0.5, 1.0}, {0.5, 0.5, 0.5, 0.5, 0.5}, -1.0, 1.0, 1.0);
    double psi = derivative_via_local_time(prof, d).psi;
    CHECK(psi == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(psi == doctest::Approx(0.3679).epsilon(1e-3));
}

TEST_CASE("drift without atoms and a flat visited patch gives psi = 1") {
    BVDrift c = BVDrift::constant(0.8);
    LocalTimeProfile prof = fixture_profile({-0.2, 0.0, 0.2}, {0.3, 0.7, 0.4}, -0.2, 0.2, 1.0);
    CHECK(derivative_via_local_time(prof, c).psi == 1.0);
}

TEST_CASE("insufficient level coverage around a visited atom") {
    BVDrift d = BVDrift::two_level(-1.0, 1.0);
    // trajectory visited [-1,1] but the profile only spans positives
    LocalTimeProfile prof = fixture_profile({0.5, 1.0}, {0.1, 0.0}, -1.0, 1.0, 1.0);
    CHECK_THROWS_WITH(derivative_via_local_time(prof, d), "insufficient level coverage");
}

TEST_CASE("smooth derivative: constant and affine mollified drifts are exact") {
    TimeGrid g(1.0, 1e-2);
    auto cm = std::make_shared<MollifiedDrift>(BVDrift::constant(0.4).mollify(5));
    FlowTrajectory tc = simulate_flow(cm, {0.0}, g, make_noise(g, 5, 0));
    CHECK(smooth_derivative(tc, 0).psi == doctest::Approx(1.0).epsilon(1e-13));

    auto am = std::make_shared<MollifiedDrift>(
        BVDrift({}, {Segment::affine(0.0, -0.5)}).mollify(7));
    FlowTrajectory ta = simulate_flow(am, {0.2}, g, make_noise(g, 6, 0));
    CHECK(smooth_derivative(ta, 0).psi == doctest::Approx(std::exp(-0.5 * 1.0)).epsilon(1e-10));
}

TEST_CASE("a rough drift refuses the smooth formula") {
    TimeGrid g(1.0, 1e-2);
    auto d = std::make_shared<BVDrift>(BVDrift::two_level(-1.0, 1.0));
    FlowTrajectory traj = simulate_flow(d, {0.0}, g, make_noise(g, 7, 0));
    CHECK_THROWS_WITH(smooth_derivative(traj, 0), "not a smooth drift");
}

TEST_CASE("smooth-ode and local-time formulas agree for -tanh") {
    // the drift is its own smooth representative (no atoms)
    TimeGrid g(1.0, 1e-4);
    auto d = std::make_shared<BVDrift>(BVDrift::minus_tanh());
    const int paths = 20;
    std::vector<double> gap(paths);
    parallel_for(paths, 4, [&](std::size_t p) {
        NoisePath w = make_noise(g, 61, p);
        FlowTrajectory traj = simulate_flow(d, {0.3}, g, w);
        auto range = traj.visited_range(0);
        double eps = 0.01;
        double level0 = std::floor((range.first - 2 * eps) / eps) * eps;
        std::size_t count =
            static_cast<std::size_t>(std::ceil((range.second + 2 * eps - level0) / eps)) + 1;
        LocalTimeProfile prof = occupation_profile(traj, 0, level0, count, eps);
        double lt = derivative_via_local_time(prof, *d).psi;
        double ode = smooth_derivative(traj, 0).psi;
        gap[p] = std::abs(std::log(lt) - std::log(ode));
    });
    double mean = 0;
    for (double v : gap) mean += v;
    mean /= paths;
    CHECK(mean < 0.05);
}

TEST_CASE("finite difference is exactly one for translations") {
    TimeGrid g(1.0, 1e-2);
    auto drift = std::make_shared<BVDrift>(BVDrift::constant(0.9));
    NoisePath w = make_noise(g, 19, 0);
    DerivativeEstimate fd = finite_difference(drift, -0.4, 0.05, g, w);
    CHECK(fd.psi == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("finite difference reports a monotonicity breach deterministically") {
    // one huge drift-only step across the jump folds the pair over
    auto drift = std::make_shared<BVDrift>(BVDrift::two_level(-1.0, 1.0));
    TimeGrid g(1.0, 1.0);
    NoisePath w = zero_noise(g);
    CHECK_THROWS_WITH(finite_difference(drift, -0.005, 0.01, g, w),
                      "monotonicity breach, shrink dt");
}

TEST_CASE("positivity and the contraction bound for the two-level drift") {
    TimeGrid g(1.0, 1e-4);
    auto d = std::make_shared<BVDrift>(BVDrift::two_level(-1.0, 1.0));
    for (std::uint64_t p = 0; p < 10; ++p) {
        NoisePath w = make_noise(g, 41, p);
        FlowTrajectory traj = simulate_flow(d, {-0.1}, g, w);
        auto range = traj.visited_range(0);
        double eps = 0.01;
        double level0 = std::floor((range.first - 2 * eps) / eps) * eps;
        std::size_t count =
            static_cast<std::size_t>(std::ceil((range.second + 2 * eps - level0) / eps)) + 1;
        LocalTimeProfile prof = occupation_profile(traj, 0, level0, count, eps);
        double psi = derivative_via_local_time(prof, *d).psi;
        CHECK(psi > 0.0);
        CHECK(psi <= 1.0); // d(alpha) is a single negative atom
    }
}

TEST_CASE("cross-method gap shrinks when dt, eps and h are halved") {
    // both resolutions ride the same Brownian path (the coarse increments are
    // pairwise sums of the fine ones); the horizon is short enough that the
    // pair gap stays clear of the per-step resolution floor
    auto d = std::make_shared<BVDrift>(BVDrift::two_level(-1.0, 1.0));
    const int paths = 150;
    auto gap_on = [&](const NoisePath& w, double eps, double h, double& out) {
        FlowTrajectory traj = simulate_flow(d, {-0.1, -0.1 + h}, w.grid, w);
        double diff = traj.final_state(1) - traj.final_state(0);
        if (!(diff > 0.0)) return false;
        auto range = traj.visited_range(0);
        double level0 = std::floor((range.first - 2 * eps) / eps) * eps;
        std::size_t count =
            static_cast<std::size_t>(std::ceil((range.second + 2 * eps - level0) / eps)) + 1;
        LocalTimeProfile prof = occupation_profile(traj, 0, level0, count, eps);
        double lt = derivative_via_local_time(prof, *d).psi;
        out = std::abs(std::log(lt) - std::log(diff / h));
        return true;
    };
    std::vector<double> coarse(paths, 0.0), fine(paths, 0.0);
    std::vector<char> ok(paths, 1);
    parallel_for(paths, 4, [&](std::size_t p) {
        NoisePath wf = make_noise(TimeGrid(0.5, 5e-5), 203, p);
        NoisePath wc = coarsen(wf);
        double gc = 0.0, gf = 0.0;
        if (!gap_on(wc, 0.04, 0.1, gc) || !gap_on(wf, 0.02, 0.05, gf)) {
            ok[p] = 0;
            return;
        }
        coarse[p] = gc;
        fine[p] = gf;
    });
    double mc = 0, mf = 0;
    int n = 0;
    for (int p = 0; p < paths; ++p)
        if (ok[p]) {
            mc += coarse[p];
            mf += fine[p];
            ++n;
        }
    REQUIRE(n > paths / 2);
    CHECK(mf / n < mc / n);
}

TEST_CASE("newton-leibniz identity is exact for drift-free and constant flows") {
    TimeGrid g(1.0, 1e-2);
    NoisePath w = make_noise(g, 23, 0);
    auto zero = std::make_shared<const BVDrift>(BVDrift::zero());
    auto nl0 = newton_leibniz_check(zero, -1.0, 1.0, g, w, 11, 0.05);
    CHECK(nl0.lhs == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(nl0.rel_error < 1e-12);

    auto cst = std::make_shared<const BVDrift>(BVDrift::constant(-0.7));
    auto nlc = newton_leibniz_check(cst, 0.0, 0.5, g, w, 5, 0.05);
    CHECK(nlc.lhs == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(nlc.rel_error < 1e-12);
}

TEST_CASE("newton-leibniz holds within tolerance for the two-level drift") {
    TimeGrid g(1.0, 1e-4);
    auto d = std::make_shared<const BVDrift>(BVDrift::two_level(-1.0, 1.0));
    const int paths = 20;
    std::vector<double> errs(paths);
    parallel_for(paths, 4, [&](std::size_t p) {
        NoisePath w = make_noise(g, 301, p);
        errs[p] = newton_leibniz_check(d, -1.0, 1.0, g, w, 21, 0.02).rel_error;
    });
    std::sort(errs.begin(), errs.end());
    CHECK(errs[paths / 2] < 0.1);
}
