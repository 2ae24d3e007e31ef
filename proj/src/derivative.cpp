#include "bvflow/derivative.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bvflow/errors.hpp"

namespace bvflow {

std::string to_string(DerivMethod m) {
    switch (m) {
        case DerivMethod::LocalTimeFormula: return "local_time_formula";
        case DerivMethod::SmoothOde: return "smooth_ode";
        case DerivMethod::FiniteDifference: return "finite_difference";
    }
    return "?";
}

namespace {

// piecewise-linear interpolant of the profile, zero outside the level range
double interp_profile(const LocalTimeProfile& prof, double z) {
    const auto& xs = prof.levels;
    const auto& ys = prof.values;
    if (z <= xs.front() || z >= xs.back()) {
        if (z == xs.front()) return ys.front();
        if (z == xs.back()) return ys.back();
        return 0.0;
    }
    auto it = std::upper_bound(xs.begin(), xs.end(), z);
    std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    double w = (z - xs[i]) / (xs[i + 1] - xs[i]);
    return (1.0 - w) * ys[i] + w * ys[i + 1];
}

} // namespace

DerivativeEstimate derivative_via_local_time(const LocalTimeProfile& profile,
                                             const BVDrift& drift) {
    if (profile.levels.size() < 2)
        throw std::invalid_argument("derivative_via_local_time: need >= 2 levels");
    // every atom the trajectory can have charged must be inside the level grid
    for (double a : drift.atom_locations()) {
        bool visited = a >= profile.traj_min - profile.bandwidth && a <= profile.traj_max;
        bool covered = a >= profile.levels.front() && a <= profile.levels.back();
        if (visited && !covered) throw NumericalError("insufficient level coverage");
    }
    double expo = drift.integrate_against([&](double z) { return interp_profile(profile, z); },
                                          profile.levels.front(), profile.levels.back(),
                                          {1e-9, 40});
    DerivativeEstimate est;
    est.psi = std::exp(expo);
    est.method = DerivMethod::LocalTimeFormula;
    est.t = profile.horizon;
    return est;
}

DerivativeEstimate smooth_derivative(const FlowTrajectory& traj, std::size_t point_index) {
    if (point_index >= traj.n_points())
        throw std::invalid_argument("smooth_derivative: point index out of range");
    if (!traj.drift || !traj.drift->has_smooth_derivative())
        throw NumericalError("not a smooth drift");
    double acc = 0.0;
    for (std::int64_t k = 0; k < traj.grid.n_steps; ++k)
        acc += traj.drift->derivative(traj.state(k, point_index));
    DerivativeEstimate est;
    est.psi = std::exp(acc * traj.grid.dt);
    est.method = DerivMethod::SmoothOde;
    est.t = traj.grid.horizon;
    est.x = traj.initial_points[point_index];
    return est;
}

DerivativeEstimate finite_difference(std::shared_ptr<const Drift> drift, double x, double h,
                                     const TimeGrid& grid, const NoisePath& noise) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_difference: h must be > 0");
    FlowTrajectory traj = simulate_flow(std::move(drift), {x, x + h}, grid, noise);
    double d = traj.final_state(1) - traj.final_state(0);
    if (!(d > 0.0)) throw NumericalError("monotonicity breach, shrink dt");
    DerivativeEstimate est;
    est.psi = d / h;
    est.method = DerivMethod::FiniteDifference;
    est.t = grid.horizon;
    est.x = x;
    return est;
}

NewtonLeibnizResult newton_leibniz_check(std::shared_ptr<const BVDrift> drift, double x1,
                                         double x2, const TimeGrid& grid, const NoisePath& noise,
                                         int n_quad_points, double eps) {
    if (!(x1 < x2)) throw std::invalid_argument("newton_leibniz_check: need x1 < x2");
    if (n_quad_points < 2) throw std::invalid_argument("newton_leibniz_check: need >= 2 points");

    std::vector<double> points(static_cast<std::size_t>(n_quad_points));
    for (int i = 0; i < n_quad_points; ++i)
        points[static_cast<std::size_t>(i)] = x1 + (x2 - x1) * i / (n_quad_points - 1);

    FlowTrajectory traj = simulate_flow(drift, points, grid, noise);

    // one level grid covering everything any quadrature point visited
    double lo = points.front(), hi = points.back();
    for (std::size_t j = 0; j < points.size(); ++j) {
        auto r = traj.visited_range(j);
        lo = std::min(lo, r.first);
        hi = std::max(hi, r.second);
    }
    double level0 = std::floor((lo - 2.0 * eps) / eps) * eps;
    std::size_t count = static_cast<std::size_t>(std::ceil((hi + 2.0 * eps - level0) / eps)) + 1;

    std::vector<double> psi(points.size());
    for (std::size_t j = 0; j < points.size(); ++j) {
        LocalTimeProfile prof = occupation_profile(traj, j, level0, count, eps);
        psi[j] = derivative_via_local_time(prof, *drift).psi;
    }

    double hq = (x2 - x1) / (n_quad_points - 1);
    double rhs = 0.5 * (psi.front() + psi.back());
    for (std::size_t j = 1; j + 1 < psi.size(); ++j) rhs += psi[j];
    rhs *= hq;

    double lhs = traj.final_state(points.size() - 1) - traj.final_state(0);
    double rel = std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
    return {lhs, rhs, rel};
}

} // namespace bvflow
