#include "bvflow/local_time.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "bvflow/errors.hpp"

namespace bvflow {

namespace {

void warn_bandwidth(double eps, double dt) {
    static std::atomic<bool> warned{false};
    if (eps < 2.0 * std::sqrt(dt) && !warned.exchange(true)) {
        std::cerr << "bvflow: warning: occupation bandwidth " << eps
                  << " is below 2*sqrt(dt) = " << 2.0 * std::sqrt(dt)
                  << "; counts may be unresolved\n";
    }
}

void check_point(const FlowTrajectory& traj, std::size_t j) {
    if (j >= traj.n_points()) throw std::invalid_argument("local_time: point index out of range");
}

} // namespace

double occupation_estimate(const FlowTrajectory& traj, std::size_t j, double level, double eps) {
    check_point(traj, j);
    if (!(eps > 0.0)) throw std::invalid_argument("occupation_estimate: eps must be > 0");
    warn_bandwidth(eps, traj.grid.dt);
    long cnt = 0;
    for (std::int64_t k = 0; k < traj.grid.n_steps; ++k) {
        double v = traj.state(k, j);
        if (v >= level && v < level + eps) ++cnt;
    }
    return traj.grid.dt * static_cast<double>(cnt) / eps;
}

std::vector<double> occupation_running(const FlowTrajectory& traj, std::size_t j, double level,
                                       double eps) {
    check_point(traj, j);
    if (!(eps > 0.0)) throw std::invalid_argument("occupation_estimate: eps must be > 0");
    warn_bandwidth(eps, traj.grid.dt);
    std::vector<double> out(static_cast<std::size_t>(traj.grid.n_steps) + 1, 0.0);
    double acc = 0.0;
    const double w = traj.grid.dt / eps;
    for (std::int64_t k = 0; k < traj.grid.n_steps; ++k) {
        double v = traj.state(k, j);
        if (v >= level && v < level + eps) acc += w;
        out[static_cast<std::size_t>(k) + 1] = acc;
    }
    return out;
}

LocalTimeProfile occupation_profile(const FlowTrajectory& traj, std::size_t j, double level0,
                                    std::size_t count, double eps) {
    check_point(traj, j);
    if (!(eps > 0.0)) throw std::invalid_argument("occupation_profile: eps must be > 0");
    if (count == 0) throw std::invalid_argument("occupation_profile: empty level grid");
    warn_bandwidth(eps, traj.grid.dt);
    std::vector<long> counts(count, 0);
    for (std::int64_t k = 0; k < traj.grid.n_steps; ++k) {
        double v = traj.state(k, j);
        double u = (v - level0) / eps;
        if (u >= 0.0 && u < static_cast<double>(count)) ++counts[static_cast<std::size_t>(u)];
    }
    LocalTimeProfile prof;
    prof.levels.resize(count);
    prof.values.resize(count);
    for (std::size_t m = 0; m < count; ++m) {
        prof.levels[m] = level0 + static_cast<double>(m) * eps;
        prof.values[m] = traj.grid.dt * static_cast<double>(counts[m]) / eps;
    }
    prof.bandwidth = eps;
    prof.method = "occupation";
    auto range = traj.visited_range(j);
    prof.traj_min = range.first;
    prof.traj_max = range.second;
    prof.horizon = traj.grid.horizon;
    return prof;
}

LocalTimeProfile occupation_profile_at(const FlowTrajectory& traj, std::size_t j,
                                       const std::vector<double>& levels, double eps) {
    check_point(traj, j);
    LocalTimeProfile prof;
    prof.levels = levels;
    prof.values.resize(levels.size());
    for (std::size_t m = 0; m < levels.size(); ++m)
        prof.values[m] = occupation_estimate(traj, j, levels[m], eps);
    prof.bandwidth = eps;
    prof.method = "occupation";
    auto range = traj.visited_range(j);
    prof.traj_min = range.first;
    prof.traj_max = range.second;
    prof.horizon = traj.grid.horizon;
    return prof;
}

double tanaka_estimate(const FlowTrajectory& traj, const NoisePath& noise, const BVDrift& drift,
                       std::size_t j, double level) {
    check_point(traj, j);
    if (noise.grid.n_steps != traj.grid.n_steps || noise.grid.dt != traj.grid.dt ||
        noise.increments.size() != static_cast<std::size_t>(traj.grid.n_steps))
        throw NumericalError("trajectory/noise mismatch");
    const double dt = traj.grid.dt;
    double ito = 0.0, drift_term = 0.0;
    for (std::int64_t k = 0; k < traj.grid.n_steps; ++k) {
        double v = traj.state(k, j);
        if (v > level) {
            ito += noise.increments[static_cast<std::size_t>(k)];
            drift_term += drift.value(v) * dt;
        }
    }
    double final_pos = std::max(traj.final_state(j) - level, 0.0);
    double initial_pos = std::max(traj.initial_points[j] - level, 0.0);
    return 2.0 * (final_pos - initial_pos - ito - drift_term);
}

LocalTimeProfile tanaka_profile(const FlowTrajectory& traj, const NoisePath& noise,
                                const BVDrift& drift, std::size_t j,
                                const std::vector<double>& levels) {
    LocalTimeProfile prof;
    prof.levels = levels;
    prof.values.resize(levels.size());
    for (std::size_t m = 0; m < levels.size(); ++m)
        prof.values[m] = tanaka_estimate(traj, noise, drift, j, levels[m]);
    prof.bandwidth = 0.0;
    prof.method = "tanaka";
    auto range = traj.visited_range(j);
    prof.traj_min = range.first;
    prof.traj_max = range.second;
    prof.horizon = traj.grid.horizon;
    return prof;
}

OccupationCheck occupation_formula_check(const FlowTrajectory& traj, std::size_t j,
                                         const std::function<double(double)>& f,
                                         const std::vector<double>& level_grid) {
    check_point(traj, j);
    if (level_grid.size() < 2)
        throw std::invalid_argument("occupation_formula_check: need >= 2 levels");
    const double dy = level_grid[1] - level_grid[0];
    if (!(dy > 0.0)) throw std::invalid_argument("occupation_formula_check: grid must increase");

    double lhs = 0.0;
    for (std::int64_t k = 0; k < traj.grid.n_steps; ++k) lhs += f(traj.state(k, j));
    lhs *= traj.grid.dt;

    double rhs = 0.0;
    LocalTimeProfile prof = occupation_profile_at(traj, j, level_grid, dy);
    for (std::size_t m = 0; m < level_grid.size(); ++m)
        rhs += f(level_grid[m]) * prof.values[m] * dy;

    return {lhs, rhs, std::abs(lhs - rhs)};
}

} // namespace bvflow
