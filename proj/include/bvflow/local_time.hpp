#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bvflow/flow.hpp"

namespace bvflow {

struct LocalTimeProfile {
    std::vector<double> levels;  // sorted
    std::vector<double> values;  // L(level), time units
    double bandwidth = 0.0;      // occupation window width (0 for tanaka)
    std::string method;          // "occupation" | "tanaka"
    double traj_min = 0.0, traj_max = 0.0;
    double horizon = 0.0;
};

// Occupation-window estimator on the one-sided window [y, y+eps):
//   (1/eps) * dt * #{ k < n : y <= phi_k < y+eps }.
// Warns (once) when eps < 2*sqrt(dt); the window then spans less than the
// per-step displacement and counts get grainy.
double occupation_estimate(const FlowTrajectory& traj, std::size_t point_index, double level,
                           double eps);

// Running (per-step) occupation estimate; nondecreasing by construction.
std::vector<double> occupation_running(const FlowTrajectory& traj, std::size_t point_index,
                                       double level, double eps);

// Uniform profile levels[i] = level0 + i*eps, bandwidth == spacing, binned in
// one pass over the trajectory.
LocalTimeProfile occupation_profile(const FlowTrajectory& traj, std::size_t point_index,
                                    double level0, std::size_t count, double eps);

// Profile on an arbitrary sorted level grid (O(n * levels)).
LocalTimeProfile occupation_profile_at(const FlowTrajectory& traj, std::size_t point_index,
                                       const std::vector<double>& levels, double eps);

// Semimartingale decomposition estimate of the same local time:
//   2 * [ (phi_T-y)^+ - (x-y)^+ - sum 1_{(y,inf)}(phi_k) dw_k
//         - sum 1_{(y,inf)}(phi_k) alpha(phi_k) dt ]
// (left-point indicators; the stochastic sum is an Ito sum).
double tanaka_estimate(const FlowTrajectory& traj, const NoisePath& noise, const BVDrift& drift,
                       std::size_t point_index, double level);

LocalTimeProfile tanaka_profile(const FlowTrajectory& traj, const NoisePath& noise,
                                const BVDrift& drift, std::size_t point_index,
                                const std::vector<double>& levels);

struct OccupationCheck {
    double lhs;       // dt * sum_k f(phi_k)
    double rhs;       // sum_m f(y_m) L(y_m) dy
    double abs_error;
};

// Occupation-times identity at bandwidth = grid spacing.
OccupationCheck occupation_formula_check(const FlowTrajectory& traj, std::size_t point_index,
                                         const std::function<double(double)>& f,
                                         const std::vector<double>& level_grid);

} // namespace bvflow
