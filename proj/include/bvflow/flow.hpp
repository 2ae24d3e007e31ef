#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "bvflow/drift.hpp"
#include "bvflow/rng.hpp"

namespace bvflow {

// Discretized flow phi_k(x_j) for a family of initial points riding one
// shared noise path.  states is (n_steps+1) x m, row-major in time.
struct FlowTrajectory {
    TimeGrid grid;
    std::vector<double> initial_points;
    std::vector<double> states;
    std::shared_ptr<const Drift> drift;
    NoisePath noise;
    long ordering_violations = 0;

    std::size_t n_points() const { return initial_points.size(); }
    double state(std::int64_t k, std::size_t j) const {
        return states[static_cast<std::size_t>(k) * initial_points.size() + j];
    }
    double final_state(std::size_t j) const { return state(grid.n_steps, j); }
    std::pair<double, double> visited_range(std::size_t j) const;
};

// Euler-Maruyama with the increments of `noise` shared across all initial
// points.  Aborts with NumericalError("numerical blow-up at step k") when a
// state leaves [-1e6, 1e6].  Adjacent-pair ordering violations are counted on
// the result, never fixed up.
FlowTrajectory simulate_flow(std::shared_ptr<const Drift> drift,
                             std::vector<double> initial_points, const TimeGrid& grid,
                             const NoisePath& noise);

struct MollifiedConvergenceRow {
    int order;
    double mean_abs;  // E |phi^n_T - phi_T|
    double mean_sq;   // E |phi^n_T - phi_T|^2
};

// Coupled Monte-Carlo comparison of the mollified flow against the rough one,
// pair (phi^n, phi) sharing each NoisePath.  Rows come back in the order of
// `orders`; within each row paths are reduced in fixed index order so the
// result is bit-stable for any thread count.
std::vector<MollifiedConvergenceRow> mollified_convergence_report(
    const BVDrift& drift, double x, const TimeGrid& grid, const std::vector<int>& orders,
    int n_paths, std::uint64_t seed, int threads = 1);

} // namespace bvflow
