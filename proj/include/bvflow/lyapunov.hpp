#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "bvflow/flow.hpp"
#include "bvflow/stationary.hpp"

namespace bvflow {

// One two-point run tracking r(t) = ln(phi_t(x2) - phi_t(x1)).
//
// Checkpointing stops ("clamp") once the gap drops below the resolution
// floor max(1e-300, 2*dt*jump_scale, |phi|*1e-13): below the jump floor a
// single straddling step moves the gap by more than its size, and below the
// ulp floor the difference of the two states is pure cancellation.  A gap
// that turns non-positive *before* the floor is an ordering breach and
// invalidates the run.
struct LyapunovRun {
    std::uint64_t seed = 0;
    double lambda_hat = 0.0;          // (r(t_c) - r(t_c/2)) / (t_c/2)
    double t_end_effective = 0.0;     // clamp time, or the horizon
    double r_final = 0.0;
    bool clamped = false;
    bool breached = false;
    std::vector<double> checkpoint_t; // decimated
    std::vector<double> checkpoint_r;
};

struct LyapunovSummary {
    double mean = 0.0;
    double std_error = 0.0;
    int excluded = 0;
    std::vector<LyapunovRun> runs; // valid runs only, in seed order
};

// Tail-window estimates of ln-gap growth, one run per seed, each on its own
// noise stream (path_index 0 of that seed).  Throws
// NumericalError("configuration unstable") when more than 10% of runs breach.
// Warns (once) if the horizon is below 50 time units.
LyapunovSummary empirical_lyapunov(std::shared_ptr<const Drift> drift, double x1, double x2,
                                   const TimeGrid& grid, const std::vector<std::uint64_t>& seeds,
                                   int threads = 1);

struct ErgodicAverageRow {
    double z;
    double empirical; // time average of 1_{phi>z} alpha(phi), burn-in removed
    double target;    // int_z^inf alpha dP_stat
    double abs_error;
};

// z entries may include -inf.  First 5% of the horizon is discarded.
std::vector<ErgodicAverageRow> ergodic_average_check(const BVDrift& drift, double x,
                                                     const std::vector<double>& z_grid,
                                                     const TimeGrid& grid, std::uint64_t seed);

struct OccupationComparison {
    std::vector<double> edges;   // bins+1 histogram edges
    std::vector<long> counts;
    double sup_cdf_distance;     // max over edges |F_emp - P_stat|
};

// Long-run occupation histogram of one path against the stationary law.
OccupationComparison occupation_vs_stationary(const BVDrift& drift, double x,
                                              const TimeGrid& grid, std::uint64_t seed,
                                              int bins);

} // namespace bvflow
