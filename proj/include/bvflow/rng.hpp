#pragma once

#include <cstdint>
#include <vector>

namespace bvflow {

// splitmix64 finalizer; the whole generator is counter based, so draw k of
// stream (seed, path_index) is a pure function of its arguments and batches
// can be produced in any order on any number of threads.
std::uint64_t mix64(std::uint64_t z);

// Wichura's AS 241 (PPND16), |error| < 1e-15 over (0,1).
double inverse_normal_cdf(double p);

class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    double uniform(std::uint64_t k) const;   // in (0,1), symmetric
    double gaussian(std::uint64_t k) const;  // standard normal, inverse-CDF

  private:
    std::uint64_t key_;
};

struct TimeGrid {
    double dt = 0.0;
    std::int64_t n_steps = 0;
    double horizon = 0.0; // n_steps * dt exactly

    TimeGrid() = default;
    TimeGrid(double T, double dt_); // rounds T to the nearest multiple of dt

    bool operator==(const TimeGrid&) const = default;
};

struct NoisePath {
    TimeGrid grid;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    std::vector<double> increments; // Delta w_k ~ N(0, dt), k = 0..n_steps-1
};

NoisePath make_noise(const TimeGrid& grid, std::uint64_t seed, std::uint64_t path_index);

// Test fixture: identically zero increments.
NoisePath zero_noise(const TimeGrid& grid);

// Pairwise-summed coarse path on the doubled step (for step-halving studies);
// requires an even number of steps.
NoisePath coarsen(const NoisePath& fine);

} // namespace bvflow
