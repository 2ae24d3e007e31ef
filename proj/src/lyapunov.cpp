#include "bvflow/lyapunov.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>

#include "bvflow/errors.hpp"
#include "bvflow/parallel.hpp"

namespace bvflow {

namespace {

constexpr double kBlowUp = 1e6;

LyapunovRun run_pair(const Drift& drift, double x1, double x2, const TimeGrid& grid,
                     std::uint64_t seed) {
    LyapunovRun run;
    run.seed = seed;
    const double dt = grid.dt;
    const std::int64_t n = grid.n_steps;
    const double jump_floor = 2.0 * dt * drift.jump_scale();

    CounterRng rng(seed, 0);
    const double scale = std::sqrt(dt);

    std::vector<double> r(static_cast<std::size_t>(n) + 1);
    r[0] = std::log(x2 - x1);
    double p1 = x1, p2 = x2;
    std::int64_t k_end = n;
    for (std::int64_t k = 0; k < n; ++k) {
        double dw = scale * rng.gaussian(static_cast<std::uint64_t>(k));
        p1 += drift.value(p1) * dt + dw;
        p2 += drift.value(p2) * dt + dw;
        if (!(std::abs(p1) <= kBlowUp) || !(std::abs(p2) <= kBlowUp)) {
            run.breached = true;
            return run;
        }
        double gap = p2 - p1;
        double floor = std::max({1e-300, jump_floor, std::abs(p1) * 1e-13});
        if (gap < floor) {
            if (gap <= 0.0 && jump_floor == 0.0 && gap > -floor) {
                // pure cancellation of a smooth pair: clamp, not a breach
                run.clamped = true;
            } else if (gap <= 0.0 && jump_floor == 0.0) {
                run.breached = true;
                return run;
            } else {
                run.clamped = true;
            }
            k_end = k; // r[k] is the last recorded checkpoint
            break;
        }
        r[static_cast<std::size_t>(k) + 1] = std::log(gap);
    }

    if (k_end < 2) {
        run.breached = true; // nothing to window
        return run;
    }
    std::int64_t half = k_end / 2;
    run.lambda_hat =
        (r[static_cast<std::size_t>(k_end)] - r[static_cast<std::size_t>(half)]) /
        (static_cast<double>(k_end - half) * dt);
    run.t_end_effective = static_cast<double>(k_end) * dt;
    run.r_final = r[static_cast<std::size_t>(k_end)];

    std::int64_t stride = std::max<std::int64_t>(1, k_end / 1024);
    for (std::int64_t k = 0; k <= k_end; k += stride) {
        run.checkpoint_t.push_back(static_cast<double>(k) * dt);
        run.checkpoint_r.push_back(r[static_cast<std::size_t>(k)]);
    }
    return run;
}

} // namespace

LyapunovSummary empirical_lyapunov(std::shared_ptr<const Drift> drift, double x1, double x2,
                                   const TimeGrid& grid, const std::vector<std::uint64_t>& seeds,
                                   int threads) {
    if (!(x1 < x2)) throw std::invalid_argument("empirical_lyapunov: need x1 < x2");
    if (seeds.empty()) throw std::invalid_argument("empirical_lyapunov: no seeds");
    {
        static std::atomic<bool> warned{false};
        if (grid.horizon < 50.0 && !warned.exchange(true))
            std::cerr << "bvflow: warning: horizon " << grid.horizon
                      << " is short for tail-window estimates (recommend T >= 50)\n";
    }

    std::vector<LyapunovRun> slots(seeds.size());
    parallel_for(seeds.size(), threads,
                 [&](std::size_t i) { slots[i] = run_pair(*drift, x1, x2, grid, seeds[i]); });

    LyapunovSummary summary;
    for (auto& run : slots) {
        if (run.breached) {
            ++summary.excluded;
            continue;
        }
        summary.runs.push_back(std::move(run));
    }
    if (summary.excluded * 10 > static_cast<int>(seeds.size()))
        throw NumericalError("configuration unstable");
    if (summary.runs.empty()) throw NumericalError("configuration unstable");

    double s1 = 0.0;
    for (const auto& run : summary.runs) s1 += run.lambda_hat;
    summary.mean = s1 / static_cast<double>(summary.runs.size());
    double s2 = 0.0;
    for (const auto& run : summary.runs) {
        double d = run.lambda_hat - summary.mean;
        s2 += d * d;
    }
    std::size_t m = summary.runs.size();
    summary.std_error = m > 1 ? std::sqrt(s2 / (static_cast<double>(m) * (m - 1.0))) : 0.0;
    return summary;
}

std::vector<ErgodicAverageRow> ergodic_average_check(const BVDrift& drift, double x,
                                                     const std::vector<double>& z_grid,
                                                     const TimeGrid& grid, std::uint64_t seed) {
    StationarySpec spec = StationarySpec::build(drift);

    const double dt = grid.dt;
    const std::int64_t n = grid.n_steps;
    const std::int64_t burn = static_cast<std::int64_t>(0.05 * static_cast<double>(n));

    // accumulate per z by sorting states into the z partition once
    std::vector<double> zs = z_grid;
    std::sort(zs.begin(), zs.end());
    std::vector<double> acc(zs.size() + 1, 0.0); // acc[i]: sum over states in (z_{i-1}, z_i]

    CounterRng rng(seed, 0);
    const double scale = std::sqrt(dt);
    double phi = x;
    long kept = 0;
    for (std::int64_t k = 0; k < n; ++k) {
        if (k >= burn) {
            double a = drift.value(phi);
            auto it = std::lower_bound(zs.begin(), zs.end(), phi); // first z >= phi
            acc[static_cast<std::size_t>(it - zs.begin())] += a;
            ++kept;
        }
        phi += drift.value(phi) * dt + scale * rng.gaussian(static_cast<std::uint64_t>(k));
        if (!(std::abs(phi) <= kBlowUp)) throw NumericalError("numerical blow-up");
    }

    // suffix sums: states with phi > z_i live in cells i+1..end
    std::vector<double> suffix(zs.size() + 1, 0.0);
    for (std::size_t i = zs.size(); i-- > 0;) suffix[i] = suffix[i + 1] + acc[i + 1];

    const double window = static_cast<double>(kept) * dt;
    std::vector<ErgodicAverageRow> rows;
    for (double z : z_grid) {
        std::size_t i = static_cast<std::size_t>(
            std::lower_bound(zs.begin(), zs.end(), z) - zs.begin());
        double emp = suffix[i] * dt / window;
        double target = ergodic_average_target(spec, z);
        rows.push_back({z, emp, target, std::abs(emp - target)});
    }
    return rows;
}

OccupationComparison occupation_vs_stationary(const BVDrift& drift, double x,
                                              const TimeGrid& grid, std::uint64_t seed,
                                              int bins) {
    if (bins < 1) throw std::invalid_argument("occupation_vs_stationary: bins >= 1");
    StationarySpec spec = StationarySpec::build(drift);

    const double dt = grid.dt;
    const std::int64_t n = grid.n_steps;
    const std::int64_t burn = static_cast<std::int64_t>(0.05 * static_cast<double>(n));

    // pass 1: simulate and record kept states (one path, memory n doubles)
    std::vector<double> kept;
    kept.reserve(static_cast<std::size_t>(n - burn));
    CounterRng rng(seed, 0);
    const double scale = std::sqrt(dt);
    double phi = x;
    for (std::int64_t k = 0; k < n; ++k) {
        if (k >= burn) kept.push_back(phi);
        phi += drift.value(phi) * dt + scale * rng.gaussian(static_cast<std::uint64_t>(k));
        if (!(std::abs(phi) <= kBlowUp)) throw NumericalError("numerical blow-up");
    }

    auto [lo_it, hi_it] = std::minmax_element(kept.begin(), kept.end());
    double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) hi = lo + 1.0;

    OccupationComparison cmp;
    cmp.counts.assign(static_cast<std::size_t>(bins), 0);
    cmp.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i)
        cmp.edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / bins;
    for (double v : kept) {
        int idx = static_cast<int>((v - lo) / (hi - lo) * bins);
        idx = std::clamp(idx, 0, bins - 1);
        ++cmp.counts[static_cast<std::size_t>(idx)];
    }

    double dist = 0.0;
    double cum = 0.0;
    const double total = static_cast<double>(kept.size());
    dist = std::abs(0.0 - spec.cdf(cmp.edges.front()));
    for (int i = 0; i < bins; ++i) {
        cum += static_cast<double>(cmp.counts[static_cast<std::size_t>(i)]);
        dist = std::max(dist,
                        std::abs(cum / total - spec.cdf(cmp.edges[static_cast<std::size_t>(i) + 1])));
    }
    cmp.sup_cdf_distance = dist;
    return cmp;
}

} // namespace bvflow
