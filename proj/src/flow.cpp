#include "bvflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bvflow/errors.hpp"
#include "bvflow/parallel.hpp"

namespace bvflow {

namespace {
constexpr double kBlowUp = 1e6;
}

std::pair<double, double> FlowTrajectory::visited_range(std::size_t j) const {
    double lo = initial_points[j], hi = initial_points[j];
    for (std::int64_t k = 0; k <= grid.n_steps; ++k) {
        double v = state(k, j);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

FlowTrajectory simulate_flow(std::shared_ptr<const Drift> drift,
                             std::vector<double> initial_points, const TimeGrid& grid,
                             const NoisePath& noise) {
    if (!drift) throw std::invalid_argument("simulate_flow: null drift");
    if (initial_points.empty()) throw std::invalid_argument("simulate_flow: no initial points");
    for (std::size_t j = 1; j < initial_points.size(); ++j)
        if (!(initial_points[j] > initial_points[j - 1]))
            throw std::invalid_argument("simulate_flow: initial points must be strictly increasing");
    if (noise.grid.n_steps != grid.n_steps || noise.grid.dt != grid.dt)
        throw std::invalid_argument("trajectory/noise mismatch");

    const std::size_t m = initial_points.size();
    const std::int64_t n = grid.n_steps;
    FlowTrajectory traj;
    traj.grid = grid;
    traj.initial_points = initial_points;
    traj.drift = drift;
    traj.noise = noise;
    traj.states.resize(static_cast<std::size_t>(n + 1) * m);

    std::vector<double> cur = initial_points;
    std::copy(cur.begin(), cur.end(), traj.states.begin());
    const double dt = grid.dt;
    for (std::int64_t k = 0; k < n; ++k) {
        const double dw = noise.increments[static_cast<std::size_t>(k)];
        for (std::size_t j = 0; j < m; ++j) {
            double next = cur[j] + drift->value(cur[j]) * dt + dw;
            if (!(std::abs(next) <= kBlowUp)) {
                std::ostringstream os;
                os << "numerical blow-up at step " << k;
                throw NumericalError(os.str());
            }
            cur[j] = next;
        }
        double* row = traj.states.data() + static_cast<std::size_t>(k + 1) * m;
        std::copy(cur.begin(), cur.end(), row);
        for (std::size_t j = 1; j < m; ++j)
            if (cur[j] <= cur[j - 1]) ++traj.ordering_violations;
    }
    return traj;
}

std::vector<MollifiedConvergenceRow> mollified_convergence_report(
    const BVDrift& drift, double x, const TimeGrid& grid, const std::vector<int>& orders,
    int n_paths, std::uint64_t seed, int threads) {
    for (std::size_t i = 1; i < orders.size(); ++i)
        if (orders[i] <= orders[i - 1])
            throw std::invalid_argument("mollified_convergence_report: orders must increase");
    if (n_paths < 100)
        throw std::invalid_argument("mollified_convergence_report: need n_paths >= 100");

    std::vector<MollifiedConvergenceRow> rows;
    const double dt = grid.dt;
    const std::int64_t n = grid.n_steps;
    for (int order : orders) {
        MollifiedDrift moll = drift.mollify(order);
        std::vector<double> abs_err(static_cast<std::size_t>(n_paths));
        parallel_for(static_cast<std::size_t>(n_paths), threads, [&](std::size_t p) {
            NoisePath noise = make_noise(grid, seed, p);
            double ph = x, pn = x;
            for (std::int64_t k = 0; k < n; ++k) {
                const double dw = noise.increments[static_cast<std::size_t>(k)];
                ph += drift.value(ph) * dt + dw;
                pn += moll.value(pn) * dt + dw;
                if (!(std::abs(ph) <= kBlowUp) || !(std::abs(pn) <= kBlowUp)) {
                    std::ostringstream os;
                    os << "numerical blow-up at step " << k;
                    throw NumericalError(os.str());
                }
            }
            abs_err[p] = std::abs(pn - ph);
        });
        double s1 = 0.0, s2 = 0.0;
        for (double e : abs_err) {
            s1 += e;
            s2 += e * e;
        }
        rows.push_back({order, s1 / n_paths, s2 / n_paths});
    }
    return rows;
}

} // namespace bvflow
