#include "bvflow/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace bvflow {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
}

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

double inverse_normal_cdf(double p) {
    // AS 241 PPND16 rational approximations.
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_normal_cdf: p outside (0,1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                  6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
              1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
        const double den =
            (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                  3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
              4.2313330701600911252e+1) * r + 1.0);
        return q * num / den;
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
        val = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        val = num / den;
    }
    return q < 0.0 ? -val : val;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed + kGolden) ^ mix64(stream * kGolden + 0x6A09E667F3BCC909ull))) {}

double CounterRng::uniform(std::uint64_t k) const {
    std::uint64_t raw = mix64(key_ + (k + 1) * kGolden);
    return (static_cast<double>(raw >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::gaussian(std::uint64_t k) const {
    return inverse_normal_cdf(uniform(k));
}

TimeGrid::TimeGrid(double T, double dt_) {
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw std::invalid_argument("TimeGrid: dt must be > 0");
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("TimeGrid: T must be > 0");
    dt = dt_;
    n_steps = std::llround(T / dt_);
    if (n_steps < 1) n_steps = 1;
    horizon = static_cast<double>(n_steps) * dt;
}

NoisePath make_noise(const TimeGrid& grid, std::uint64_t seed, std::uint64_t path_index) {
    CounterRng rng(seed, path_index);
    NoisePath path;
    path.grid = grid;
    path.seed = seed;
    path.path_index = path_index;
    path.increments.resize(static_cast<std::size_t>(grid.n_steps));
    const double scale = std::sqrt(grid.dt);
    for (std::int64_t k = 0; k < grid.n_steps; ++k) {
        path.increments[static_cast<std::size_t>(k)] =
            scale * rng.gaussian(static_cast<std::uint64_t>(k));
    }
    return path;
}

NoisePath zero_noise(const TimeGrid& grid) {
    NoisePath path;
    path.grid = grid;
    path.increments.assign(static_cast<std::size_t>(grid.n_steps), 0.0);
    return path;
}

NoisePath coarsen(const NoisePath& fine) {
    if (fine.grid.n_steps % 2 != 0)
        throw std::invalid_argument("coarsen: need an even number of steps");
    NoisePath path;
    path.grid.dt = 2.0 * fine.grid.dt;
    path.grid.n_steps = fine.grid.n_steps / 2;
    path.grid.horizon = fine.grid.horizon;
    path.seed = fine.seed;
    path.path_index = fine.path_index;
    path.increments.resize(static_cast<std::size_t>(path.grid.n_steps));
    for (std::int64_t k = 0; k < path.grid.n_steps; ++k) {
        path.increments[static_cast<std::size_t>(k)] =
            fine.increments[static_cast<std::size_t>(2 * k)] +
            fine.increments[static_cast<std::size_t>(2 * k + 1)];
    }
    return path;
}

} // namespace bvflow
