#include "bvflow/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bvflow/errors.hpp"
#include "bvflow/quadrature.hpp"

namespace bvflow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTailCut = 1e-14;  // exp(2A) below this fraction of the peak is dropped
constexpr int kGridCells = 8192;
} // namespace

double StationarySpec::weight(double y) const {
    return std::exp(2.0 * drift_.alpha_antiderivative(y));
}

StationarySpec StationarySpec::build(const BVDrift& drift) {
    if (!drift.has_stationary_regime()) throw NumericalError("no stationary regime");
    auto limits = drift.asymptotic_limits();

    StationarySpec spec;
    spec.drift_ = drift;
    spec.a_ = limits->first;
    spec.b_ = limits->second;
    spec.sup_abs_ = drift.sup_abs();

    auto logw = [&](double y) { return 2.0 * drift.alpha_antiderivative(y); };

    // peak of A over a scan range spanning the breakpoints
    double scan_lo = -1.0, scan_hi = 1.0;
    if (!drift.breakpoints().empty()) {
        scan_lo = std::min(scan_lo, drift.breakpoints().front() - 1.0);
        scan_hi = std::max(scan_hi, drift.breakpoints().back() + 1.0);
    }
    double peak = -kInf;
    for (int i = 0; i <= 400; ++i) {
        double y = scan_lo + (scan_hi - scan_lo) * i / 400.0;
        peak = std::max(peak, logw(y));
    }
    const double floor_log = peak + std::log(kTailCut);

    // expand the support until the weight is negligible on both sides
    double y_hi = scan_hi;
    while (logw(y_hi) > floor_log) {
        y_hi += 0.5;
        if (y_hi > 1e5) throw NumericalError("no stationary regime");
    }
    double y_lo = scan_lo;
    while (logw(y_lo) > floor_log) {
        y_lo -= 0.5;
        if (y_lo < -1e5) throw NumericalError("no stationary regime");
    }
    spec.y_lo_ = y_lo;
    spec.y_hi_ = y_hi;

    // cumulative caches on a uniform grid; per-cell adaptive quadrature
    const double peak_w = std::exp(peak);
    const QuadratureOptions cell_opt{3e-15 * peak_w * (y_hi - y_lo) / kGridCells, 36};
    spec.cell_ = (y_hi - y_lo) / kGridCells;
    spec.cum_weight_.assign(kGridCells + 1, 0.0);
    spec.tail_alpha_.assign(kGridCells + 1, 0.0);
    auto w = [&](double y) { return std::exp(logw(y)); };
    auto aw = [&](double y) { return drift.value(y) * std::exp(logw(y)); };
    for (int j = 0; j < kGridCells; ++j) {
        double lo = y_lo + j * spec.cell_;
        double hi = lo + spec.cell_;
        spec.cum_weight_[j + 1] = spec.cum_weight_[j] + integrate(w, lo, hi, cell_opt);
    }
    for (int j = kGridCells; j-- > 0;) {
        double lo = y_lo + j * spec.cell_;
        double hi = lo + spec.cell_;
        spec.tail_alpha_[j] = spec.tail_alpha_[j + 1] + integrate(aw, lo, hi, cell_opt);
    }
    spec.z_ = spec.cum_weight_.back();
    if (!(spec.z_ > 0.0) || !std::isfinite(spec.z_))
        throw NumericalError("no stationary regime");

    // two-level fast path: one atom, constant levels either side
    const auto& segs = drift.segments();
    if (drift.breakpoints().size() == 1 && segs.size() == 2 &&
        segs[0].kind == Segment::Kind::Constant && segs[1].kind == Segment::Kind::Constant) {
        spec.two_level_ = true;
        spec.tl_a_ = segs[1].c0;
        spec.tl_b_ = segs[0].c0;
        spec.tl_c_ = drift.breakpoints()[0];
    }
    return spec;
}

double StationarySpec::pdf_quadrature(double y) const {
    return weight(y) / z_;
}

double StationarySpec::pdf(double y) const {
    if (two_level_) {
        const double norm = 2.0 * tl_a_ * tl_b_ / (tl_a_ - tl_b_);
        double u = y - tl_c_;
        return u >= 0.0 ? norm * std::exp(2.0 * tl_a_ * u) : norm * std::exp(2.0 * tl_b_ * u);
    }
    return pdf_quadrature(y);
}

double StationarySpec::cdf_quadrature(double y) const {
    if (y <= y_lo_) return 0.0;
    if (y >= y_hi_) return 1.0;
    double u = (y - y_lo_) / cell_;
    std::size_t j = std::min(static_cast<std::size_t>(u), static_cast<std::size_t>(kGridCells - 1));
    double lo = y_lo_ + j * cell_;
    double part = integrate([&](double t) { return weight(t); }, lo, y,
                            {3e-15 * z_ / kGridCells + 1e-300, 36});
    return std::min(1.0, (cum_weight_[j] + part) / z_);
}

double StationarySpec::cdf(double y) const {
    if (two_level_) {
        double u = y - tl_c_;
        if (u >= 0.0) return 1.0 + tl_b_ / (tl_a_ - tl_b_) * std::exp(2.0 * tl_a_ * u);
        return tl_a_ / (tl_a_ - tl_b_) * std::exp(2.0 * tl_b_ * u);
    }
    return cdf_quadrature(y);
}

double StationarySpec::scale(double x) const {
    return scale_function(drift_, x);
}

double StationarySpec::scale_inverse(double y) const {
    // s is strictly increasing with s(0) = 0; bracket by doubling, then bisect
    double lo = 0.0, hi = 0.0;
    if (y == 0.0) return 0.0;
    if (y > 0.0) {
        hi = 1.0;
        while (scale(hi) < y) {
            hi *= 2.0;
            if (hi > 1e6) throw NumericalError("scale_inverse: bracket failed");
        }
    } else {
        lo = -1.0;
        while (scale(lo) > y) {
            lo *= 2.0;
            if (lo < -1e6) throw NumericalError("scale_inverse: bracket failed");
        }
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (hi - lo < 1e-14 * std::max(1.0, std::abs(mid))) return mid;
        (scale(mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double StationarySpec::sigma(double y) const {
    double q = scale_inverse(y);
    return std::exp(-2.0 * drift_.alpha_antiderivative(q));
}

double StationarySpec::alpha_tail_integral(double z) const {
    if (z >= y_hi_) return 0.0;
    if (z <= y_lo_) return tail_alpha_.front() / z_;
    double u = (z - y_lo_) / cell_;
    std::size_t j = std::min(static_cast<std::size_t>(u), static_cast<std::size_t>(kGridCells - 1));
    double hi = y_lo_ + (j + 1) * cell_;
    double part = integrate([&](double t) { return drift_.value(t) * weight(t); }, z, hi,
                            {3e-15 * z_ / kGridCells + 1e-300, 36});
    return (part + tail_alpha_[j + 1]) / z_;
}

double scale_function(const BVDrift& drift, double x) {
    if (!drift.has_stationary_regime()) throw NumericalError("no stationary regime");
    if (x == 0.0) return 0.0;
    auto integrand = [&](double z) { return std::exp(-2.0 * drift.alpha_antiderivative(z)); };
    // split at breakpoints so the adaptive pass only sees smooth pieces
    double lo = std::min(0.0, x), hi = std::max(0.0, x);
    std::vector<double> cuts{lo};
    for (double b : drift.breakpoints())
        if (b > lo && b < hi) cuts.push_back(b);
    cuts.push_back(hi);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double mag = std::max(integrand(cuts[i]), integrand(cuts[i + 1]));
        acc += integrate(integrand, cuts[i], cuts[i + 1], {1e-13 * std::max(1.0, mag), 48});
    }
    return x > 0.0 ? acc : -acc;
}

double lyapunov_formula(const StationarySpec& spec) {
    auto f = [&](double z) { return -spec.alpha_tail_integral(z); };
    return spec.drift().integrate_against(f, spec.support_lo(), spec.support_hi(), {1e-12, 48});
}

double ergodic_average_target(const StationarySpec& spec, double z) {
    if (z == -kInf) return spec.alpha_tail_integral(spec.support_lo());
    if (z == kInf) return 0.0;
    return spec.alpha_tail_integral(z);
}

} // namespace bvflow
