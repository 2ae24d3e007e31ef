#include "bvflow/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bvflow/errors.hpp"

namespace bvflow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

double Drift::derivative(double) const {
    throw NumericalError("not a smooth drift");
}

// ---------------------------------------------------------------------------
// Segment catalog
// ---------------------------------------------------------------------------

Segment Segment::constant(double value) {
    Segment s;
    s.kind = Kind::Constant;
    s.c0 = value;
    return s;
}

Segment Segment::affine(double intercept, double slope) {
    Segment s;
    s.kind = Kind::Affine;
    s.c0 = intercept;
    s.c1 = slope;
    return s;
}

Segment Segment::tanh_scaled(double scale, double rate, double center, double offset) {
    if (!(rate > 0.0)) throw ConfigError("tanh_scaled segment: rate must be > 0");
    Segment s;
    s.kind = Kind::TanhScaled;
    s.scale = scale;
    s.rate = rate;
    s.center = center;
    s.offset = offset;
    return s;
}

Segment Segment::tabulated(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() < 2 || xs.size() != ys.size())
        throw ConfigError("tabulated segment: need matching xs/ys with >= 2 knots");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw ConfigError("tabulated segment: xs must be increasing");
    Segment s;
    s.kind = Kind::Tabulated;
    s.xs = std::move(xs);
    s.ys = std::move(ys);
    // Natural cubic spline: solve the tridiagonal system for second derivatives.
    const std::size_t n = s.xs.size();
    s.spline_m.assign(n, 0.0);
    if (n > 2) {
        std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0), rhs(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double hl = s.xs[i] - s.xs[i - 1];
            double hr = s.xs[i + 1] - s.xs[i];
            sub[i] = hl / 6.0;
            diag[i] = (hl + hr) / 3.0;
            sup[i] = hr / 6.0;
            rhs[i] = (s.ys[i + 1] - s.ys[i]) / hr - (s.ys[i] - s.ys[i - 1]) / hl;
        }
        // Thomas algorithm on the interior rows.
        for (std::size_t i = 2; i + 1 < n; ++i) {
            double w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            double upper = (i + 2 < n) ? sup[i] * s.spline_m[i + 1] : 0.0;
            s.spline_m[i] = (rhs[i] - upper) / diag[i];
            if (i == 1) break;
        }
    }
    return s;
}

namespace {

// locate the spline interval for x (clamped)
std::size_t spline_cell(const std::vector<double>& xs, double x) {
    if (x <= xs.front()) return 0;
    if (x >= xs.back()) return xs.size() - 2;
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    return static_cast<std::size_t>(it - xs.begin()) - 1;
}

} // namespace

double Segment::value(double x) const {
    switch (kind) {
        case Kind::Constant: return c0;
        case Kind::Affine: return c0 + c1 * x;
        case Kind::TanhScaled: return scale * std::tanh(rate * (x - center)) + offset;
        case Kind::Tabulated: {
            if (x <= xs.front()) return ys.front();
            if (x >= xs.back()) return ys.back();
            std::size_t i = spline_cell(xs, x);
            double h = xs[i + 1] - xs[i];
            double a = (xs[i + 1] - x) / h;
            double b = (x - xs[i]) / h;
            return a * ys[i] + b * ys[i + 1] +
                   ((a * a * a - a) * spline_m[i] + (b * b * b - b) * spline_m[i + 1]) *
                       (h * h) / 6.0;
        }
    }
    return 0.0;
}

double Segment::deriv(double x) const {
    switch (kind) {
        case Kind::Constant: return 0.0;
        case Kind::Affine: return c1;
        case Kind::TanhScaled: {
            double c = std::cosh(rate * (x - center));
            return scale * rate / (c * c);
        }
        case Kind::Tabulated: {
            if (x < xs.front() || x > xs.back()) return 0.0; // clamped outside
            std::size_t i = spline_cell(xs, x);
            double h = xs[i + 1] - xs[i];
            double a = (xs[i + 1] - x) / h;
            double b = (x - xs[i]) / h;
            return (ys[i + 1] - ys[i]) / h +
                   ((3.0 * b * b - 1.0) * spline_m[i + 1] - (3.0 * a * a - 1.0) * spline_m[i]) *
                       h / 6.0;
        }
    }
    return 0.0;
}

double Segment::antiderivative(double x) const {
    switch (kind) {
        case Kind::Constant: return c0 * x;
        case Kind::Affine: return c0 * x + 0.5 * c1 * x * x;
        case Kind::TanhScaled: {
            // int scale*tanh(r(x-c)) + offset = (scale/r) log cosh(r(x-c)) + offset*x.
            double u = rate * (x - center);
            // log cosh without overflow
            double lc = std::abs(u) + std::log1p(std::exp(-2.0 * std::abs(u))) - std::log(2.0);
            return scale / rate * lc + offset * x;
        }
        case Kind::Tabulated: {
            // integrate piecewise: clamped flats outside, cubic cells inside
            if (x <= xs.front()) return ys.front() * (x - xs.front()); // anchor at xs.front()
            double acc = 0.0;
            for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
                double lo = xs[i];
                double hi = std::min(x, xs[i + 1]);
                if (hi <= lo) break;
                double h = xs[i + 1] - xs[i];
                // antiderivative of the cubic on [xs_i, xs_{i+1}] evaluated at hi
                auto cell = [&](double t) {
                    double a = (xs[i + 1] - t) / h;
                    double b = (t - xs[i]) / h;
                    double base = -a * a * h / 2.0 * ys[i] + b * b * h / 2.0 * ys[i + 1];
                    double corr = (-(a * a * a * a / 4.0 - a * a / 2.0) * spline_m[i] +
                                   (b * b * b * b / 4.0 - b * b / 2.0) * spline_m[i + 1]) *
                                  (h * h * h) / 6.0;
                    return base + corr;
                };
                acc += cell(hi) - cell(lo);
                if (x <= xs[i + 1]) return acc;
            }
            return acc + ys.back() * (x - xs.back());
        }
    }
    return 0.0;
}

std::optional<double> Segment::limit(bool plus_infinity) const {
    switch (kind) {
        case Kind::Constant: return c0;
        case Kind::Affine:
            if (c1 == 0.0) return c0;
            return std::nullopt;
        case Kind::TanhScaled: return offset + (plus_infinity ? scale : -scale);
        case Kind::Tabulated: return plus_infinity ? ys.back() : ys.front();
    }
    return std::nullopt;
}

bool Segment::variation_integrable_at_infinity() const {
    switch (kind) {
        case Kind::Constant: return true;
        case Kind::Affine: return c1 == 0.0;
        case Kind::TanhScaled: return true; // sech^2 tail
        case Kind::Tabulated: return true;  // clamped flat outside the knots
    }
    return false;
}

double Segment::sup_abs(double lo, double hi) const {
    switch (kind) {
        case Kind::Constant: return std::abs(c0);
        case Kind::Affine: {
            if (c1 == 0.0) return std::abs(c0);
            if (std::isinf(lo) || std::isinf(hi)) return kInf;
            return std::max(std::abs(value(lo)), std::abs(value(hi)));
        }
        case Kind::TanhScaled: {
            double cap = std::abs(scale) + std::abs(offset);
            if (std::isinf(lo) || std::isinf(hi)) return cap;
            // monotone in x, so the sup over an interval sits at an endpoint
            return std::min(cap, std::max(std::abs(value(lo)), std::abs(value(hi))));
        }
        case Kind::Tabulated: {
            double m = 0.0;
            for (double y : ys) m = std::max(m, std::abs(y));
            // spline overshoot between knots: sample; knots dominate in practice
            double a = std::isinf(lo) ? xs.front() : std::max(lo, xs.front());
            double b = std::isinf(hi) ? xs.back() : std::min(hi, xs.back());
            if (b > a) {
                const int kSamples = 64;
                for (int i = 0; i <= kSamples; ++i)
                    m = std::max(m, std::abs(value(a + (b - a) * i / kSamples)));
            }
            return m;
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// BVDrift
// ---------------------------------------------------------------------------

BVDrift::BVDrift(std::vector<double> breakpoints, std::vector<Segment> segments)
    : breakpoints_(std::move(breakpoints)), segments_(std::move(segments)) {
    if (segments_.size() != breakpoints_.size() + 1)
        throw ConfigError("drift: need exactly one segment more than breakpoints");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i)
        if (!(breakpoints_[i] > breakpoints_[i - 1]))
            throw ConfigError("drift: breakpoints must be strictly increasing");

    // Atoms of d(alpha): value jumps at the breakpoints, zero jumps dropped.
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        double x = breakpoints_[i];
        double jump = segments_[i + 1].value(x) - segments_[i].value(x);
        if (jump != 0.0) {
            atom_locations_.push_back(x);
            atom_jumps_.push_back(jump);
        }
    }

    // Asymptotic limits (a at +inf, b at -inf) when both segments admit them.
    auto lp = segments_.back().limit(true);
    auto lm = segments_.front().limit(false);
    if (lp && lm) limits_ = std::make_pair(*lp, *lm);

    // Linear-growth constant: |alpha|^2 <= C (1 + x^2).  A valid (not tight)
    // constant per segment kind.
    double c = 0.0;
    for (const auto& s : segments_) {
        switch (s.kind) {
            case Segment::Kind::Constant: c = std::max(c, s.c0 * s.c0); break;
            case Segment::Kind::Affine:
                c = std::max(c, 2.0 * (s.c0 * s.c0 + s.c1 * s.c1));
                break;
            case Segment::Kind::TanhScaled: {
                double cap = std::abs(s.scale) + std::abs(s.offset);
                c = std::max(c, cap * cap);
                break;
            }
            case Segment::Kind::Tabulated: {
                double cap = s.sup_abs(-kInf, kInf);
                c = std::max(c, cap * cap);
                break;
            }
        }
    }
    growth_c_ = c;

    // Cumulative antiderivative anchors A(b_i) = int_0^{b_i} alpha.
    anchor_A_.assign(breakpoints_.size(), 0.0);
    if (!breakpoints_.empty()) {
        std::size_t i0 = segment_index(0.0);
        // rightward from 0: first anchor reachable is breakpoints_[i0] (if any)
        double acc = 0.0;
        if (i0 < breakpoints_.size()) {
            const Segment& s = segments_[i0];
            acc = s.antiderivative(breakpoints_[i0]) - s.antiderivative(0.0);
            anchor_A_[i0] = acc;
            for (std::size_t i = i0 + 1; i < breakpoints_.size(); ++i) {
                const Segment& seg = segments_[i];
                acc += seg.antiderivative(breakpoints_[i]) - seg.antiderivative(breakpoints_[i - 1]);
                anchor_A_[i] = acc;
            }
        }
        // leftward from 0: anchors breakpoints_[i0-1], ..., breakpoints_[0]
        acc = 0.0;
        for (std::size_t j = i0; j-- > 0;) {
            const Segment& seg = segments_[j + 1];
            double upper = (j + 1 == i0) ? 0.0 : breakpoints_[j + 1];
            // A(b_j) = A(upper) - int_{b_j}^{upper} alpha, all inside segment j+1
            acc -= seg.antiderivative(upper) - seg.antiderivative(breakpoints_[j]);
            anchor_A_[j] = acc;
        }
    }
}

BVDrift BVDrift::constant(double c) {
    return BVDrift({}, {Segment::constant(c)});
}

BVDrift BVDrift::two_level(double a, double b) {
    return BVDrift({0.0}, {Segment::constant(b), Segment::constant(a)});
}

BVDrift BVDrift::tanh_drift(double scale, double rate, double center, double offset) {
    return BVDrift({}, {Segment::tanh_scaled(scale, rate, center, offset)});
}

std::size_t BVDrift::segment_index(double x) const {
    // number of breakpoints <= x, which makes eval right-continuous at jumps
    return static_cast<std::size_t>(
        std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x) - breakpoints_.begin());
}

double BVDrift::value(double x) const {
    return segments_[segment_index(x)].value(x);
}

double BVDrift::derivative(double x) const {
    if (!has_smooth_derivative()) return Drift::derivative(x); // throws
    return derivative_density_impl(x);
}

double BVDrift::derivative_density_impl(double x) const {
    return segments_[segment_index(x)].deriv(x);
}

double BVDrift::jump_scale() const {
    double s = 0.0;
    for (double j : atom_jumps_) s += std::abs(j);
    return s;
}

std::string BVDrift::describe() const {
    if (breakpoints_.size() == 1 && segments_[0].kind == Segment::Kind::Constant &&
        segments_[1].kind == Segment::Kind::Constant) {
        std::ostringstream os;
        os << "two_level(a=" << segments_[1].c0 << ",b=" << segments_[0].c0
           << ",at=" << breakpoints_[0] << ")";
        return os.str();
    }
    std::ostringstream os;
    os << "bv_drift(" << segments_.size() << " segments, " << atom_locations_.size()
       << " atoms)";
    return os.str();
}

double BVDrift::variation_of_segment(std::size_t i, double lo, double hi,
                                     bool lo_unbounded, bool hi_unbounded) const {
    const Segment& s = segments_[i];
    if (s.kind == Segment::Kind::Constant) return 0.0;
    auto absd = [&](double x) { return std::abs(s.deriv(x)); };
    if (lo_unbounded || hi_unbounded) {
        if (!s.variation_integrable_at_infinity())
            throw NumericalError("unbounded variation");
        if (lo_unbounded && hi_unbounded) {
            // single segment covering all of R
            return integrate_left_tail(absd, 0.0) + integrate_right_tail(absd, 0.0);
        }
        if (hi_unbounded) return integrate_right_tail(absd, lo);
        return integrate_left_tail(absd, hi);
    }
    if (hi <= lo) return 0.0;
    return integrate(absd, lo, hi);
}

double BVDrift::total_variation() const {
    double tv = 0.0;
    for (double j : atom_jumps_) tv += std::abs(j);
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        bool lo_unb = (i == 0);
        bool hi_unb = (i == segments_.size() - 1);
        double lo = lo_unb ? 0.0 : breakpoints_[i - 1];
        double hi = hi_unb ? 0.0 : breakpoints_[i];
        tv += variation_of_segment(i, lo, hi, lo_unb, hi_unb);
    }
    return tv;
}

double BVDrift::total_variation(double c, double d) const {
    if (!(c <= d)) throw std::invalid_argument("total_variation: need c <= d");
    double tv = 0.0;
    for (std::size_t i = 0; i < atom_locations_.size(); ++i)
        if (atom_locations_[i] >= c && atom_locations_[i] <= d)
            tv += std::abs(atom_jumps_[i]);
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        double lo = (i == 0) ? c : std::max(c, breakpoints_[i - 1]);
        double hi = (i == segments_.size() - 1) ? d : std::min(d, breakpoints_[i]);
        if (hi > lo) tv += variation_of_segment(i, lo, hi, false, false);
    }
    return tv;
}

double BVDrift::integrate_against(const std::function<double(double)>& f, double c, double d,
                                  QuadratureOptions opt) const {
    if (!(c <= d)) throw std::invalid_argument("integrate_against: need c <= d");
    double acc = 0.0;
    for (std::size_t i = 0; i < atom_locations_.size(); ++i) {
        double x = atom_locations_[i];
        if (x < c || x > d) continue;
        double fx = f(x);
        if (!std::isfinite(fx)) throw std::invalid_argument("invalid integrand");
        acc += atom_jumps_[i] * fx;
    }
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const Segment& s = segments_[i];
        if (s.kind == Segment::Kind::Constant) continue;
        double lo = (i == 0) ? c : std::max(c, breakpoints_[i - 1]);
        double hi = (i == segments_.size() - 1) ? d : std::min(d, breakpoints_[i]);
        if (hi <= lo) continue;
        acc += integrate([&](double z) { return f(z) * s.deriv(z); }, lo, hi, opt);
    }
    return acc;
}

MollifiedDrift BVDrift::mollify(int n) const {
    if (n < 1) throw std::invalid_argument("mollify: n >= 1 required");
    return MollifiedDrift(*this, n);
}

double BVDrift::alpha_antiderivative(double z) const {
    std::size_t iz = segment_index(z);
    const Segment& s = segments_[iz];
    if (breakpoints_.empty()) return s.antiderivative(z) - s.antiderivative(0.0);
    std::size_t i0 = segment_index(0.0);
    if (iz == i0) return s.antiderivative(z) - s.antiderivative(0.0);
    if (iz > i0) {
        // A(z) = A(b_{iz-1}) + int_{b_{iz-1}}^z
        return anchor_A_[iz - 1] + s.antiderivative(z) - s.antiderivative(breakpoints_[iz - 1]);
    }
    // z left of 0: A(z) = A(b_iz) - int_z^{b_iz}
    return anchor_A_[iz] - (s.antiderivative(breakpoints_[iz]) - s.antiderivative(z));
}

bool BVDrift::has_stationary_regime() const {
    if (!limits_) return false;
    if (!(limits_->first < 0.0 && limits_->second > 0.0)) return false;
    for (const auto& s : segments_)
        if (!s.variation_integrable_at_infinity()) return false;
    return true;
}

double BVDrift::sup_abs() const {
    double m = 0.0;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        double lo = (i == 0) ? -kInf : breakpoints_[i - 1];
        double hi = (i == segments_.size() - 1) ? kInf : breakpoints_[i];
        m = std::max(m, segments_[i].sup_abs(lo, hi));
    }
    return m;
}

// ---------------------------------------------------------------------------
// Mollification
// ---------------------------------------------------------------------------

double mollifier_g(double v) {
    if (v <= -1.0 || v >= 1.0) return 0.0;
    double w = 1.0 - v * v;
    return (35.0 / 32.0) * w * w * w;
}

double mollifier_gprime(double v) {
    if (v <= -1.0 || v >= 1.0) return 0.0;
    double w = 1.0 - v * v;
    return -(105.0 / 16.0) * v * w * w;
}

double mollifier_m0(double v) {
    if (v <= -1.0) return 0.0;
    if (v >= 1.0) return 1.0;
    double v3 = v * v * v;
    double v5 = v3 * v * v;
    double v7 = v5 * v * v;
    return (35.0 / 32.0) * (v - v3 + 0.6 * v5 - v7 / 7.0) + 0.5;
}

double mollifier_m1(double v) {
    if (v <= -1.0 || v >= 1.0) return 0.0;
    double v2 = v * v;
    double v4 = v2 * v2;
    double v6 = v4 * v2;
    double v8 = v4 * v4;
    return (35.0 / 32.0) * ((v2 / 2.0 - 0.75 * v4 + v6 / 2.0 - v8 / 8.0) - 0.125);
}

namespace {

// partial moment of g': N1(v) = int_{-1}^v u g'(u) du = v g(v) - M0(v)
double mollifier_n1(double v) {
    if (v <= -1.0) return 0.0;
    if (v >= 1.0) return -1.0;
    return v * mollifier_g(v) - mollifier_m0(v);
}

// v-cells of [-1,1] on which y = x - v/n stays inside one source segment
std::vector<double> convolution_cuts(const BVDrift& src, double x, int n) {
    std::vector<double> cuts;
    cuts.push_back(-1.0);
    for (double b : src.breakpoints()) {
        double v = n * (x - b);
        if (v > -1.0 && v < 1.0) cuts.push_back(v);
    }
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

} // namespace

MollifiedDrift::MollifiedDrift(BVDrift source, int n) : source_(std::move(source)), n_(n) {
    if (n_ < 1) throw std::invalid_argument("MollifiedDrift: n >= 1 required");
}

double MollifiedDrift::value(double x) const {
    auto cuts = convolution_cuts(source_, x, n_);
    double acc = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        double vl = cuts[c], vr = cuts[c + 1];
        if (vr <= vl) continue;
        double ym = x - 0.5 * (vl + vr) / n_;
        const Segment& s = source_.segments()[std::upper_bound(source_.breakpoints().begin(),
                                                               source_.breakpoints().end(), ym) -
                                              source_.breakpoints().begin()];
        double dm0 = mollifier_m0(vr) - mollifier_m0(vl);
        switch (s.kind) {
            case Segment::Kind::Constant: acc += s.c0 * dm0; break;
            case Segment::Kind::Affine:
                acc += (s.c0 + s.c1 * x) * dm0 -
                       (s.c1 / n_) * (mollifier_m1(vr) - mollifier_m1(vl));
                break;
            default:
                acc += integrate(
                    [&](double v) { return mollifier_g(v) * s.value(x - v / n_); }, vl, vr,
                    {1e-13, 40});
        }
    }
    return acc;
}

double MollifiedDrift::derivative(double x) const {
    auto cuts = convolution_cuts(source_, x, n_);
    double acc = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        double vl = cuts[c], vr = cuts[c + 1];
        if (vr <= vl) continue;
        double ym = x - 0.5 * (vl + vr) / n_;
        const Segment& s = source_.segments()[std::upper_bound(source_.breakpoints().begin(),
                                                               source_.breakpoints().end(), ym) -
                                              source_.breakpoints().begin()];
        double dg = mollifier_g(vr) - mollifier_g(vl);
        switch (s.kind) {
            case Segment::Kind::Constant: acc += s.c0 * dg; break;
            case Segment::Kind::Affine:
                acc += (s.c0 + s.c1 * x) * dg - (s.c1 / n_) * (mollifier_n1(vr) - mollifier_n1(vl));
                break;
            default:
                acc += integrate(
                    [&](double v) { return mollifier_gprime(v) * s.value(x - v / n_); }, vl, vr,
                    {1e-13, 40});
        }
    }
    return n_ * acc;
}

std::string MollifiedDrift::describe() const {
    std::ostringstream os;
    os << "mollified(n=" << n_ << ") of " << source_.describe();
    return os.str();
}

} // namespace bvflow
