#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bvflow/quadrature.hpp"

namespace bvflow {

// Common evaluation surface for everything the flow engine can drive.
class Drift {
  public:
    virtual ~Drift() = default;
    virtual double value(double x) const = 0;
    // alpha' where it exists; only meaningful when has_smooth_derivative().
    virtual bool has_smooth_derivative() const { return false; }
    virtual double derivative(double x) const;
    // Total mass of the jump part of d(alpha); 0 for smooth drifts.  Used to
    // size the gap-resolution floor of two-point simulations.
    virtual double jump_scale() const { return 0.0; }
    virtual std::string describe() const = 0;
};

// One smooth piece of a piecewise drift.  Closed catalog so that values,
// derivatives, antiderivatives and variation are always computable.
struct Segment {
    enum class Kind { Constant, Affine, TanhScaled, Tabulated };

    Kind kind = Kind::Constant;
    double c0 = 0.0, c1 = 0.0;                      // constant: c0; affine: c0 + c1*x
    double scale = 0.0, rate = 1.0, center = 0.0, offset = 0.0; // tanh piece
    std::vector<double> xs, ys;                     // tabulated knots
    std::vector<double> spline_m;                   // natural-spline second derivatives

    static Segment constant(double value);
    static Segment affine(double intercept, double slope);
    static Segment tanh_scaled(double scale, double rate, double center, double offset);
    static Segment tabulated(std::vector<double> xs, std::vector<double> ys);

    double value(double x) const;
    double deriv(double x) const;
    double antiderivative(double x) const; // an antiderivative of value()
    // Limit of value(x) as x -> +/- inf; nullopt when divergent (affine slope).
    std::optional<double> limit(bool plus_infinity) const;
    // Whether int |deriv| converges on an unbounded piece of this segment.
    bool variation_integrable_at_infinity() const;
    double sup_abs(double lo, double hi) const; // sup |value| over [lo,hi] (may be inf)
};

class MollifiedDrift;

// Piecewise-smooth bounded-variation drift.  Immutable after construction.
// Values are right-continuous at breakpoints: eval(x_i) is the right-segment
// value (the representative at jumps is a convention; d(alpha) is unaffected).
class BVDrift : public Drift {
  public:
    BVDrift(std::vector<double> breakpoints, std::vector<Segment> segments);

    static BVDrift constant(double c);
    static BVDrift zero() { return constant(0.0); }
    // alpha(x) = a for x >= 0, b for x < 0
    static BVDrift two_level(double a, double b);
    static BVDrift tanh_drift(double scale, double rate = 1.0, double center = 0.0,
                              double offset = 0.0);
    static BVDrift minus_tanh() { return tanh_drift(-1.0); }

    double value(double x) const override;
    bool has_smooth_derivative() const override { return atom_locations_.empty(); }
    double derivative(double x) const override;
    double jump_scale() const override;
    std::string describe() const override;

    // Density part of d(alpha): the segment derivative, right-continuous.
    double derivative_density(double x) const { return derivative_density_impl(x); }

    // Sum of |atom| + int |alpha'| over the interval ([c,d], or all of R when
    // omitted).  Throws NumericalError("unbounded variation") when an
    // unbounded segment has non-integrable slope and no interval is given.
    double total_variation() const;
    double total_variation(double c, double d) const;

    // Atoms-plus-density integral of f against d(alpha) over [c,d]:
    //   sum_i jump_i f(x_i)  +  int_c^d f(z) alpha'(z) dz.
    double integrate_against(const std::function<double(double)>& f, double c, double d,
                             QuadratureOptions opt = {}) const;

    MollifiedDrift mollify(int n) const;

    // A(z) = int_0^z alpha(u) du, exact per-segment antiderivatives with
    // cumulative anchors at the breakpoints.
    double alpha_antiderivative(double z) const;

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<Segment>& segments() const { return segments_; }
    // Nonzero jumps only (canonical form: zero atoms dropped).
    const std::vector<double>& atom_locations() const { return atom_locations_; }
    const std::vector<double>& atom_jumps() const { return atom_jumps_; }

    // (limit at +inf, limit at -inf) when both exist.
    std::optional<std::pair<double, double>> asymptotic_limits() const { return limits_; }
    // Condition for a stationary regime: limits exist with a < 0 < b and
    // finite variation on R.
    bool has_stationary_regime() const;

    double sup_abs() const;      // sup_R |alpha| (may be inf for affine tails)
    double growth_constant() const { return growth_c_; } // |alpha|^2 <= C(1+x^2)

  private:
    std::size_t segment_index(double x) const;
    double derivative_density_impl(double x) const;
    double variation_of_segment(std::size_t i, double lo, double hi,
                                bool lo_unbounded, bool hi_unbounded) const;

    std::vector<double> breakpoints_;
    std::vector<Segment> segments_;
    std::vector<double> atom_locations_;
    std::vector<double> atom_jumps_;
    std::optional<std::pair<double, double>> limits_;
    std::vector<double> anchor_A_; // alpha_antiderivative at each breakpoint
    double growth_c_ = 0.0;
};

// alpha_n = g_n * alpha with the C^1 bump g(v) = (35/32)(1-v^2)^3 on [-1,1],
// g_n(v) = n g(n v).  Exact kernel moments on constant/affine pieces,
// quadrature elsewhere.  sup|alpha_n| <= sup|alpha| and Var alpha_n <= Var alpha.
class MollifiedDrift : public Drift {
  public:
    MollifiedDrift(BVDrift source, int n);

    double value(double x) const override;
    bool has_smooth_derivative() const override { return true; }
    double derivative(double x) const override;
    std::string describe() const override;

    const BVDrift& source() const { return source_; }
    int order() const { return n_; }

  private:
    BVDrift source_;
    int n_;
};

// Mollifier kernel on [-1,1]: density g, CDF M0, first moment M1, and the
// partial moments of g' used by the derivative convolution.
double mollifier_g(double v);
double mollifier_gprime(double v);
double mollifier_m0(double v);
double mollifier_m1(double v);

} // namespace bvflow
