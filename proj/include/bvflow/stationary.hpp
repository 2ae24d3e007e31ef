#pragma once

#include <optional>
#include <vector>

#include "bvflow/drift.hpp"

namespace bvflow {

// Scale function, transformed diffusion coefficient and stationary law of
// d phi = alpha(phi) dt + dw for drifts with limits a < 0 < b.
//
// p_stat(y) = exp(2 A(y)) / Z with A(y) = int_0^y alpha, computed directly.
// The sigma route (s, q, sigma) is kept for the invariant checks; the
// two-level drift additionally dispatches pdf/cdf to its closed form.
class StationarySpec {
  public:
    static StationarySpec build(const BVDrift& drift);

    const BVDrift& drift() const { return drift_; }
    double limit_pos() const { return a_; }  // a = lim_{x->+inf} alpha
    double limit_neg() const { return b_; }  // b = lim_{x->-inf} alpha
    double normalization() const { return z_; }
    double support_lo() const { return y_lo_; }
    double support_hi() const { return y_hi_; }
    bool two_level_closed_form() const { return two_level_; }

    double pdf(double y) const;             // closed form when available
    double pdf_quadrature(double y) const;  // always the general route
    double cdf(double y) const;
    double cdf_quadrature(double y) const;

    double scale(double x) const;          // s(x) = int_0^x exp(-2A)
    double scale_inverse(double y) const;  // q = s^{-1}
    double sigma(double y) const;          // s'(q(y))
    double sup_abs_drift() const { return sup_abs_; }

    // int_z^{+inf} alpha(y) p_stat(y) dy via the cached right-tail grid;
    // z = -inf gives the full integral, z beyond the support gives 0.
    double alpha_tail_integral(double z) const;

  private:
    StationarySpec() = default;

    BVDrift drift_ = BVDrift::zero();
    double a_ = 0.0, b_ = 0.0;
    double z_ = 0.0;          // int exp(2A)
    double y_lo_ = 0.0, y_hi_ = 0.0;
    double cell_ = 0.0;
    std::vector<double> cum_weight_;   // int_{y_lo}^{y_j} exp(2A)
    std::vector<double> tail_alpha_;   // int_{y_j}^{y_hi} alpha exp(2A)
    double sup_abs_ = 0.0;
    bool two_level_ = false;
    double tl_a_ = 0.0, tl_b_ = 0.0, tl_c_ = 0.0; // closed-form parameters

    double weight(double y) const; // exp(2A(y))
};

// s(x) for a drift in the stationary regime; errors with
// NumericalError("no stationary regime") otherwise.
double scale_function(const BVDrift& drift, double x);

inline StationarySpec stationary_density(const BVDrift& drift) {
    return StationarySpec::build(drift);
}

// The asymptotic-rate integral
//   int (-int_z^{+inf} alpha dP_stat) d alpha(z)
// evaluated by quadrature against d(alpha).
double lyapunov_formula(const StationarySpec& spec);

// int_z^{+inf} alpha(y) dP_stat(y); the ergodic limit of the time average of
// 1_{phi>z} alpha(phi).
double ergodic_average_target(const StationarySpec& spec, double z);

} // namespace bvflow
