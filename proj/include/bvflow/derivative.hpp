#pragma once

#include <memory>
#include <string>

#include "bvflow/local_time.hpp"

namespace bvflow {

enum class DerivMethod { LocalTimeFormula, SmoothOde, FiniteDifference };

std::string to_string(DerivMethod m);

struct DerivativeEstimate {
    double psi = 0.0; // > 0 always
    DerivMethod method = DerivMethod::LocalTimeFormula;
    double t = 0.0;
    double x = 0.0;
};

// psi = exp( int L(z) d alpha(z) ) with L interpolated piecewise-linearly on
// the profile's level grid (0 outside it).  Throws
// NumericalError("insufficient level coverage") when an atom of d(alpha)
// inside the visited range is not covered by the levels.
DerivativeEstimate derivative_via_local_time(const LocalTimeProfile& profile,
                                             const BVDrift& drift);

// psi = exp( dt * sum_k alpha'(phi_k) ); requires the trajectory's drift to
// expose a derivative (mollified drifts, or atom-free BV drifts).
DerivativeEstimate smooth_derivative(const FlowTrajectory& traj, std::size_t point_index);

// (phi_T(x+h) - phi_T(x)) / h on one shared-noise simulation.  Throws
// NumericalError("monotonicity breach, shrink dt") if the pair crossed.
DerivativeEstimate finite_difference(std::shared_ptr<const Drift> drift, double x, double h,
                                     const TimeGrid& grid, const NoisePath& noise);

struct NewtonLeibnizResult {
    double lhs;       // phi_T(x2) - phi_T(x1)
    double rhs;       // trapezoid over y of psi_lt(y)
    double rel_error;
};

// Verifies phi_T(x2)-phi_T(x1) = int_{x1}^{x2} psi_T(y) dy with all the
// quadrature points riding the same noise path; psi via the local-time
// formula at occupation bandwidth eps.
NewtonLeibnizResult newton_leibniz_check(std::shared_ptr<const BVDrift> drift, double x1,
                                         double x2, const TimeGrid& grid, const NoisePath& noise,
                                         int n_quad_points, double eps);

} // namespace bvflow
