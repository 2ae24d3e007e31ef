#pragma once

#include <functional>

namespace bvflow {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    int max_depth = 48;
};

// Adaptive Simpson on a bounded interval.  Throws std::invalid_argument
// ("invalid integrand") if the integrand returns a non-finite value.
double integrate(const std::function<double(double)>& f, double a, double b,
                 QuadratureOptions opt = {});

// Integrals over half-lines for integrands decaying at least like 1/x^2.
// The tail beyond max(|a|,1) is folded onto (0,1] by the substitution x = 1/u.
double integrate_right_tail(const std::function<double(double)>& f, double a,
                            QuadratureOptions opt = {});
double integrate_left_tail(const std::function<double(double)>& f, double b,
                           QuadratureOptions opt = {});

} // namespace bvflow
