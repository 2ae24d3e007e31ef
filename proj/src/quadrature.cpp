#include "bvflow/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace bvflow {
namespace {

double eval_checked(const std::function<double(double)>& f, double x) {
    double v = f(x);
    if (!std::isfinite(v)) throw std::invalid_argument("invalid integrand");
    return v;
}

double simpson(double fa, double fm, double fb, double h) {
    return (fa + 4.0 * fm + fb) * h / 6.0;
}

double adapt(const std::function<double(double)>& f, double a, double b,
             double fa, double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = eval_checked(f, lm);
    double frm = eval_checked(f, rm);
    double left = simpson(fa, flm, fm, m - a);
    double right = simpson(fm, frm, fb, b - m);
    double err = left + right - whole;
    if (depth <= 0 || std::abs(err) <= 15.0 * tol) {
        return left + right + err / 15.0;
    }
    return adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 QuadratureOptions opt) {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    double fa = eval_checked(f, a);
    double fb = eval_checked(f, b);
    double m = 0.5 * (a + b);
    double fm = eval_checked(f, m);
    double whole = simpson(fa, fm, fb, b - a);
    return sign * adapt(f, a, b, fa, fm, fb, whole, opt.abs_tol, opt.max_depth);
}

double integrate_right_tail(const std::function<double(double)>& f, double a,
                            QuadratureOptions opt) {
    double cut = std::max(std::abs(a), 1.0) + 1.0;
    double head = integrate(f, a, cut, opt);
    // x = 1/u maps [cut, inf) onto (0, 1/cut]; integrand must vanish at u=0.
    auto g = [&](double u) {
        if (u <= 0.0) return 0.0;
        return f(1.0 / u) / (u * u);
    };
    double tail = integrate(g, 0.0, 1.0 / cut, opt);
    return head + tail;
}

double integrate_left_tail(const std::function<double(double)>& f, double b,
                           QuadratureOptions opt) {
    auto fr = [&](double x) { return f(-x); };
    return integrate_right_tail(fr, -b, opt);
}

} // namespace bvflow
