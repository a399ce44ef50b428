#pragma once

#include <cmath>
#include <functional>

#include "slowfast/errors.hpp"

namespace slowfast {

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a,
                      double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adsimp(const std::function<double(double)>& f, double a, double fa,
                     double b, double fb, double fm, double whole, double tol,
                     int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, flm);
    const double right = simpson(f, m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adsimp(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
           adsimp(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature; tol is an absolute target for the interval.
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-12,
                               int max_depth = 48) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = detail::simpson(f, a, fa, b, fb, fm);
    return detail::adsimp(f, a, fa, b, fb, fm, whole, tol, max_depth);
}

}  // namespace slowfast
