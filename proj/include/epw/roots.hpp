#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "epw/error.hpp"

namespace epw {

struct RootResult {
    double x = 0.0;
    double fx = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    int iterations = 0;
};

/// Grows [lo, lo + width] by doubling the width until f changes sign.
/// f(lo) must be nonzero; the returned pair straddles the sign change.
template <class F>
std::pair<double, double> expand_bracket(F&& f, double lo, double width, int max_doublings = 200) {
    const double flo = f(lo);
    if (!std::isfinite(flo) || flo == 0.0) {
        std::ostringstream os;
        os << "expand_bracket: f(" << lo << ") = " << flo << " is not a usable bracket end";
        throw NumericalError(os.str());
    }
    for (int i = 0; i < max_doublings; ++i) {
        const double hi = lo + width;
        const double fhi = f(hi);
        if (std::isfinite(fhi) && std::signbit(fhi) != std::signbit(flo)) return {lo, hi};
        width *= 2.0;
    }
    std::ostringstream os;
    os << "expand_bracket: no sign change on [" << lo << ", " << lo + width << "]";
    throw NumericalError(os.str());
}

/// Bracketed bisection down to `bisect_width`, then Newton polish kept inside
/// the bracket until |f| <= ftol or the iterate stops moving.
template <class F, class DF>
RootResult bisect_newton(F&& f, DF&& df, double lo, double hi, double ftol,
                         double bisect_width = 1e-6, int max_iter = 400) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return {lo, 0.0, {lo, hi}, 0};
    if (fhi == 0.0) return {hi, 0.0, {lo, hi}, 0};
    if (std::signbit(flo) == std::signbit(fhi) || !std::isfinite(flo) || !std::isfinite(fhi)) {
        std::ostringstream os;
        os << "bisect_newton: f does not change sign on [" << lo << ", " << hi << "] (f=" << flo
           << ", " << fhi << ")";
        throw NumericalError(os.str());
    }
    const std::pair<double, double> initial{lo, hi};
    int it = 0;
    while (hi - lo > bisect_width && it < max_iter) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        ++it;
        if (fm == 0.0) return {mid, 0.0, initial, it};
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    double x = 0.5 * (lo + hi);
    double fx = f(x);
    while (std::abs(fx) > ftol && it < max_iter) {
        ++it;
        if (std::signbit(fx) == std::signbit(flo)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        const double d = df(x);
        double next = (d != 0.0 && std::isfinite(d)) ? x - fx / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) {
            x = next;
            fx = f(x);
            break;
        }
        x = next;
        fx = f(x);
    }
    return {x, fx, initial, it};
}

/// Plain bisection on a monotone bracket, to an absolute width `xtol`.
template <class F>
double bisect(F&& f, double lo, double hi, double xtol, int max_iter = 400) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi)) {
        std::ostringstream os;
        os << "bisect: no sign change on [" << lo << ", " << hi << "]";
        throw NumericalError(os.str());
    }
    for (int i = 0; i < max_iter && hi - lo > xtol; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace epw
