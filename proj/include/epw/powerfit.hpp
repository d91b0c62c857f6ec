#pragma once

// Power laws y ~ C |x|^p by least squares in log-log coordinates.

#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "epw/error.hpp"

namespace epw {

struct PowerFit {
    double exponent = 0.0;
    double coefficient = 0.0;
    double r_squared = 0.0;
    std::pair<double, double> window{0.0, 0.0};
    std::size_t n_points = 0;
    bool pinned = false;  // exponent was fixed, only the coefficient was fitted
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = a + b x.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw DomainError("fit_line: need at least two (x, y) pairs of equal length");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw DomainError("fit_line: abscissae are all equal");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        ssr += r * r;
    }
    f.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ssr / syy) : 1.0;
    return f;
}

namespace detail {

inline void log_window(const std::vector<double>& xi, const std::vector<double>& y, std::pair<double, double> window,
                       std::size_t min_points, std::vector<double>& lx, std::vector<double>& ly) {
    if (xi.size() != y.size()) throw DomainError("fit_power: xi and y differ in length");
    if (!(window.first > 0.0 && window.second > window.first))
        throw DomainError("fit_power: window must satisfy 0 < lo < hi");
    for (std::size_t i = 0; i < xi.size(); ++i) {
        const double a = std::abs(xi[i]);
        if (a < window.first || a > window.second) continue;
        if (!(y[i] > 0.0) || !std::isfinite(y[i])) {
            std::ostringstream os;
            os << "fit_power: y=" << y[i] << " is not positive at xi=" << xi[i];
            throw DomainError(os.str());
        }
        lx.push_back(std::log(a));
        ly.push_back(std::log(y[i]));
    }
    if (lx.size() < min_points) {
        std::ostringstream os;
        os << "fit_power: " << lx.size() << " points in window [" << window.first << ", " << window.second
           << "], need " << min_points;
        throw DomainError(os.str());
    }
}

}  // namespace detail

/// Least squares of log y on log |xi| over window.first <= |xi| <= window.second.
inline PowerFit fit_power(const std::vector<double>& xi, const std::vector<double>& y, std::pair<double, double> window,
                          std::size_t min_points = 20) {
    std::vector<double> lx, ly;
    detail::log_window(xi, y, window, min_points, lx, ly);
    const LineFit lf = fit_line(lx, ly);
    PowerFit f;
    f.exponent = lf.slope;
    f.coefficient = std::exp(lf.intercept);
    f.r_squared = lf.r_squared;
    f.window = window;
    f.n_points = lx.size();
    return f;
}

/// Coefficient of y ~ C |xi|^exponent with the exponent held fixed: the geometric mean of y / |xi|^exponent.
inline PowerFit fit_power_pinned(const std::vector<double>& xi, const std::vector<double>& y,
                                 std::pair<double, double> window, double exponent, std::size_t min_points = 20) {
    std::vector<double> lx, ly;
    detail::log_window(xi, y, window, min_points, lx, ly);
    const std::size_t n = lx.size();
    double mean = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean += ly[i] - exponent * lx[i];
        my += ly[i];
    }
    mean /= n;
    my /= n;
    double ssr = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - mean - exponent * lx[i];
        ssr += r * r;
        syy += (ly[i] - my) * (ly[i] - my);
    }
    PowerFit f;
    f.exponent = exponent;
    f.coefficient = std::exp(mean);
    f.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ssr / syy) : 1.0;
    f.window = window;
    f.n_points = n;
    f.pinned = true;
    return f;
}

}  // namespace epw
