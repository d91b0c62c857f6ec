#pragma once

// Critical traveling speeds c_kappa (kappa > 0) and c_0, the center density
// rho_hat, and the speed-gap table used to check c_0 - c_kappa = O(sqrt(kappa)).

#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "epw/error.hpp"
#include "epw/roots.hpp"

namespace epw {

inline constexpr double kDefaultSpeedTol = 1e-12;

struct SpeedResult {
    double kappa = 0.0;
    double c = 0.0;
    double residual = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    int iterations = 0;
};

struct SpeedGapRow {
    double kappa = 0.0;
    double c = 0.0;
    double residual = 0.0;
    double gap = 0.0;                  // c_0 - c_kappa
    double gap_over_sqrt_kappa = 0.0;  // (c_0 - c_kappa) / sqrt(kappa)
};

namespace detail {

inline void require_kappa(double kappa) {
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
        std::ostringstream os;
        os << "kappa must be a finite nonnegative number, got " << kappa;
        throw DomainError(os.str());
    }
}

}  // namespace detail

/// Logarithmic form of the critical-speed equation,
///   f_k(z) = k log z - k log sqrt(k) + log((z - sqrt(k))^2 + 1) - (z^2 - k)/2,
/// with the cold branch f_0(z) = log(z^2 + 1) - z^2/2 evaluated in closed form.
inline double f_log_residual(double z, double kappa) {
    detail::require_kappa(kappa);
    if (!(z > 0.0)) {
        std::ostringstream os;
        os << "f_log_residual: z must be positive, got " << z;
        throw DomainError(os.str());
    }
    if (kappa == 0.0) return std::log1p(z * z) - 0.5 * z * z;
    const double sk = std::sqrt(kappa);
    const double d = z - sk;
    return kappa * std::log(z / sk) + std::log1p(d * d) - 0.5 * (z * z - kappa);
}

inline double f_log_residual_dz(double z, double kappa) {
    detail::require_kappa(kappa);
    if (!(z > 0.0)) throw DomainError("f_log_residual_dz: z must be positive");
    if (kappa == 0.0) return 2.0 * z / (z * z + 1.0) - z;
    const double sk = std::sqrt(kappa);
    const double d = z - sk;
    return kappa / z + 2.0 * d / (d * d + 1.0) - z;
}

namespace detail {

inline SpeedResult solve_speed(double kappa, double tol) {
    if (!(tol > 0.0)) throw DomainError("speed tolerance must be positive");
    auto f = [kappa](double z) { return f_log_residual(z, kappa); };
    auto df = [kappa](double z) { return f_log_residual_dz(z, kappa); };
    // f_kappa > 0 just above the sonic speed and tends to -infinity.
    const double start = std::sqrt(1.0 + kappa) + 1e-8;
    const auto [lo, hi] = expand_bracket(f, start, 0.25);
    const RootResult r = bisect_newton(f, df, lo, hi, tol);
    if (!(std::abs(r.fx) <= tol)) {
        std::ostringstream os;
        os << "critical speed root for kappa=" << kappa << " stalled at |f|=" << std::abs(r.fx)
           << " on [" << lo << ", " << hi << "]";
        throw NumericalError(os.str());
    }
    return {kappa, r.x, r.fx, {lo, hi}, r.iterations};
}

}  // namespace detail

/// Unique root of z^2 + 1 = exp(z^2/2) on (1, inf).
inline SpeedResult solve_c0(double tol = kDefaultSpeedTol) { return detail::solve_speed(0.0, tol); }

/// Root of f_kappa on (sqrt(1+kappa), inf); the trivial root z = sqrt(kappa) is never bracketed.
inline SpeedResult solve_c_kappa(double kappa, double tol = kDefaultSpeedTol) {
    detail::require_kappa(kappa);
    if (kappa == 0.0) throw DomainError("solve_c_kappa requires kappa > 0; use solve_c0");
    return detail::solve_speed(kappa, tol);
}

/// c_kappa for any kappa >= 0.
inline SpeedResult critical_speed(double kappa, double tol = kDefaultSpeedTol) {
    detail::require_kappa(kappa);
    return kappa == 0.0 ? solve_c0(tol) : solve_c_kappa(kappa, tol);
}

/// Nontrivial zero of l(rho) = ln rho - H(rho): the center of the reduced phase plane.
/// Lies above c/sqrt(1+kappa), and below c/sqrt(kappa) when kappa > 0.
inline double solve_rho_hat(double kappa, double c, double tol = kDefaultSpeedTol) {
    detail::require_kappa(kappa);
    if (!(c > std::sqrt(1.0 + kappa))) {
        std::ostringstream os;
        os << "solve_rho_hat: need c > sqrt(1+kappa), got c=" << c << " kappa=" << kappa;
        throw DomainError(os.str());
    }
    if (!(tol > 0.0)) throw DomainError("solve_rho_hat: tolerance must be positive");
    const double c2 = c * c;
    auto l = [=](double r) { return std::log(r) - (0.5 * c2 * (1.0 - 1.0 / (r * r)) - kappa * std::log(r)); };
    auto dl = [=](double r) { return (1.0 + kappa) / r - c2 / (r * r * r); };
    const double lo = c / std::sqrt(1.0 + kappa);
    double hi = 0.0;
    if (kappa > 0.0) {
        hi = c / std::sqrt(kappa);
        if (!(l(hi) > 0.0)) {
            std::ostringstream os;
            os << "solve_rho_hat: l(c/sqrt(kappa)) = " << l(hi)
               << " is not positive; (kappa, c) is not a critical pair";
            throw DomainError(os.str());
        }
    } else {
        hi = expand_bracket(l, lo, lo).second;
    }
    const RootResult r = bisect_newton(l, dl, lo, hi, tol);
    if (!(std::abs(r.fx) <= tol)) throw NumericalError("solve_rho_hat: Newton polish stalled");
    return r.x;
}

/// Rows of (kappa, c_kappa, c_0 - c_kappa, (c_0 - c_kappa)/sqrt(kappa)) in input order.
/// Kappas must be positive and sorted in descending order.
inline std::vector<SpeedGapRow> speed_gap_scan(const std::vector<double>& kappas,
                                               double tol = kDefaultSpeedTol) {
    std::vector<SpeedGapRow> rows;
    if (kappas.empty()) return rows;
    for (std::size_t i = 0; i < kappas.size(); ++i) {
        if (!(kappas[i] > 0.0)) throw DomainError("speed_gap_scan: every kappa must be positive");
        if (i > 0 && !(kappas[i] < kappas[i - 1]))
            throw DomainError("speed_gap_scan: kappas must be strictly descending");
    }
    const double c0 = solve_c0(tol).c;
    rows.reserve(kappas.size());
    for (double k : kappas) {
        const SpeedResult s = solve_c_kappa(k, tol);
        const double gap = c0 - s.c;
        rows.push_back({k, s.c, s.residual, gap, gap / std::sqrt(k)});
    }
    return rows;
}

/// Candidate small-kappa limit of (c_0 - c_kappa)/sqrt(kappa): 2 c_0 / ((c_0^2 + 1) |f_0'(c_0)|).
inline double speed_gap_limit(double tol = kDefaultSpeedTol) {
    const double c0 = solve_c0(tol).c;
    return 2.0 * c0 / ((c0 * c0 + 1.0) * std::abs(f_log_residual_dz(c0, 0.0)));
}

}  // namespace epw
