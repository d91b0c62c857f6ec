#pragma once

// Traveling-wave algebra for the Euler-Poisson system with Boltzmann electrons.
//
// With xi = x - c t, the far-field conditions give v = c (1 - 1/rho) and
// phi = H(rho). The reduced system for (rho, E = -phi') is
//   -h(rho) rho' = E,   E' = rho - exp(H(rho)),
// which conserves Psi(rho, E) = -E^2/2 + g(rho).

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "epw/error.hpp"
#include "epw/roots.hpp"
#include "epw/speeds.hpp"

namespace epw {

/// Wave parameters and the derived peak constants.
///
/// For a critical speed (c = c_kappa) rho_star is the peak density c/sqrt(kappa),
/// or unbounded when kappa = 0. For a subcritical speed the wave is smooth and
/// rho_star is the turning density where the separatrix meets E = 0.
struct Params {
    double kappa = 0.0;
    double c = 0.0;
    bool critical = false;
    std::optional<double> rho_star;  // nullopt: unbounded (kappa = 0, critical)
    double v_star = 0.0;
    double phi_star = 0.0;
    double rho_hat = 0.0;

    [[nodiscard]] bool bounded() const { return rho_star.has_value(); }
};

struct PhasePoint {
    double rho = 1.0;
    double E = 0.0;
};

struct StationaryClassification {
    double saddle_lambda_sq = 0.0;     // closed form (c^2 - (1+kappa)) / (c^2 - kappa)
    double saddle_lambda_sq_fd = 0.0;  // from the finite-difference Jacobian at (1, 0)
    double center_location = 0.0;      // rho_hat
    double center_eigen_imag_sq = 0.0; // -lambda^2 at (rho_hat, 0); positive for a center
    double center_trace = 0.0;
    double center_det = 0.0;
};

namespace detail {

inline void require_rho(double rho, const char* who) {
    if (!(rho >= 1.0) || std::isnan(rho)) {
        std::ostringstream os;
        os << who << ": rho must be >= 1, got " << rho;
        throw DomainError(os.str());
    }
}

// q(t) = (1 - 1/t^2)/2 - ln t, so that H(rho) - H(rho*) = kappa q(rho/rho*) at a critical
// speed. Both terms are O(1 - t) and cancel; near t = 1 the power series is used instead.
inline double q_peak(double t) {
    const double w = 1.0 - t;
    if (std::abs(w) < 0.05) {
        double sum = 0.0;
        double wn = w * w;
        for (int n = 2; n < 60; ++n) {
            const double term = (1.0 / n - 0.5 * (n + 1)) * wn;
            sum += term;
            if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
            wn *= w;
        }
        return sum;
    }
    return 0.5 * (1.0 - 1.0 / (t * t)) - std::log(t);
}

}  // namespace detail

namespace detail {

// H as a function of d = rho - 1, accurate relative to d near the far-field state.
inline double H_of_d(double d, const Params& p) {
    const double r = 1.0 + d;
    return 0.5 * p.c * p.c * d * (2.0 + d) / (r * r) - p.kappa * std::log1p(d);
}

}  // namespace detail

/// phi = H(rho) = c^2/2 (1 - 1/rho^2) - kappa ln rho.
inline double H(double rho, const Params& p) {
    detail::require_rho(rho, "H");
    if (std::isinf(rho)) return p.kappa == 0.0 ? 0.5 * p.c * p.c : -std::numeric_limits<double>::infinity();
    return detail::H_of_d(rho - 1.0, p);
}

/// h = dH/drho = c^2/rho^3 - kappa/rho; vanishes exactly at rho_star for critical kappa > 0.
inline double h(double rho, const Params& p) {
    detail::require_rho(rho, "h");
    if (std::isinf(rho)) return 0.0;
    const double r3 = rho * rho * rho;
    if (p.critical && p.bounded()) {
        const double rs = *p.rho_star;
        return p.kappa * (rs - rho) * (rs + rho) / r3;
    }
    return (p.c * p.c - p.kappa * rho * rho) / r3;
}

inline double dh_drho(double rho, const Params& p) {
    detail::require_rho(rho, "dh_drho");
    return -3.0 * p.c * p.c / (rho * rho * rho * rho) + p.kappa / (rho * rho);
}

/// g(rho) = c^2/rho + kappa rho + exp(H(rho)).
inline double g(double rho, const Params& p) {
    detail::require_rho(rho, "g");
    return p.c * p.c / rho + p.kappa * rho + std::exp(H(rho, p));
}

/// phi_star - H(rho), evaluated without cancellation near the peak at critical speed.
inline double phi_deficit(double rho, const Params& p) {
    detail::require_rho(rho, "phi_deficit");
    if (p.critical && !p.bounded()) {
        if (std::isinf(rho)) return 0.0;
        return 0.5 * p.c * p.c / (rho * rho);
    }
    if (p.critical) return -p.kappa * detail::q_peak(rho / *p.rho_star);
    return p.phi_star - H(rho, p);
}

/// g(rho) - g(1): the separatrix satisfies E^2 / 2 = level_gap(rho).
///
/// The gap has a double zero at rho = 1 and, at a critical speed, another one at
/// the peak. Near 1 it is written as (rho - 1)(kappa - c^2/rho) + expm1(H). Near the
/// peak the identities g(1) = g(rho_star) (kappa > 0) or exp(c_0^2/2) = c_0^2 + 1
/// (kappa = 0) are used instead.
inline double level_gap(double rho, const Params& p) {
    detail::require_rho(rho, "level_gap");
    const double c2 = p.c * p.c;
    const double d = rho - 1.0;
    auto near_one = [&] { return d * (p.kappa - c2 / rho) + std::expm1(H(rho, p)); };
    if (p.critical && !p.bounded()) {
        if (std::isinf(rho)) return 0.0;
        if (d < 1.0) return near_one();
        return c2 / rho + (c2 + 1.0) * std::expm1(-0.5 * c2 / (rho * rho));
    }
    if (p.critical) {
        const double rs = *p.rho_star;
        const double u = rs - rho;
        if (d < u) return near_one();
        return p.kappa * u * u / rho + std::exp(p.phi_star) * std::expm1(p.kappa * detail::q_peak(rho / rs));
    }
    if (d < 1.0) return near_one();
    return g(rho, p) - g(1.0, p);
}

/// Psi(rho, E) = -E^2/2 + g(rho).
inline double first_integral(const PhasePoint& pt, const Params& p) {
    return -0.5 * pt.E * pt.E + g(pt.rho, p);
}

namespace detail {

// Reduced vector field in (d, E) with d = rho - 1; rho - exp(H) is formed as d - expm1(H)
// so that it keeps its relative accuracy next to the saddle.
inline std::array<double, 2> vector_field_d(double d, double E, const Params& p) {
    return {-E / h(1.0 + d, p), d - std::expm1(H_of_d(d, p))};
}

}  // namespace detail

/// Right-hand side of the reduced system: (rho', E') = (-E/h(rho), rho - exp(H(rho))).
inline std::array<double, 2> vector_field(const PhasePoint& pt, const Params& p) {
    detail::require_rho(pt.rho, "vector_field");
    return detail::vector_field_d(pt.rho - 1.0, pt.E, p);
}

/// Integrand of xi(rho) along the separatrix, h / sqrt(2 (g - g(1))), extended by its
/// limit sqrt(-h'(rho*) / (rho* - exp(phi*))) at the peak of a critical kappa > 0 wave.
inline double separatrix_integrand(double rho, const Params& p) {
    if (p.critical && p.bounded() && rho == *p.rho_star) {
        const double rs = *p.rho_star;
        return std::sqrt(-dh_drho(rs, p) / (rs - std::exp(p.phi_star)));
    }
    const double gap = level_gap(rho, p);
    if (!(gap > 0.0)) {
        std::ostringstream os;
        os << "separatrix_integrand: g(rho) - g(1) = " << gap << " is not positive at rho=" << rho;
        throw NumericalError(os.str());
    }
    return h(rho, p) / std::sqrt(2.0 * gap);
}

namespace detail {

// Density where the separatrix of a subcritical wave returns to E = 0.
inline double turning_density(double kappa, double c, double rho_hat) {
    Params tmp;
    tmp.kappa = kappa;
    tmp.c = c;
    auto gap = [&](double r) { return g(r, tmp) - g(1.0, tmp); };
    double hi = 0.0;
    if (kappa > 0.0) {
        hi = c / std::sqrt(kappa);
    } else {
        hi = expand_bracket(gap, rho_hat, rho_hat).second;
    }
    if (!(gap(hi) < 0.0)) throw DomainError("turning_density: no return to E = 0 below c/sqrt(kappa)");
    return bisect(gap, rho_hat, hi, 1e-15 * hi);
}

}  // namespace detail

/// Parameters at the critical speed c_kappa.
inline Params critical_params(double kappa, double tol = kDefaultSpeedTol) {
    const SpeedResult s = critical_speed(kappa, tol);
    Params p;
    p.kappa = kappa;
    p.c = s.c;
    p.critical = true;
    p.rho_hat = solve_rho_hat(kappa, s.c, tol);
    if (kappa == 0.0) {
        p.rho_star.reset();
        p.v_star = s.c;
        p.phi_star = 0.5 * s.c * s.c;
    } else {
        const double rs = s.c / std::sqrt(kappa);
        p.rho_star = rs;
        p.v_star = s.c - std::sqrt(kappa);
        p.phi_star = 0.5 * s.c * s.c * (1.0 - 1.0 / (rs * rs)) - kappa * std::log(rs);
    }
    return p;
}

/// Parameters for a smooth solitary wave, sqrt(1+kappa) < c < c_kappa.
inline Params smooth_params(double kappa, double c) {
    detail::require_kappa(kappa);
    if (!(c > std::sqrt(1.0 + kappa))) {
        std::ostringstream os;
        os << "smooth_params: c=" << c << " is not supersonic (need c > " << std::sqrt(1.0 + kappa) << ")";
        throw DomainError(os.str());
    }
    if (!(f_log_residual(c, kappa) > 0.0)) {
        std::ostringstream os;
        os << "smooth_params: c=" << c << " is not below the critical speed for kappa=" << kappa;
        throw DomainError(os.str());
    }
    Params p;
    p.kappa = kappa;
    p.c = c;
    p.critical = false;
    p.rho_hat = solve_rho_hat(kappa, c, 1e-13);
    const double rt = detail::turning_density(kappa, c, p.rho_hat);
    p.rho_star = rt;
    p.v_star = c * (1.0 - 1.0 / rt);
    p.phi_star = H(rt, p);
    return p;
}

/// Inverse of H on the branch [1, c/sqrt(kappa)] where H is increasing.
/// Closed form rho = c / sqrt(c^2 - 2 phi) when kappa = 0.
inline double H_inverse(double phi, const Params& p, double tol = 1e-13) {
    const double c2 = p.c * p.c;
    if (p.kappa == 0.0) {
        if (!(phi >= 0.0 && phi < 0.5 * c2)) {
            std::ostringstream os;
            os << "H_inverse: phi=" << phi << " outside [0, " << 0.5 * c2 << ")";
            throw DomainError(os.str());
        }
        return p.c / std::sqrt(c2 - 2.0 * phi);
    }
    const double rmax = p.c / std::sqrt(p.kappa);
    const double phimax = H(rmax, p);
    if (!(phi >= 0.0 && phi <= phimax)) {
        std::ostringstream os;
        os << "H_inverse: phi=" << phi << " outside [0, " << phimax << "]";
        throw DomainError(os.str());
    }
    if (phi == 0.0) return 1.0;
    if (phi == phimax) return rmax;
    // H_kappa < H_0 on (1, inf), so the cold closed form is a lower bracket end.
    double lo = 1.0;
    if (phi < 0.5 * c2) lo = std::max(1.0, std::min(rmax, p.c / std::sqrt(c2 - 2.0 * phi)));
    auto f = [&](double r) { return H(r, p) - phi; };
    auto df = [&](double r) { return h(r, p); };
    if (f(lo) >= 0.0) return lo;
    const RootResult r = bisect_newton(f, df, lo, rmax, tol, 1e-6 * (rmax - lo));
    return r.x;
}

/// Jacobian of the reduced vector field, analytic form.
inline std::array<std::array<double, 2>, 2> jacobian(const PhasePoint& pt, const Params& p) {
    const double hv = h(pt.rho, p);
    return {{{pt.E / (hv * hv) * dh_drho(pt.rho, p), -1.0 / hv},
             {1.0 - hv * std::exp(H(pt.rho, p)), 0.0}}};
}

/// Central-difference Jacobian with relative step `rel_step`.
inline std::array<std::array<double, 2>, 2> jacobian_fd(const PhasePoint& pt, const Params& p,
                                                        double rel_step = 1e-6) {
    const double dr = rel_step * std::max(1.0, std::abs(pt.rho));
    const double dE = rel_step * std::max(1.0, std::abs(pt.E));
    const auto fr_p = vector_field({pt.rho + dr, pt.E}, p);
    const auto fr_m = vector_field({pt.rho - dr, pt.E}, p);
    const auto fE_p = vector_field({pt.rho, pt.E + dE}, p);
    const auto fE_m = vector_field({pt.rho, pt.E - dE}, p);
    std::array<std::array<double, 2>, 2> J{};
    for (int i = 0; i < 2; ++i) {
        J[i][0] = (fr_p[i] - fr_m[i]) / (2.0 * dr);
        J[i][1] = (fE_p[i] - fE_m[i]) / (2.0 * dE);
    }
    return J;
}

/// Saddle at (1, 0) and center at (rho_hat, 0), each checked against a
/// finite-difference Jacobian.
inline StationaryClassification classify_stationary(const Params& p) {
    StationaryClassification out;
    const double c2 = p.c * p.c;
    out.saddle_lambda_sq = (c2 - (1.0 + p.kappa)) / (c2 - p.kappa);
    if (!(out.saddle_lambda_sq > 0.0)) throw NumericalError("classify_stationary: (1,0) is not a saddle");

    // (1, 0) sits on the edge of rho >= 1, but the field is smooth across it: difference
    // the (d, E) form centrally about d = 0.
    auto field = [&p](double d, double E) -> std::array<double, 2> {
        const double r = 1.0 + d;
        return {-E / (p.c * p.c / (r * r * r) - p.kappa / r), d - std::expm1(detail::H_of_d(d, p))};
    };
    constexpr double step = 1e-6;
    std::array<std::array<double, 2>, 2> Js{};
    {
        const auto a = field(step, 0.0), b = field(-step, 0.0), c = field(0.0, step), e = field(0.0, -step);
        for (int i = 0; i < 2; ++i) {
            Js[i][0] = (a[i] - b[i]) / (2.0 * step);
            Js[i][1] = (c[i] - e[i]) / (2.0 * step);
        }
    }
    const double tr_s = Js[0][0] + Js[1][1];
    const double det_s = Js[0][0] * Js[1][1] - Js[0][1] * Js[1][0];
    const double disc = 0.25 * tr_s * tr_s - det_s;
    if (!(disc > 0.0)) throw NumericalError("classify_stationary: finite-difference Jacobian at (1,0) is not hyperbolic");
    const double lam = 0.5 * tr_s + std::sqrt(disc);
    out.saddle_lambda_sq_fd = lam * lam;

    out.center_location = p.rho_hat;
    const auto Jc = jacobian_fd({p.rho_hat, 0.0}, p);
    out.center_trace = Jc[0][0] + Jc[1][1];
    out.center_det = Jc[0][0] * Jc[1][1] - Jc[0][1] * Jc[1][0];
    if (std::abs(out.center_det) < 1e-12) throw NumericalError("classify_stationary: degenerate Jacobian at the center");
    out.center_eigen_imag_sq = out.center_det - 0.25 * out.center_trace * out.center_trace;
    return out;
}

/// Linear dispersion relation about (1, 0, 0): omega = +/- k sqrt(kappa + 1/(1 + k^2)).
inline std::pair<double, double> dispersion(double k, double kappa) {
    detail::require_kappa(kappa);
    const double w = k * std::sqrt(kappa + 1.0 / (1.0 + k * k));
    return {w, -w};
}

struct SandwichMeasure {
    double M = 2.0;
    double min_ratio = 0.0;  // min of H^{-1}(phi) sqrt(phi* - phi)
    double max_ratio = 0.0;
    double N = 0.0;          // smallest N with N^{-1} <= ratio <= N on the sampled range
};

/// Samples H^{-1}(phi) sqrt(phi* - phi) for phi in (0, H(rho*/M)) on a critical kappa > 0 wave.
inline SandwichMeasure measure_sandwich(const Params& p, double M = 2.0, int samples = 1000) {
    if (!p.critical || !p.bounded()) throw DomainError("measure_sandwich: needs a critical kappa > 0 wave");
    if (!(M >= 2.0)) throw DomainError("measure_sandwich: M must be >= 2");
    const double rs = *p.rho_star;
    if (!(rs / M > 1.0)) throw DomainError("measure_sandwich: rho*/M must exceed 1");
    const double top = H(rs / M, p);
    SandwichMeasure out;
    out.M = M;
    out.min_ratio = std::numeric_limits<double>::infinity();
    out.max_ratio = 0.0;
    for (int i = 1; i < samples; ++i) {
        const double phi = top * static_cast<double>(i) / samples;
        const double ratio = H_inverse(phi, p) * std::sqrt(p.phi_star - phi);
        out.min_ratio = std::min(out.min_ratio, ratio);
        out.max_ratio = std::max(out.max_ratio, ratio);
    }
    out.N = std::max(out.max_ratio, 1.0 / out.min_ratio);
    return out;
}

struct PhaseRow {
    double rho, H, h, g, E_separatrix;
};

/// Rows for plotting the reduced phase plane: H, h, g and the separatrix E < 0 branch.
inline std::vector<PhaseRow> phase_table(const Params& p, int n, double rho_max_unbounded = 50.0) {
    if (n < 2) throw DomainError("phase_table: need at least two grid points");
    const double top = p.bounded() ? *p.rho_star : rho_max_unbounded;
    std::vector<PhaseRow> rows;
    rows.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double r = 1.0 + (top - 1.0) * static_cast<double>(i) / (n - 1);
        const double gap = level_gap(r, p);
        const double E = gap >= 0.0 ? -std::sqrt(2.0 * gap) : std::numeric_limits<double>::quiet_NaN();
        rows.push_back({r, H(r, p), h(r, p), g(r, p), E});
    }
    return rows;
}

}  // namespace epw
