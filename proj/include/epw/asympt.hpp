#pragma once

// Checks on sampled waves: near-peak power laws, the transition layer around the
// peak for small kappa, and norms of kappa-wave minus cold-wave differences.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "epw/error.hpp"
#include "epw/parallel.hpp"
#include "epw/powerfit.hpp"
#include "epw/roots.hpp"
#include "epw/shooter.hpp"
#include "epw/wavealg.hpp"

namespace epw {

inline constexpr std::pair<double, double> kDefaultFitWindow{1e-5, 1e-3};

/// A_0 = (1/2) (3 sqrt(c_0 / 2))^{4/3}.
inline double cold_peak_constant(double c0) { return 0.5 * std::pow(3.0 * std::sqrt(c0 / 2.0), 4.0 / 3.0); }

struct PeakFitRow {
    std::string quantity;
    PowerFit free_fit;
    PowerFit pinned_fit;  // exponent held at the target, coefficient fitted
    double target_exponent = 0.0;
    double target_coefficient = 0.0;
    double exponent_error = 0.0;          // |free exponent - target|
    double coefficient_rel_error = 0.0;   // |pinned coefficient / target - 1|
    bool exponent_ok = false;
    bool coefficient_ok = false;
};

struct PeakReport {
    double kappa = 0.0;
    double c = 0.0;
    std::pair<double, double> window{0.0, 0.0};
    double exponent_tol = 0.0;
    double coefficient_tol = 0.0;
    std::vector<PeakFitRow> rows;
    [[nodiscard]] bool ok() const {
        return std::all_of(rows.begin(), rows.end(), [](const PeakFitRow& r) { return r.exponent_ok && r.coefficient_ok; });
    }
};

namespace detail {

inline void right_half(const WaveProfile& w, std::vector<double>& xi, std::vector<std::size_t>& idx) {
    for (std::size_t i = w.peak_index + 1; i < w.xi.size(); ++i) {
        xi.push_back(w.xi[i]);
        idx.push_back(i);
    }
}

inline PeakFitRow peak_row(const std::string& name, const std::vector<double>& xi, const std::vector<double>& y,
                           std::pair<double, double> window, double p_target, double c_target, double etol,
                           double ctol) {
    PeakFitRow r;
    r.quantity = name;
    r.free_fit = fit_power(xi, y, window);
    r.pinned_fit = fit_power_pinned(xi, y, window, p_target);
    r.target_exponent = p_target;
    r.target_coefficient = c_target;
    r.exponent_error = std::abs(r.free_fit.exponent - p_target);
    r.coefficient_rel_error = std::abs(r.pinned_fit.coefficient / c_target - 1.0);
    r.exponent_ok = r.exponent_error <= etol;
    r.coefficient_ok = r.coefficient_rel_error <= ctol;
    return r;
}

inline void require_resolution(const WaveProfile& w, std::pair<double, double> window) {
    const double first = w.xi[w.peak_index + 1];
    if (first > window.first) {
        std::ostringstream os;
        os << "peak fit: first grid point at xi=" << first << " does not resolve the window start " << window.first;
        throw DomainError(os.str());
    }
}

}  // namespace detail

/// kappa = 0: fits phi* - phi ~ A_0 xi^{4/3}, |phi'| ~ (4/3) A_0 xi^{1/3},
/// rho ~ (4/9) A_0 xi^{-2/3} and v* - v ~ sqrt(2 A_0) xi^{2/3} on xi > 0.
inline PeakReport verify_peak_cold(const WaveProfile& w, std::pair<double, double> window = kDefaultFitWindow,
                                   double exponent_tol = 0.02, double coefficient_tol = 0.02) {
    const Params& p = w.params;
    if (p.kappa != 0.0 || !p.critical) throw DomainError("verify_peak_cold: needs the critical kappa = 0 wave");
    detail::require_resolution(w, window);
    std::vector<double> xi;
    std::vector<std::size_t> idx;
    detail::right_half(w, xi, idx);
    std::vector<double> dphi, dphi1, rho, dv;
    for (std::size_t i : idx) {
        dphi.push_back(w.phi_deficit[i]);
        dphi1.push_back(std::abs(w.E[i]));
        rho.push_back(w.rho[i]);
        dv.push_back(p.c / w.rho[i]);  // v* - v = c / rho
    }
    const double A0 = cold_peak_constant(p.c);
    PeakReport rep;
    rep.kappa = 0.0;
    rep.c = p.c;
    rep.window = window;
    rep.exponent_tol = exponent_tol;
    rep.coefficient_tol = coefficient_tol;
    rep.rows.push_back(detail::peak_row("phi_star_minus_phi", xi, dphi, window, 4.0 / 3.0, A0, exponent_tol, coefficient_tol));
    rep.rows.push_back(detail::peak_row("abs_dphi", xi, dphi1, window, 1.0 / 3.0, 4.0 / 3.0 * A0, exponent_tol, coefficient_tol));
    rep.rows.push_back(detail::peak_row("rho", xi, rho, window, -2.0 / 3.0, 4.0 / 9.0 * A0, exponent_tol, coefficient_tol));
    rep.rows.push_back(detail::peak_row("v_star_minus_v", xi, dv, window, 2.0 / 3.0, std::sqrt(2.0 * A0), exponent_tol, coefficient_tol));
    return rep;
}

struct IsothermalPeakTargets {
    double phi_quadratic = 0.0;  // (rho* - e^{phi*}) / 2
    double rho_slope = 0.0;      // sqrt((rho* - e^{phi*}) / (-h'(rho*)))
    double v_slope = 0.0;        // c / rho*^2 * rho_slope
    double phi_second = 0.0;     // -phi''(0) = rho* - e^{phi*}
};

inline IsothermalPeakTargets isothermal_targets(const Params& p) {
    if (!p.critical || !p.bounded()) throw DomainError("isothermal_targets: needs a critical kappa > 0 wave");
    const double rs = *p.rho_star;
    const double gap = rs - std::exp(p.phi_star);
    IsothermalPeakTargets t;
    t.phi_quadratic = 0.5 * gap;
    t.rho_slope = std::sqrt(gap / (-dh_drho(rs, p)));
    t.v_slope = p.c / (rs * rs) * t.rho_slope;
    t.phi_second = gap;
    return t;
}

/// kappa > 0: fits phi* - phi ~ (rho* - e^{phi*})/2 xi^2 and the one-sided linear
/// slopes of rho* - rho and v* - v on xi > 0. The last row is -phi''(0) read off the
/// quadratic coefficient.
inline PeakReport verify_peak_isothermal(const WaveProfile& w, std::pair<double, double> window = kDefaultFitWindow,
                                         double exponent_tol = 0.02, double coefficient_tol = 0.01) {
    const Params& p = w.params;
    if (!(p.kappa > 0.0) || !p.critical) throw DomainError("verify_peak_isothermal: needs a critical kappa > 0 wave");
    detail::require_resolution(w, window);
    const double rs = *p.rho_star;
    std::vector<double> xi;
    std::vector<std::size_t> idx;
    detail::right_half(w, xi, idx);
    std::vector<double> dphi, drho, dv;
    for (std::size_t i : idx) {
        dphi.push_back(w.phi_deficit[i]);
        const double d = rs - w.rho[i];
        drho.push_back(d);
        dv.push_back(p.c * d / (w.rho[i] * rs));  // v* - v = c (rho* - rho) / (rho rho*)
    }
    const IsothermalPeakTargets t = isothermal_targets(p);
    PeakReport rep;
    rep.kappa = p.kappa;
    rep.c = p.c;
    rep.window = window;
    rep.exponent_tol = exponent_tol;
    rep.coefficient_tol = coefficient_tol;
    rep.rows.push_back(detail::peak_row("phi_star_minus_phi", xi, dphi, window, 2.0, t.phi_quadratic, exponent_tol, coefficient_tol));
    rep.rows.push_back(detail::peak_row("rho_star_minus_rho", xi, drho, window, 1.0, t.rho_slope, exponent_tol, coefficient_tol));
    rep.rows.push_back(detail::peak_row("v_star_minus_v", xi, dv, window, 1.0, t.v_slope, exponent_tol, coefficient_tol));
    PeakFitRow second = rep.rows.front();
    second.quantity = "minus_phi_second_at_peak";
    second.free_fit.coefficient *= 2.0;
    second.pinned_fit.coefficient *= 2.0;
    second.target_coefficient = t.phi_second;
    rep.rows.push_back(second);
    return rep;
}

/// Half-length of I_kappa: the xi > 0 where phi = H(rho* / M), i.e. rho = rho* / M.
/// Located on the grid, then refined by bisection on a cubic Hermite interpolant
/// using rho' = -E / h(rho).
inline double transition_thickness(const WaveProfile& w, double M = 2.0) {
    const Params& p = w.params;
    if (!(p.kappa > 0.0) || !p.critical) throw DomainError("transition_thickness: needs a critical kappa > 0 wave");
    if (!(M >= 2.0) || !std::isfinite(M)) throw DomainError("transition_thickness: M must be >= 2");
    const double target = *p.rho_star / M;
    if (!(target > 1.0)) throw DomainError("transition_thickness: rho*/M must exceed 1");
    std::size_t j = w.peak_index;
    while (j + 1 < w.xi.size() && w.rho[j + 1] > target) ++j;
    if (j + 1 >= w.xi.size()) throw DomainError("transition_thickness: rho never drops to rho*/M on the grid");
    const std::size_t k = j + 1;
    auto slope = [&](std::size_t i) { return -w.E[i] / h(w.rho[i], p); };
    auto f = [&](double x) {
        const double hs = w.xi[k] - w.xi[j];
        const double t = (x - w.xi[j]) / hs;
        const double t2 = t * t, t3 = t2 * t;
        const double val = (2 * t3 - 3 * t2 + 1) * w.rho[j] + (t3 - 2 * t2 + t) * hs * slope(j) +
                           (-2 * t3 + 3 * t2) * w.rho[k] + (t3 - t2) * hs * slope(k);
        return val - target;
    };
    return bisect(f, w.xi[j], w.xi[k], 1e-15 * w.xi[k]);
}

struct ThicknessRow {
    double kappa = 0.0;
    double thickness = 0.0;
    double over_k34 = 0.0;  // thickness / kappa^{3/4}
};

struct ThicknessScan {
    double M = 2.0;
    std::vector<ThicknessRow> rows;
    LineFit loglog;  // log thickness against log kappa
};

inline ThicknessScan thickness_scan(const std::vector<double>& kappas, double M = 2.0, const ShootOptions& opt = {},
                                    const GridSpec& grid = {}, unsigned threads = 0) {
    ThicknessScan out;
    out.M = M;
    const auto th = parallel_map(
        kappas, [&](double k) { return transition_thickness(shoot_wave(critical_params(k), opt, grid), M); }, threads);
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < kappas.size(); ++i) {
        out.rows.push_back({kappas[i], th[i], th[i] / std::pow(kappas[i], 0.75)});
        lx.push_back(std::log(kappas[i]));
        ly.push_back(std::log(th[i]));
    }
    if (kappas.size() >= 2) out.loglog = fit_line(lx, ly);
    return out;
}

/// Discrete Holder seminorm sup |f_i - f_j| / |xi_i - xi_j|^alpha over all pairs
/// with |xi_i - xi_j| <= near, plus, for each i, the pairs at distances 2^k near
/// (k >= 1) using the first grid point at or beyond xi_i + 2^k near.
inline double holder_seminorm(const std::vector<double>& xi, const std::vector<double>& f, double alpha,
                              double near = 1.0) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("holder_seminorm: alpha must lie in (0, 1)");
    if (xi.size() != f.size()) throw DomainError("holder_seminorm: xi and f differ in length");
    const std::size_t n = xi.size();
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = i + 1;
        for (; j < n && xi[j] - xi[i] <= near; ++j) {
            const double q = std::abs(f[j] - f[i]) / std::pow(xi[j] - xi[i], alpha);
            if (q > best) best = q;
        }
        for (double d = 2.0 * near; xi[i] + d <= xi.back(); d *= 2.0) {
            const auto it = std::lower_bound(xi.begin() + static_cast<std::ptrdiff_t>(i), xi.end(), xi[i] + d);
            if (it == xi.end()) break;
            const std::size_t k = static_cast<std::size_t>(it - xi.begin());
            const double q = std::abs(f[k] - f[i]) / std::pow(xi[k] - xi[i], alpha);
            if (q > best) best = q;
        }
    }
    return best;
}

inline double sup_norm(const std::vector<double>& f) {
    double m = 0.0;
    for (double x : f) m = std::max(m, std::abs(x));
    return m;
}

/// C^alpha norm: sup |f| + [f]_alpha.
inline double holder_norm(const std::vector<double>& xi, const std::vector<double>& f, double alpha) {
    return sup_norm(f) + holder_seminorm(xi, f, alpha);
}

/// C^{1,alpha} norm: sup |f| + sup |f'| + [f']_alpha, with f' supplied by the caller.
inline double holder_norm_c1(const std::vector<double>& xi, const std::vector<double>& f,
                             const std::vector<double>& fprime, double alpha) {
    return sup_norm(f) + sup_norm(fprime) + holder_seminorm(xi, fprime, alpha);
}

/// || rho_kappa - rho_0 ||_{L^p} over the grid. Trapezoid rule away from the peak;
/// on the two cells touching xi = 0 the cold density is continued as
/// rho_0(xi_1) (|xi| / xi_1)^{-2/3} and the cell integral is done by adaptive
/// quadrature after xi = xi_1 t^m, which removes the endpoint singularity.
inline double lp_norm_rho_difference(const WaveProfile& wk, const WaveProfile& w0, double p) {
    if (!(p >= 1.0 && p < 1.5)) throw DomainError("lp_norm_rho_difference: p must lie in [1, 3/2)");
    if (wk.xi != w0.xi) throw DomainError("lp_norm_rho_difference: profiles are on mismatched grids");
    const std::size_t n = wk.xi.size();
    const std::size_t pk = wk.peak_index;
    double total = 0.0;
    auto val = [&](std::size_t i) { return std::pow(std::abs(wk.rho[i] - w0.rho[i]), p); };
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (i + 1 == pk || i == pk) continue;
        total += 0.5 * (wk.xi[i + 1] - wk.xi[i]) * (val(i) + val(i + 1));
    }
    const double m = std::ceil(2.0 / (1.0 - 2.0 * p / 3.0));
    for (std::size_t side : {pk - 1, pk + 1}) {
        const double x1 = std::abs(wk.xi[side]);
        const double r0_1 = w0.rho[side];
        const double rk0 = wk.rho[pk];
        const double rk1 = wk.rho[side];
        auto integrand = [&](double t) {
            if (t <= 0.0) return 0.0;
            const double s = std::pow(t, m);  // xi / xi_1
            const double r0 = r0_1 * std::pow(s, -2.0 / 3.0);
            const double rk = rk0 + (rk1 - rk0) * s;
            return std::pow(std::abs(r0 - rk), p) * x1 * m * std::pow(t, m - 1.0);
        };
        double err = 0.0;
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 15, 1e-12, &err);
    }
    return std::pow(total, 1.0 / p);
}

struct ConvergenceRow {
    double kappa = 0.0;
    std::string norm_name;  // C1alpha | Calpha_seminorm | Lp | Cbeta
    double alpha_or_p = 0.0;
    double value = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    std::string pair_set = "all pairs with |xi_i - xi_j| <= 1, plus for each i the first grid point beyond xi_i + 2^k, k >= 1";
    std::string grid;
    double witness_floor = 0.0;  // 0.9 (4/3) A_0
};

/// Norms of the kappa-wave minus cold-wave differences on a shared grid:
/// C^{1,alpha} of phi, L^p of rho, C^beta of v, and the C^{1,1/3} seminorm of phi,
/// which is not expected to vanish as kappa -> 0.
inline ConvergenceReport cold_limit_report(const std::vector<WaveProfile>& waves, const WaveProfile& cold,
                                           const std::vector<double>& alphas, const std::vector<double>& betas,
                                           const std::vector<double>& ps) {
    if (cold.params.kappa != 0.0) throw DomainError("cold_limit_report: reference wave must have kappa = 0");
    ConvergenceReport rep;
    rep.witness_floor = 0.9 * 4.0 / 3.0 * cold_peak_constant(cold.params.c);
    {
        std::ostringstream os;
        os << cold.xi.size() << " points, |xi| in [" << cold.xi[cold.peak_index + 1] << ", " << cold.xi.back() << "]";
        rep.grid = os.str();
    }
    for (const WaveProfile& w : waves) {
        if (w.xi != cold.xi) throw DomainError("cold_limit_report: profiles are on mismatched grids");
        const std::size_t n = w.xi.size();
        std::vector<double> dphi(n), ddphi(n), dv(n);
        for (std::size_t i = 0; i < n; ++i) {
            dphi[i] = w.phi[i] - cold.phi[i];
            ddphi[i] = -(w.E[i] - cold.E[i]);  // phi' = -E
            dv[i] = w.v[i] - cold.v[i];
        }
        const double k = w.params.kappa;
        for (double a : alphas) rep.rows.push_back({k, "C1alpha", a, holder_norm_c1(w.xi, dphi, ddphi, a)});
        rep.rows.push_back({k, "Calpha_seminorm", 1.0 / 3.0, holder_seminorm(w.xi, ddphi, 1.0 / 3.0)});
        for (double p : ps) rep.rows.push_back({k, "Lp", p, lp_norm_rho_difference(w, cold, p)});
        for (double b : betas) rep.rows.push_back({k, "Cbeta", b, holder_norm(w.xi, dv, b)});
    }
    return rep;
}

/// Shoots the waves for each kappa and kappa = 0 on one grid, then builds the report.
inline ConvergenceReport cold_limit_sweep(const std::vector<double>& kappas, const std::vector<double>& alphas,
                                          const std::vector<double>& betas, const std::vector<double>& ps,
                                          const ShootOptions& opt = {}, const GridSpec& grid = {},
                                          unsigned threads = 0) {
    std::vector<double> all = kappas;
    all.push_back(0.0);
    auto waves = parallel_map(all, [&](double k) { return shoot_wave(critical_params(k), opt, grid); }, threads);
    const WaveProfile cold = waves.back();
    waves.pop_back();
    return cold_limit_report(waves, cold, alphas, betas, ps);
}

struct ScalingBand {
    double eps0 = 0.0;
    double i_half_length = 0.0;  // half-length of I_kappa
    double j_half_length = 0.0;  // half-length of J_kappa = {psi <= eps0}
    double min_ratio = 0.0;      // psi / xi^{4/3} on (J \ I) with xi > 0
    double max_ratio = 0.0;
    std::size_t n_points = 0;
};

/// psi = phi* - phi over xi^{4/3} between the edge of I_kappa and the edge of J_kappa.
inline ScalingBand scaling_band(const WaveProfile& w, double M, double eps0) {
    const Params& p = w.params;
    if (!(p.kappa > 0.0) || !p.critical) throw DomainError("scaling_band: needs a critical kappa > 0 wave");
    if (!(eps0 > 0.0)) throw DomainError("scaling_band: eps0 must be positive");
    ScalingBand b;
    b.eps0 = eps0;
    const double i_level = phi_deficit(*p.rho_star / M, p);
    b.min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = w.peak_index + 1; i < w.xi.size(); ++i) {
        const double psi = w.phi_deficit[i];
        if (psi <= i_level) b.i_half_length = w.xi[i];
        if (psi > eps0) break;
        b.j_half_length = w.xi[i];
        if (psi <= i_level) continue;
        const double r = psi / std::pow(w.xi[i], 4.0 / 3.0);
        b.min_ratio = std::min(b.min_ratio, r);
        b.max_ratio = std::max(b.max_ratio, r);
        ++b.n_points;
    }
    if (b.n_points == 0) b.min_ratio = 0.0;
    return b;
}

/// xi > 0 where rho = rho_hat: the inflection point of phi (E' = 0).
inline double inflection_point(const WaveProfile& w) {
    const double rh = w.params.rho_hat;
    for (std::size_t i = w.peak_index; i + 1 < w.xi.size(); ++i) {
        if (w.rho[i] >= rh && w.rho[i + 1] < rh) {
            const double t = (w.rho[i] - rh) / (w.rho[i] - w.rho[i + 1]);
            return w.xi[i] + t * (w.xi[i + 1] - w.xi[i]);
        }
    }
    throw DomainError("inflection_point: rho does not cross rho_hat on xi > 0");
}

struct TailDecay {
    double rate = 0.0;        // N in |rho - 1| ~ C exp(-N xi)
    double saddle_rate = 0.0; // sqrt of the saddle eigenvalue squared, for comparison
    double r_squared = 0.0;
};

/// Exponential decay rate of rho - 1 on lo <= xi <= hi.
inline TailDecay tail_decay_rate(const WaveProfile& w, double lo = 5.0, double hi = 15.0) {
    std::vector<double> x, y;
    for (std::size_t i = w.peak_index + 1; i < w.xi.size(); ++i) {
        if (w.xi[i] < lo || w.xi[i] > hi) continue;
        const double d = w.rho[i] - 1.0;
        if (!(d > 0.0)) continue;
        x.push_back(w.xi[i]);
        y.push_back(std::log(d));
    }
    if (x.size() < 3) throw DomainError("tail_decay_rate: too few points in the tail window");
    const LineFit lf = fit_line(x, y);
    const double c2 = w.params.c * w.params.c;
    return {-lf.slope, std::sqrt((c2 - (1.0 + w.params.kappa)) / (c2 - w.params.kappa)), lf.r_squared};
}

}  // namespace epw
