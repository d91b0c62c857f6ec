#pragma once

// Peaked solitary waves by shooting along the unstable manifold of (1, 0).
//
// The left half is integrated in xi until rho is within a small distance of the
// peak. The rest, where h(rho) and E vanish together, is done in the quadrature
// form xi(rho) = -int_rho^peak h / sqrt(2 (g - g(1))) drho. For kappa = 0 the
// peak is at rho = infinity and the last stretch beyond rho_max is an
// asymptotic series.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "epw/error.hpp"
#include "epw/roots.hpp"
#include "epw/wavealg.hpp"

namespace epw {

struct ShootOptions {
    double delta = 1e-8;             // distance of the seed from (1, 0)
    double tol = 1e-10;              // relative step tolerance of the integrator
    double switch_fraction = 0.01;   // kappa > 0: leave the xi-form this close to rho*, relative to rho* - 1
    double cold_switch_rho = 100.0;  // kappa = 0: leave the xi-form here
    double cold_rho_max = 1e4;       // kappa = 0: quadrature up to here, asymptotic tail beyond
    double max_step = 0.05;          // cap on the xi step, keeps the Hermite resampling accurate
    int peak_panels = 64;
    long max_steps = 2000000;
};

/// Symmetric sampling grid: `n` points log-spaced in |xi| on [xi_min, xi_max] on each side, plus 0.
struct GridSpec {
    int n = 2000;
    double xi_min = 1e-6;
    double xi_max = 20.0;
};

inline std::vector<double> make_grid(const GridSpec& spec) {
    if (spec.n < 2 || !(spec.xi_min > 0.0) || !(spec.xi_max > spec.xi_min))
        throw DomainError("make_grid: need n >= 2 and 0 < xi_min < xi_max");
    std::vector<double> pos(spec.n);
    const double a = std::log(spec.xi_min);
    const double b = std::log(spec.xi_max);
    for (int i = 0; i < spec.n; ++i) pos[i] = std::exp(a + (b - a) * i / (spec.n - 1));
    pos.front() = spec.xi_min;
    pos.back() = spec.xi_max;
    std::vector<double> xi;
    xi.reserve(2 * spec.n + 1);
    for (int i = spec.n - 1; i >= 0; --i) xi.push_back(-pos[i]);
    xi.push_back(0.0);
    for (double x : pos) xi.push_back(x);
    return xi;
}

/// Left half of the orbit. Samples from the xi-form are kept on the internal
/// clock shifted so that the peak sits at xi = 0.
struct HalfOrbit {
    Params params;
    double tol = 0.0;
    double delta = 0.0;
    std::vector<double> xi, rho, E, drho, dE, d2rho, d2E;

    double xi_switch = 0.0;  // end of the xi-form samples
    double rho_switch = 0.0;
    double terminal_rho = 0.0;  // rho* (kappa > 0), rho at the turning point (smooth) or +inf (kappa = 0)
    double terminal_E = 0.0;
    double max_drift = 0.0;     // max |Psi - g(1)| / g(1) on the xi-form samples
    long steps = 0;

    // Quadrature stretch: nodes in y (y = rho for kappa > 0, y = ln rho for kappa = 0)
    // with the remaining distance to the peak at each node.
    bool has_peak_segment = false;
    bool log_variable = false;
    std::vector<double> seg_y, seg_s;
    double tail_rho = 0.0;  // kappa = 0: rho beyond which the asymptotic tail is used
};

struct WaveProfile {
    std::vector<double> xi, rho, v, phi, E;
    std::vector<double> phi_deficit;  // phi_star - phi without cancellation near the peak
    Params params;
    double solver_tol = 0.0;
    std::size_t peak_index = 0;
    double max_drift = 0.0;  // max over the grid of |Psi(rho, E) - g(1)| / g(1)
    double terminal_rho = 0.0;
};

/// (1, 0) + delta w, w the unit eigenvector for lambda = +sqrt((c^2 - (1+kappa))/(c^2 - kappa)),
/// oriented into rho > 1, E < 0.
inline PhasePoint unstable_seed(const Params& p, double delta = 1e-8) {
    if (!(delta > 0.0)) throw DomainError("unstable_seed: delta must be positive");
    const double c2 = p.c * p.c;
    const double lam2 = (c2 - (1.0 + p.kappa)) / (c2 - p.kappa);
    if (!(lam2 > 0.0)) throw DomainError("unstable_seed: (1,0) is not a saddle for these parameters");
    const double lam = std::sqrt(lam2);
    const double w0 = 1.0;
    const double w1 = -lam * h(1.0, p);
    const double nrm = std::hypot(w0, w1);
    return {1.0 + delta * w0 / nrm, delta * w1 / nrm};
}

namespace detail {

using State2 = std::array<double, 2>;

// kappa = 0: int_R^inf h / sqrt(2 gap) drho from the large-rho expansion of the integrand.
inline double cold_tail(double R, double c) {
    const double a = c * c + 1.0;
    return c / std::sqrt(2.0) *
           (2.0 / 3.0 * std::pow(R, -1.5) + a / 4.0 * 0.4 * std::pow(R, -2.5) +
            3.0 * a * a / 32.0 * (2.0 / 7.0) * std::pow(R, -3.5));
}

inline double cold_tail_drho(double R, double c) {
    const double a = c * c + 1.0;
    return -c / std::sqrt(2.0) * (std::pow(R, -2.5) + a / 4.0 * std::pow(R, -3.5) + 3.0 * a * a / 32.0 * std::pow(R, -4.5));
}

// Quintic Hermite interpolation from values and first two derivatives at both ends.
inline double hermite5(double x0, double x1, const std::array<double, 3>& a, const std::array<double, 3>& b, double x) {
    const double hs = x1 - x0;
    const double t = (x - x0) / hs;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
    const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
    const double h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
    const double h3 = 10 * t3 - 15 * t4 + 6 * t5;
    const double h4 = -4 * t3 + 7 * t4 - 3 * t5;
    const double h5 = 0.5 * (t3 - 2 * t4 + t5);
    return h0 * a[0] + h1 * hs * a[1] + h2 * hs * hs * a[2] + h3 * b[0] + h4 * hs * b[1] + h5 * hs * hs * b[2];
}

// Integrand of the remaining distance in the segment variable.
inline double segment_integrand(double y, const Params& p, bool log_variable) {
    if (log_variable) {
        const double r = std::exp(y);
        return r * separatrix_integrand(r, p);
    }
    return separatrix_integrand(y, p);
}

}  // namespace detail

/// Integrates the reduced system from `seed` until the stop event.
///
/// Critical kappa > 0: stops at rho = rho* - switch_fraction (rho* - 1) and finishes by quadrature.
/// Critical kappa = 0: stops at rho = cold_switch_rho, quadrature to cold_rho_max, series beyond.
/// Subcritical: stops where E returns to 0 (a smooth wave).
inline HalfOrbit integrate_half(const Params& p, const PhasePoint& seed, const ShootOptions& opt = {}) {
    namespace odeint = boost::numeric::odeint;
    using detail::State2;
    if (!(opt.tol > 0.0)) throw DomainError("integrate_half: tol must be positive");
    if (!(seed.rho > 1.0 && seed.E < 0.0)) throw DomainError("integrate_half: seed must have rho > 1 and E < 0");

    HalfOrbit out;
    out.params = p;
    out.tol = opt.tol;
    out.delta = std::hypot(seed.rho - 1.0, seed.E);

    const double g1 = g(1.0, p);
    std::optional<double> rho_sw;
    if (p.critical) rho_sw = p.bounded() ? *p.rho_star - opt.switch_fraction * (*p.rho_star - 1.0) : opt.cold_switch_rho;
    const double rho_limit = p.kappa > 0.0 ? p.c / std::sqrt(p.kappa) : std::numeric_limits<double>::infinity();

    // The state is (rho - 1, E) so the step control sees the deviation from the saddle.
    auto sys = [&p](const State2& y, State2& dy, double) {
        if (!(y[0] >= 0.0)) throw NumericalError("integrate_half: orbit fell below rho = 1");
        dy = detail::vector_field_d(y[0], y[1], p);
    };
    auto record = [&](double t, const State2& y) {
        State2 dy{};
        sys(y, dy, t);
        out.xi.push_back(t);
        out.rho.push_back(1.0 + y[0]);
        out.E.push_back(y[1]);
        out.drho.push_back(dy[0]);
        out.dE.push_back(dy[1]);
        // Second derivatives along the flow: rho'' = -E'/h + E h' rho' / h^2, E'' = rho' (1 - h e^H).
        const double r = 1.0 + y[0];
        const double hv = h(r, p);
        out.d2rho.push_back(-dy[1] / hv + y[1] * dh_drho(r, p) * dy[0] / (hv * hv));
        out.d2E.push_back(dy[0] * (1.0 - hv * std::exp(detail::H_of_d(y[0], p))));
        out.max_drift = std::max(out.max_drift, std::abs(-0.5 * y[1] * y[1] + level_gap(1.0 + y[0], p)) / g1);
    };

    auto stepper = odeint::make_dense_output(opt.tol * 1e-2, opt.tol, opt.max_step, odeint::runge_kutta_dopri5<State2>());
    State2 y0{seed.rho - 1.0, seed.E};
    stepper.initialize(y0, 0.0, 1e-3);
    record(0.0, y0);

    const double d_limit = rho_limit - 1.0;
    std::optional<double> d_sw;
    if (rho_sw) d_sw = *rho_sw - 1.0;
    bool smooth_stop = false;
    double t_event = 0.0;
    State2 y_event{};
    double d_prev = y0[0];
    for (;;) {
        if (++out.steps > opt.max_steps) throw NumericalError("integrate_half: step budget exhausted before the stop event");
        const auto [t0, t1] = stepper.do_step(sys);
        if (!(t1 - t0 > 1e-15 * std::max(1.0, std::abs(t1))))
            throw NumericalError("integrate_half: step size underflow near the stop event; integrate in rho instead of xi");
        const State2 y1 = stepper.current_state();
        if (!std::isfinite(y1[0]) || !std::isfinite(y1[1])) throw NumericalError("integrate_half: non-finite state");

        auto state_at = [&](double t) {
            State2 y{};
            stepper.calc_state(t, y);
            return y;
        };
        if (y1[1] >= 0.0) {
            if (p.critical)
                throw NumericalError("integrate_half: E returned to 0 before the peak; the speed is below critical");
            t_event = bisect([&](double t) { return state_at(t)[1]; }, t0, t1, 1e-15 * std::max(1.0, t1));
            y_event = state_at(t_event);
            y_event[1] = 0.0;
            smooth_stop = true;
            break;
        }
        if (!(y1[0] < d_limit) || y1[0] < d_prev)
            throw NumericalError("integrate_half: rho stopped increasing; the orbit left the E < 0, rho' > 0 quadrant");
        if (d_sw && y1[0] >= *d_sw) {
            t_event = bisect([&](double t) { return state_at(t)[0] - *d_sw; }, t0, t1, 1e-15 * std::max(1.0, t1));
            y_event = state_at(t_event);
            y_event[0] = *d_sw;
            break;
        }
        record(t1, y1);
        d_prev = y1[0];
    }
    record(t_event, y_event);
    out.xi_switch = t_event;
    out.rho_switch = 1.0 + y_event[0];

    double peak_clock = t_event;
    if (smooth_stop) {
        out.terminal_rho = y_event[0];
        out.terminal_E = 0.0;
    } else {
        out.has_peak_segment = true;
        out.log_variable = !p.bounded();
        const int n = std::max(4, opt.peak_panels);
        double y_lo = 0.0, y_hi = 0.0, s_end = 0.0;
        if (p.bounded()) {
            y_lo = out.rho_switch;
            y_hi = *p.rho_star;
            out.terminal_rho = *p.rho_star;
        } else {
            if (!(opt.cold_rho_max > opt.cold_switch_rho)) throw DomainError("integrate_half: cold_rho_max must exceed cold_switch_rho");
            y_lo = std::log(out.rho_switch);
            y_hi = std::log(opt.cold_rho_max);
            s_end = detail::cold_tail(opt.cold_rho_max, p.c);
            out.tail_rho = opt.cold_rho_max;
            out.terminal_rho = std::numeric_limits<double>::infinity();
        }
        out.seg_y.resize(n + 1);
        out.seg_s.assign(n + 1, 0.0);
        for (int i = 0; i <= n; ++i) out.seg_y[i] = y_lo + (y_hi - y_lo) * i / n;
        out.seg_y[n] = y_hi;
        out.seg_s[n] = s_end;
        const bool lv = out.log_variable;
        for (int i = n - 1; i >= 0; --i) {
            const double piece = boost::math::quadrature::gauss<double, 20>::integrate(
                [&](double y) { return detail::segment_integrand(y, p, lv); }, out.seg_y[i], out.seg_y[i + 1]);
            out.seg_s[i] = out.seg_s[i + 1] + piece;
        }
        peak_clock = t_event + out.seg_s[0];
        out.terminal_E = 0.0;
    }
    for (double& t : out.xi) t -= peak_clock;
    out.xi_switch -= peak_clock;
    return out;
}

/// (rho, E) on the left half at xi <= 0.
inline PhasePoint orbit_state(const HalfOrbit& orb, double xi) {
    if (xi > 0.0) throw DomainError("orbit_state: xi must be <= 0 on the left half");
    if (xi < orb.xi.front()) {
        std::ostringstream os;
        os << "orbit_state: xi=" << xi << " lies before the seed at xi=" << orb.xi.front()
           << "; decrease delta or shrink the grid";
        throw DomainError(os.str());
    }
    const Params& p = orb.params;
    if (xi <= orb.xi_switch || !orb.has_peak_segment) {
        if (xi >= orb.xi.back()) return {orb.rho.back(), orb.E.back()};
        const auto it = std::upper_bound(orb.xi.begin(), orb.xi.end(), xi);
        const std::size_t j = static_cast<std::size_t>(it - orb.xi.begin());
        const std::size_t i = j - 1;
        const double r = detail::hermite5(orb.xi[i], orb.xi[j], {orb.rho[i], orb.drho[i], orb.d2rho[i]},
                                          {orb.rho[j], orb.drho[j], orb.d2rho[j]}, xi);
        const double e = detail::hermite5(orb.xi[i], orb.xi[j], {orb.E[i], orb.dE[i], orb.d2E[i]},
                                          {orb.E[j], orb.dE[j], orb.d2E[j]}, xi);
        return {r, e};
    }

    // Remaining distance s = -xi; invert s(rho) on the quadrature stretch.
    const double s = -xi;
    auto state_from_rho = [&](double r) {
        if (std::isinf(r)) return PhasePoint{r, 0.0};
        const double gap = level_gap(r, p);
        return PhasePoint{r, gap > 0.0 ? -std::sqrt(2.0 * gap) : 0.0};
    };
    if (s == 0.0) return state_from_rho(orb.terminal_rho);
    const std::size_t n = orb.seg_y.size() - 1;
    if (orb.log_variable && s < orb.seg_s[n]) {
        // Asymptotic tail beyond rho_max.
        const double c = p.c;
        const double guess = std::pow(c / std::sqrt(2.0) * (2.0 / 3.0) / s, 2.0 / 3.0);
        auto f = [&](double r) { return detail::cold_tail(r, c) - s; };
        auto df = [&](double r) { return detail::cold_tail_drho(r, c); };
        double lo = orb.tail_rho, hi = std::max(2.0 * guess, 2.0 * lo);
        while (f(hi) > 0.0) hi *= 2.0;
        const RootResult rr = bisect_newton(f, df, lo, hi, 1e-15 * s, 1e-6 * hi);
        return state_from_rho(rr.x);
    }
    std::size_t i = 0;
    while (i + 1 < n && orb.seg_s[i + 1] > s) ++i;
    const bool lv = orb.log_variable;
    auto F = [&](double y) {
        const double part = boost::math::quadrature::gauss<double, 20>::integrate(
            [&](double u) { return detail::segment_integrand(u, p, lv); }, orb.seg_y[i], y);
        return orb.seg_s[i] - part - s;
    };
    auto dF = [&](double y) {
        if (!lv && y == orb.seg_y[n]) return -separatrix_integrand(orb.terminal_rho, p);
        return -detail::segment_integrand(y, p, lv);
    };
    const double ya = orb.seg_y[i], yb = orb.seg_y[i + 1];
    const RootResult rr = bisect_newton(F, dF, ya, yb, 1e-16 * std::max(1.0, s), 1e-9 * (yb - ya));
    const double r = lv ? std::exp(rr.x) : rr.x;
    if (!lv && p.bounded() && r >= *p.rho_star) return state_from_rho(*p.rho_star);
    return state_from_rho(r);
}

/// Mirrors the half orbit about xi = 0 and samples it on the grid; v and phi follow from rho.
inline WaveProfile assemble_peakon(const Params& p, const HalfOrbit& orb, const GridSpec& spec = {}) {
    WaveProfile w;
    w.xi = make_grid(spec);
    w.params = p;
    w.solver_tol = orb.tol;
    w.terminal_rho = orb.terminal_rho;
    const std::size_t m = w.xi.size();
    w.peak_index = m / 2;
    w.rho.resize(m);
    w.v.resize(m);
    w.phi.resize(m);
    w.E.resize(m);
    w.phi_deficit.resize(m);
    const double g1 = g(1.0, p);
    for (std::size_t k = 0; k <= w.peak_index; ++k) {
        const PhasePoint s = orbit_state(orb, w.xi[k]);
        const std::size_t mk = m - 1 - k;
        w.rho[k] = w.rho[mk] = s.rho;
        w.E[k] = s.E;
        w.E[mk] = -s.E;
        if (std::isinf(s.rho)) {
            w.v[k] = w.v[mk] = p.c;
            w.phi[k] = w.phi[mk] = 0.5 * p.c * p.c;
            w.phi_deficit[k] = w.phi_deficit[mk] = 0.0;
        } else {
            w.v[k] = w.v[mk] = p.c * (1.0 - 1.0 / s.rho);
            w.phi[k] = w.phi[mk] = H(s.rho, p);
            w.phi_deficit[k] = w.phi_deficit[mk] = phi_deficit(s.rho, p);
        }
        const double drift = std::isinf(s.rho) ? 0.0 : std::abs(-0.5 * s.E * s.E + level_gap(s.rho, p)) / g1;
        w.max_drift = std::max(w.max_drift, drift);
    }
    w.E[w.peak_index] = 0.0;
    return w;
}

/// Seed, integrate and assemble in one call.
inline WaveProfile shoot_wave(const Params& p, const ShootOptions& opt = {}, const GridSpec& spec = {}) {
    const HalfOrbit orb = integrate_half(p, unstable_seed(p, opt.delta), opt);
    return assemble_peakon(p, orb, spec);
}

/// xi(rho_to) - xi(rho_from) along the separatrix by adaptive Gauss-Kronrod quadrature.
/// rho_to = rho_star (or +inf for kappa = 0) gives the distance to the peak; that endpoint
/// is mapped by rho = rho* - u^2, respectively rho = rho_from / t^2.
inline double xi_of_rho_quadrature(const Params& p, double rho_from, std::optional<double> rho_to, double tol = 1e-12) {
    using boost::math::quadrature::gauss_kronrod;
    if (!(rho_from > 1.0)) throw DomainError("xi_of_rho_quadrature: rho_from must exceed 1");
    if (rho_to && *rho_to == rho_from) return 0.0;
    if (rho_to && !(*rho_to > rho_from)) throw DomainError("xi_of_rho_quadrature: need rho_from <= rho_to");
    if (p.bounded() && rho_to && *rho_to > *p.rho_star) {
        std::ostringstream os;
        os << "xi_of_rho_quadrature: rho_to=" << *rho_to << " beyond rho*=" << *p.rho_star;
        throw DomainError(os.str());
    }
    if (!rho_to && p.bounded()) rho_to = *p.rho_star;
    double err = 0.0;
    if (!rho_to) {
        if (!p.critical) throw DomainError("xi_of_rho_quadrature: an unbounded endpoint needs a critical kappa = 0 wave");
        auto f = [&](double t) {
            if (t <= 0.0) return 0.0;
            const double r = rho_from / (t * t);
            return separatrix_integrand(r, p) * 2.0 * rho_from / (t * t * t);
        };
        return gauss_kronrod<double, 15>::integrate(f, 0.0, 1.0, 15, tol, &err);
    }
    const double b = *rho_to;
    if (p.bounded() && b == *p.rho_star) {
        const double umax = std::sqrt(b - rho_from);
        auto f = [&](double u) { return separatrix_integrand(b - u * u, p) * 2.0 * u; };
        return gauss_kronrod<double, 15>::integrate(f, 0.0, umax, 15, tol, &err);
    }
    if (b > 4.0 * rho_from) {
        // wide ranges: the integrand decays like rho^{-5/2}, so integrate in ln rho
        auto f = [&](double y) {
            const double r = std::exp(y);
            return separatrix_integrand(r, p) * r;
        };
        return gauss_kronrod<double, 15>::integrate(f, std::log(rho_from), std::log(b), 15, tol, &err);
    }
    auto f = [&](double r) { return separatrix_integrand(r, p); };
    return gauss_kronrod<double, 15>::integrate(f, rho_from, b, 15, tol, &err);
}

/// xi at which the xi-form samples reach `rho`, for rho within the sampled range.
inline double xi_on_orbit(const HalfOrbit& orb, double rho) {
    if (!(rho >= orb.rho.front() && rho <= orb.rho.back())) {
        std::ostringstream os;
        os << "xi_on_orbit: rho=" << rho << " outside the integrated range [" << orb.rho.front() << ", "
           << orb.rho.back() << "]";
        throw DomainError(os.str());
    }
    const auto it = std::lower_bound(orb.rho.begin(), orb.rho.end(), rho);
    std::size_t j = static_cast<std::size_t>(it - orb.rho.begin());
    if (j == 0) return orb.xi.front();
    const std::size_t i = j - 1;
    auto f = [&](double x) {
        return detail::hermite5(orb.xi[i], orb.xi[j], {orb.rho[i], orb.drho[i], orb.d2rho[i]},
                                {orb.rho[j], orb.drho[j], orb.d2rho[j]}, x) - rho;
    };
    return bisect(f, orb.xi[i], orb.xi[j], 1e-15 * std::max(1.0, std::abs(orb.xi[i])));
}

struct QuadratureCheck {
    std::vector<double> probes;
    std::vector<double> xi_shoot;
    std::vector<double> xi_quad;
    double max_abs_diff = 0.0;
};

/// Compares xi(rho) from the shot with -int_rho^peak of the quadrature form at
/// `count` densities spread over the xi-form range.
inline QuadratureCheck quadrature_check(const HalfOrbit& orb, int count = 20) {
    if (!orb.has_peak_segment) throw DomainError("quadrature_check: needs a critical wave");
    QuadratureCheck out;
    const double lo = std::max(orb.rho.front(), 1.0 + 0.02 * (orb.rho_switch - 1.0));
    const double hi = orb.rho_switch;
    for (int k = 0; k < count; ++k) {
        const double r = lo + (hi - lo) * (k + 0.5) / count;
        const double xs = xi_on_orbit(orb, r);
        const double xq = -xi_of_rho_quadrature(orb.params, r, std::nullopt, 1e-13);
        out.probes.push_back(r);
        out.xi_shoot.push_back(xs);
        out.xi_quad.push_back(xq);
        out.max_abs_diff = std::max(out.max_abs_diff, std::abs(xs - xq));
    }
    return out;
}

/// kappa = 0 wave from the second-order equation for Psi = phi* - phi,
///   Psi'' = c/sqrt(2 Psi) - exp(phi* - Psi),
/// started at xi0 from the near-peak expansion and the exact energy relation.
/// The forward integration is unstable like exp(lambda xi), so it stops at xi_end.
inline WaveProfile solve_phi_ode_cold(double c0, double tol = 1e-10, const GridSpec& spec = {}, double xi0 = 1e-6,
                                      double xi_end = 10.0) {
    namespace odeint = boost::numeric::odeint;
    using detail::State2;
    Params p;
    p.kappa = 0.0;
    p.c = c0;
    p.critical = true;
    p.phi_star = 0.5 * c0 * c0;
    p.v_star = c0;
    const double ap1 = 1.0 + c0 * c0;
    const double K = std::sqrt(2.0 * c0) * std::pow(2.0, 0.25);
    const double b = ap1 / (c0 * std::sqrt(2.0));

    auto xi_of_psi = [&](double P) {
        return (4.0 / 3.0 * std::pow(P, 0.75) + 0.5 * b * 0.8 * std::pow(P, 1.25)) / K;
    };
    auto dpsi_of_psi = [&](double P) {
        const double q = 2.0 * (ap1 * std::expm1(-P) + c0 * std::sqrt(2.0 * P));
        if (q < 0.0) throw NumericalError("solve_phi_ode_cold: negative energy at the start");
        return std::sqrt(q);
    };
    auto psi_at = [&](double xi) {
        const double guess = std::pow(0.75 * K * xi, 4.0 / 3.0);
        const auto br = expand_bracket([&](double P) { return xi_of_psi(P) - xi; }, 0.25 * guess, 0.25 * guess);
        return bisect([&](double P) { return xi_of_psi(P) - xi; }, br.first, br.second, 1e-17 * guess);
    };

    auto sys = [&](const State2& y, State2& dy, double) {
        if (!(y[0] > 0.0)) throw NumericalError("solve_phi_ode_cold: phi reached c^2/2 (square-root domain)");
        dy[0] = y[1];
        dy[1] = c0 / std::sqrt(2.0 * y[0]) - ap1 * std::exp(-y[0]);
    };

    const std::vector<double> grid = make_grid(spec);
    std::vector<double> targets;
    for (double x : grid)
        if (x > xi0 && x <= xi_end) targets.push_back(x);

    const double P0 = psi_at(xi0);
    State2 y{P0, dpsi_of_psi(P0)};
    std::vector<double> psi_vals, dpsi_vals;
    if (!targets.empty()) {
        auto stepper = odeint::make_dense_output(tol * 1e-2, tol, odeint::runge_kutta_dopri5<State2>());
        std::vector<double> times;
        times.push_back(xi0);
        times.insert(times.end(), targets.begin(), targets.end());
        odeint::integrate_times(stepper, sys, y, times.begin(), times.end(), 1e-9, [&](const State2& s, double t) {
            if (t > xi0) {
                psi_vals.push_back(s[0]);
                dpsi_vals.push_back(s[1]);
            }
        });
    }

    WaveProfile w;
    w.params = p;
    w.solver_tol = tol;
    w.terminal_rho = std::numeric_limits<double>::infinity();
    std::vector<double> pos_xi, pos_psi, pos_dpsi;
    for (double x : grid) {
        if (x > 0.0 && x <= xi0) {
            const double P = psi_at(x);
            pos_xi.push_back(x);
            pos_psi.push_back(P);
            pos_dpsi.push_back(dpsi_of_psi(P));
        }
    }
    for (std::size_t k = 0; k < targets.size(); ++k) {
        pos_xi.push_back(targets[k]);
        pos_psi.push_back(psi_vals[k]);
        pos_dpsi.push_back(dpsi_vals[k]);
    }
    const std::size_t n = pos_xi.size();
    const std::size_t m = 2 * n + 1;
    w.xi.resize(m);
    w.rho.resize(m);
    w.v.resize(m);
    w.phi.resize(m);
    w.E.resize(m);
    w.phi_deficit.resize(m);
    w.peak_index = n;
    w.xi[n] = 0.0;
    w.rho[n] = std::numeric_limits<double>::infinity();
    w.v[n] = c0;
    w.phi[n] = p.phi_star;
    w.E[n] = 0.0;
    w.phi_deficit[n] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double P = pos_psi[k];
        const double r = c0 / std::sqrt(2.0 * P);
        for (std::size_t idx : {n + 1 + k, n - 1 - k}) {
            w.xi[idx] = idx > n ? pos_xi[k] : -pos_xi[k];
            w.rho[idx] = r;
            w.v[idx] = c0 * (1.0 - 1.0 / r);
            w.phi[idx] = p.phi_star - P;
            w.phi_deficit[idx] = P;
            w.E[idx] = idx > n ? pos_dpsi[k] : -pos_dpsi[k];
        }
    }
    return w;
}

}  // namespace epw
