#pragma once

// Pseudo-spectral Crank-Nicolson solver for the 1D Euler-Poisson system
//   rho_t + (rho v)_x = 0,
//   v_t + v v_x + kappa rho_x / rho = -phi_x,
//   -phi_xx = rho - exp(phi)
// on the periodic domain [-L, L], plus blow-up diagnostics.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "epw/error.hpp"
#include "epw/powerfit.hpp"
#include "epw/spectral.hpp"

namespace epw {

enum class Termination { gradient_threshold, picard_divergence, nan, t_max };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::gradient_threshold: return "gradient_threshold";
        case Termination::picard_divergence: return "picard_divergence";
        case Termination::nan: return "nan";
        case Termination::t_max: return "t_max";
    }
    return "unknown";
}

struct SimConfig {
    double L = 10.0;
    int n_modes = 1024;
    double dt = 1e-3;
    double kappa = 0.0;
    double t_max = 6.0;
    double blowup_threshold = 1e3;
    double picard_tol = 1e-10;
    double poisson_tol = 1e-10;  // on max |-phi_xx + e^phi - rho| / max(1, max rho)
    bool dealias = true;
    double picard_damping = 0.8;
    int picard_max_iter = 100;
    int poisson_max_iter = 50;
    int snap_every = 0;      // 0: keep only the first and last states
    int tstar_window = 50;   // steps used to extrapolate 1/max|v_x|
};

struct Diagnostics {
    double min_dxv = 0.0;
    double max_dxv = 0.0;
    double max_abs_dxrho = 0.0;
    double max_rho = 0.0;
    double min_rho = 0.0;
    double mass = 0.0;  // int (rho - 1) dx
    double tail_fraction = 0.0;
    double poisson_residual = 0.0;
    int picard_iterations = 0;
};

struct SimState {
    double t = 0.0;
    long step = 0;
    std::vector<double> x, rho, v, phi;
    Diagnostics diag;
};

struct HistoryRow {
    double t = 0.0;
    double min_dxv = 0.0;
    double max_dxv = 0.0;
    double max_abs_dxrho = 0.0;
    double max_rho = 0.0;
    double mass = 0.0;
};

struct BlowupReport {
    double T_star_estimate = 0.0;
    bool T_star_extrapolated = false;
    double t_final = 0.0;
    double x_star_estimate = 0.0;
    double x_star_peak = 0.0;   // argmax rho
    double x_star_shock = 0.0;  // argmin v_x
    std::string type;           // "peakon" or "shock"
    Termination termination = Termination::t_max;
    int left_concavity_sign = 0;
    int right_concavity_sign = 0;
    int dxv_sign_left = 0;
    int dxv_sign_right = 0;
    std::optional<PowerFit> v_exponent_fit;
    std::optional<PowerFit> rho_exponent_fit;
    bool window_underflow = false;
    std::string note;
    double max_abs_dxv = 0.0;
    double max_abs_dxrho = 0.0;
    long step_dxv_threshold = -1;    // first step with max |v_x| above the threshold
    long step_dxrho_threshold = -1;  // first step with max |rho_x| above the threshold
    double mass_drift = 0.0;         // max |mass - mass(0)| over the run
};

class Simulator {
public:
    explicit Simulator(const SimConfig& cfg) : cfg_(cfg), sp_(cfg.n_modes, cfg.L) {
        if (!(cfg.dt > 0.0)) throw DomainError("SimConfig: dt must be positive");
        if (!(cfg.kappa >= 0.0)) throw DomainError("SimConfig: kappa must be >= 0");
        if (!(cfg.picard_damping > 0.0 && cfg.picard_damping <= 1.0))
            throw DomainError("SimConfig: picard_damping must lie in (0, 1]");
    }

    [[nodiscard]] const SimConfig& config() const { return cfg_; }
    Spectral& spectral() { return sp_; }

    /// Newton for -phi_xx + e^phi = rho. Each correction solves (-d_xx + e^phi) d = -R
    /// by conjugate gradients preconditioned with (-d_xx + mean e^phi)^{-1}.
    std::vector<double> poisson_solve(const std::vector<double>& rho, std::vector<double> phi) {
        const std::size_t n = rho.size();
        double rmax = 0.0;
        for (double r : rho) {
            if (!(r > 0.0)) throw DomainError("poisson_solve: rho must be positive");
            rmax = std::max(rmax, r);
        }
        const double tol = cfg_.poisson_tol * std::max(1.0, rmax);
        for (int it = 0; it < cfg_.poisson_max_iter; ++it) {
            std::vector<double> e(n), R = sp_.neg_laplacian(phi);
            double rn = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                e[j] = std::exp(phi[j]);
                R[j] += e[j] - rho[j];
                rn = std::max(rn, std::abs(R[j]));
            }
            if (!std::isfinite(rn)) break;
            last_poisson_residual_ = rn / std::max(1.0, rmax);
            if (rn <= tol) return phi;
            double m = 0.0;
            for (double x : e) m += x;
            m /= n;
            auto A = [&](const std::vector<double>& d) {
                auto out = sp_.neg_laplacian(d);
                for (std::size_t j = 0; j < n; ++j) out[j] += e[j] * d[j];
                return out;
            };
            std::vector<double> d(n, 0.0), r(n);
            for (std::size_t j = 0; j < n; ++j) r[j] = -R[j];
            std::vector<double> z = sp_.helmholtz_solve(r, m), p = z;
            double rz = dot(r, z);
            const double inner = std::min(1e-3 * rn, 0.1 * tol);
            for (int k = 0; k < 400; ++k) {
                const auto Ap = A(p);
                const double a = rz / dot(p, Ap);
                double rm = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    d[j] += a * p[j];
                    r[j] -= a * Ap[j];
                    rm = std::max(rm, std::abs(r[j]));
                }
                if (rm <= inner) break;
                z = sp_.helmholtz_solve(r, m);
                const double rz2 = dot(r, z);
                for (std::size_t j = 0; j < n; ++j) p[j] = z[j] + rz2 / rz * p[j];
                rz = rz2;
            }
            for (std::size_t j = 0; j < n; ++j) phi[j] += d[j];
        }
        throw NumericalError("poisson_solve: Newton did not converge");
    }

    struct Tendency {
        std::vector<double> rho, v;
    };

    /// rho_t = -(rho v)_x, v_t = -v v_x - kappa rho_x / rho - phi_x, for a phi already solved.
    Tendency tendency(const std::vector<double>& rho, const std::vector<double>& v, const std::vector<double>& phi) {
        const std::size_t n = rho.size();
        std::vector<double> flux(n);
        for (std::size_t j = 0; j < n; ++j) {
            if (!(rho[j] > 0.0)) throw DomainError("rhs: rho must be positive");
            flux[j] = rho[j] * v[j];
        }
        Tendency out;
        out.rho = sp_.derivative(flux);
        const auto vx = sp_.derivative(v);
        const auto px = sp_.derivative(phi);
        std::vector<double> rx;
        if (cfg_.kappa != 0.0) rx = sp_.derivative(rho);
        out.v.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            out.rho[j] = -out.rho[j];
            out.v[j] = -v[j] * vx[j] - px[j];
            if (cfg_.kappa != 0.0) out.v[j] -= cfg_.kappa * rx[j] / rho[j];
        }
        if (cfg_.dealias) {
            out.rho = sp_.filter(out.rho);
            out.v = sp_.filter(out.v);
        }
        return out;
    }

    /// Tendency of a state; phi is re-solved from rho.
    Tendency rhs(SimState& s) {
        s.phi = poisson_solve(s.rho, s.phi);
        return tendency(s.rho, s.v, s.phi);
    }

    SimState initial_state(const std::function<double(double)>& rho0, const std::function<double(double)>& v0) {
        SimState s;
        s.x = sp_.grid();
        const std::size_t n = s.x.size();
        s.rho.resize(n);
        s.v.resize(n);
        s.phi.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            s.rho[j] = rho0(s.x[j]);
            s.v[j] = v0(s.x[j]);
            if (!(s.rho[j] > 0.0)) throw DomainError("initial_state: rho must be positive");
            s.phi[j] = std::log(s.rho[j]);
        }
        s.phi = poisson_solve(s.rho, s.phi);
        cache_.reset();
        update_diagnostics(s);
        return s;
    }

    enum class StepStatus { ok, picard_divergence, nan };

    /// One Crank-Nicolson step u1 = u0 + dt/2 (F(u0) + F(u1)) by damped Picard iteration.
    /// On failure the state is left unchanged.
    StepStatus step_cn(SimState& s) {
        if (!cache_ || cache_t_ != s.t || cache_step_ != s.step) {
            cache_ = rhs(s);
            cache_t_ = s.t;
            cache_step_ = s.step;
        }
        const std::size_t n = s.rho.size();
        const double h = 0.5 * cfg_.dt;
        const double w = cfg_.picard_damping;
        std::vector<double> r1 = s.rho, v1 = s.v, ph1 = s.phi;
        bool converged = false;
        int it = 0;
        try {
            for (; it < cfg_.picard_max_iter; ++it) {
                ph1 = poisson_solve(r1, ph1);
                const Tendency g = tendency(r1, v1, ph1);
                double err = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double rn = s.rho[j] + h * (cache_->rho[j] + g.rho[j]);
                    const double vn = s.v[j] + h * (cache_->v[j] + g.v[j]);
                    err = std::max({err, std::abs(rn - r1[j]), std::abs(vn - v1[j])});
                    r1[j] = (1.0 - w) * r1[j] + w * rn;
                    v1[j] = (1.0 - w) * v1[j] + w * vn;
                }
                if (!std::isfinite(err)) return StepStatus::nan;
                if (err <= cfg_.picard_tol) {
                    converged = true;
                    ++it;
                    break;
                }
            }
        } catch (const NumericalError&) {
            return StepStatus::picard_divergence;
        } catch (const DomainError&) {
            return StepStatus::picard_divergence;
        }
        if (!converged) return StepStatus::picard_divergence;
        for (std::size_t j = 0; j < n; ++j)
            if (!std::isfinite(r1[j]) || !std::isfinite(v1[j])) return StepStatus::nan;
        SimState next = s;
        next.rho = std::move(r1);
        next.v = std::move(v1);
        next.phi = std::move(ph1);
        next.t = s.t + cfg_.dt;
        next.step = s.step + 1;
        try {
            cache_ = rhs(next);
        } catch (const std::exception&) {
            return StepStatus::picard_divergence;
        }
        cache_t_ = next.t;
        cache_step_ = next.step;
        next.diag.picard_iterations = it;
        update_diagnostics(next);
        s = std::move(next);
        return StepStatus::ok;
    }

    void update_diagnostics(SimState& s) {
        const auto vx = sp_.derivative(s.v);
        const auto rx = sp_.derivative(s.rho);
        Diagnostics& d = s.diag;
        d.min_dxv = *std::min_element(vx.begin(), vx.end());
        d.max_dxv = *std::max_element(vx.begin(), vx.end());
        d.max_abs_dxrho = 0.0;
        for (double r : rx) d.max_abs_dxrho = std::max(d.max_abs_dxrho, std::abs(r));
        d.max_rho = *std::max_element(s.rho.begin(), s.rho.end());
        d.min_rho = *std::min_element(s.rho.begin(), s.rho.end());
        d.mass = 0.0;
        for (double r : s.rho) d.mass += r - 1.0;
        d.mass *= sp_.dx();
        d.tail_fraction = sp_.tail_fraction(s.v);
        d.poisson_residual = poisson_residual(s.rho, s.phi);
    }

    double poisson_residual(const std::vector<double>& rho, const std::vector<double>& phi) {
        auto R = sp_.neg_laplacian(phi);
        double rn = 0.0, rmax = 0.0;
        for (std::size_t j = 0; j < R.size(); ++j) {
            rn = std::max(rn, std::abs(R[j] + std::exp(phi[j]) - rho[j]));
            rmax = std::max(rmax, rho[j]);
        }
        return rn / std::max(1.0, rmax);
    }

private:
    static double dot(const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
        return s;
    }

    SimConfig cfg_;
    Spectral sp_;
    std::optional<Tendency> cache_;
    double cache_t_ = 0.0;
    long cache_step_ = -1;
    double last_poisson_residual_ = 0.0;
};

/// Near-singularity analysis of one state: location, side signs of v_x and v_xx,
/// and local power laws of |v - v(x*)| and rho - 1 against |x - x*|.
inline BlowupReport blowup_profile_analysis(const SimState& s, const SimConfig& cfg, BlowupReport rep = {}) {
    Spectral sp(cfg.n_modes, cfg.L);
    const std::size_t n = s.x.size();
    if (s.rho.size() != n || s.v.size() != n) throw DomainError("blowup_profile_analysis: field sizes differ");
    const auto vx = sp.derivative(s.v);
    const auto vxx = sp.derivative(s.v, 2);

    // A state even in rho (and odd in v) has mirror singularities; report the one at x >= 0.
    double asym = 0.0, rmax = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        asym = std::max(asym, std::abs(s.rho[j] - s.rho[n - j]));
        rmax = std::max(rmax, s.rho[j]);
    }
    const std::size_t lo = asym <= 1e-8 * std::max(1.0, rmax) ? n / 2 : 0;
    std::size_t ip = lo, is = lo;
    for (std::size_t j = lo; j < n; ++j) {
        if (s.rho[j] > s.rho[ip]) ip = j;
        if (vx[j] < vx[is]) is = j;
    }
    rep.x_star_peak = s.x[ip];
    rep.x_star_shock = s.x[is];
    auto wrap = [n](long j) { return static_cast<std::size_t>(((j % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n)); };

    // Peakon-type when v_x changes sign from + to - across the density maximum.
    double left = 0.0, right = 0.0;
    for (long k = 1; k <= 2; ++k) {
        left += vx[wrap(static_cast<long>(ip) - k)];
        right += vx[wrap(static_cast<long>(ip) + k)];
    }
    const bool peakon = left > 0.0 && right < 0.0;
    const std::size_t ic = peakon ? ip : is;
    rep.type = peakon ? "peakon" : "shock";
    rep.x_star_estimate = s.x[ic];

    constexpr long inner = 3, outer = 15, fit_outer = 30;
    double cl = 0.0, cr = 0.0, dl = 0.0, dr = 0.0;
    for (long k = inner; k <= outer; ++k) {
        cl += vxx[wrap(static_cast<long>(ic) - k)];
        cr += vxx[wrap(static_cast<long>(ic) + k)];
        dl += vx[wrap(static_cast<long>(ic) - k)];
        dr += vx[wrap(static_cast<long>(ic) + k)];
    }
    auto sgn = [](double x) { return (x > 0.0) - (x < 0.0); };
    rep.left_concavity_sign = sgn(cl);
    rep.right_concavity_sign = sgn(cr);
    rep.dxv_sign_left = sgn(dl);
    rep.dxv_sign_right = sgn(dr);

    std::vector<double> dist, yv, yr;
    const double dx = sp.dx();
    for (long k = inner + 1; k <= fit_outer; ++k) {
        for (long sgnk : {-1L, 1L}) {
            const std::size_t j = wrap(static_cast<long>(ic) + sgnk * k);
            dist.push_back(k * dx);
            yv.push_back(std::abs(s.v[j] - s.v[ic]));
            yr.push_back(s.rho[j] - 1.0);
        }
    }
    const std::pair<double, double> win{(inner + 1) * dx, fit_outer * dx};
    try {
        rep.v_exponent_fit = fit_power(dist, yv, win);
        rep.rho_exponent_fit = fit_power(dist, yr, win);
        if (rep.v_exponent_fit->r_squared < 0.9 || rep.rho_exponent_fit->r_squared < 0.9) {
            rep.window_underflow = true;
            rep.note = "local power law not resolved on the fit window (r^2 < 0.9)";
        }
    } catch (const DomainError& e) {
        rep.window_underflow = true;
        rep.note = e.what();
    }
    return rep;
}

struct InitialData {
    std::string name;
    std::function<double(double)> rho;
    std::function<double(double)> v;
    double L = 10.0;
};

/// gaussian-v: rho = 1, v = 3 exp(-x^2) on [-10, 10]; sech-rho: rho = 1 + 13 sech x, v = 0 on [-15, 15].
inline InitialData named_experiment(const std::string& name) {
    if (name == "gaussian-v") return {name, [](double) { return 1.0; }, [](double x) { return 3.0 * std::exp(-x * x); }, 10.0};
    if (name == "sech-rho") return {name, [](double x) { return 1.0 + 13.0 / std::cosh(x); }, [](double) { return 0.0; }, 15.0};
    throw DomainError("named_experiment: unknown experiment '" + name + "' (gaussian-v, sech-rho)");
}

struct RunResult {
    std::vector<SimState> snapshots;
    std::vector<HistoryRow> history;
    SimState last;
    BlowupReport report;
};

/// Marches until t_max or a termination signal and analyses the last healthy state.
inline RunResult run_experiment(const InitialData& init, const SimConfig& cfg,
                                const std::function<void(const SimState&)>& on_step = {}) {
    Simulator sim(cfg);
    RunResult out;
    SimState s = sim.initial_state(init.rho, init.v);
    out.snapshots.push_back(s);
    const double mass0 = s.diag.mass;
    auto push_history = [&](const SimState& st) {
        out.history.push_back({st.t, st.diag.min_dxv, st.diag.max_dxv, st.diag.max_abs_dxrho, st.diag.max_rho, st.diag.mass});
        out.report.mass_drift = std::max(out.report.mass_drift, std::abs(st.diag.mass - mass0));
        const double g = std::max(-st.diag.min_dxv, st.diag.max_dxv);
        if (out.report.step_dxv_threshold < 0 && g > cfg.blowup_threshold) out.report.step_dxv_threshold = st.step;
        if (out.report.step_dxrho_threshold < 0 && st.diag.max_abs_dxrho > cfg.blowup_threshold)
            out.report.step_dxrho_threshold = st.step;
    };
    push_history(s);
    Termination term = Termination::t_max;
    const long max_steps = static_cast<long>(std::llround(cfg.t_max / cfg.dt));
    while (s.step < max_steps) {
        if (-s.diag.min_dxv > cfg.blowup_threshold) {
            term = Termination::gradient_threshold;
            break;
        }
        const auto st = sim.step_cn(s);
        if (st == Simulator::StepStatus::picard_divergence) {
            term = Termination::picard_divergence;
            break;
        }
        if (st == Simulator::StepStatus::nan) {
            term = Termination::nan;
            break;
        }
        push_history(s);
        if (on_step) on_step(s);
        if (cfg.snap_every > 0 && s.step % cfg.snap_every == 0) out.snapshots.push_back(s);
    }
    if (term == Termination::t_max && -s.diag.min_dxv > cfg.blowup_threshold) term = Termination::gradient_threshold;
    if (out.snapshots.back().step != s.step) out.snapshots.push_back(s);

    BlowupReport rep = out.report;
    rep.termination = term;
    rep.t_final = s.t;
    for (const auto& h : out.history) {
        rep.max_abs_dxv = std::max({rep.max_abs_dxv, -h.min_dxv, h.max_dxv});
        rep.max_abs_dxrho = std::max(rep.max_abs_dxrho, h.max_abs_dxrho);
    }
    // T*: zero of the straight line through 1/max|v_x| over the last healthy steps.
    const std::size_t w = std::min<std::size_t>(out.history.size(), static_cast<std::size_t>(std::max(2, cfg.tstar_window)));
    rep.T_star_estimate = s.t;
    if (w >= 2) {
        std::vector<double> tt, inv;
        for (std::size_t i = out.history.size() - w; i < out.history.size(); ++i) {
            const auto& h = out.history[i];
            tt.push_back(h.t);
            inv.push_back(1.0 / std::max(-h.min_dxv, h.max_dxv));
        }
        const LineFit lf = fit_line(tt, inv);
        if (lf.slope < 0.0) {
            rep.T_star_estimate = -lf.intercept / lf.slope;
            rep.T_star_extrapolated = true;
        }
    }
    out.report = blowup_profile_analysis(s, cfg, rep);
    out.last = std::move(s);
    return out;
}

struct RichardsonResult {
    double t = 0.0;
    double dt = 0.0;
    double diff_coarse = 0.0;  // max |u_dt - u_dt/2|
    double diff_fine = 0.0;    // max |u_dt/2 - u_dt/4|
    double ratio = 0.0;        // 4 for a second-order scheme
};

/// Step-halving study at time t over (rho, v) in the max norm.
inline RichardsonResult richardson_ratio(const InitialData& init, SimConfig cfg, double t) {
    RichardsonResult out;
    out.t = t;
    out.dt = cfg.dt;
    cfg.t_max = t;
    cfg.blowup_threshold = std::numeric_limits<double>::infinity();
    std::vector<SimState> finals;
    for (int k = 0; k < 3; ++k) {
        const long steps = std::llround(t / cfg.dt);
        if (std::abs(steps * cfg.dt - t) > 1e-9 * std::max(1.0, t))
            throw DomainError("richardson_ratio: t must be a multiple of dt");
        auto r = run_experiment(init, cfg);
        if (r.report.termination != Termination::t_max)
            throw NumericalError(std::string("richardson_ratio: run stopped early (") + to_string(r.report.termination) + ")");
        finals.push_back(std::move(r.last));
        cfg.dt *= 0.5;
    }
    auto diff = [](const SimState& a, const SimState& b) {
        double d = 0.0;
        for (std::size_t j = 0; j < a.rho.size(); ++j)
            d = std::max({d, std::abs(a.rho[j] - b.rho[j]), std::abs(a.v[j] - b.v[j])});
        return d;
    };
    out.diff_coarse = diff(finals[0], finals[1]);
    out.diff_fine = diff(finals[1], finals[2]);
    out.ratio = out.diff_coarse / out.diff_fine;
    return out;
}

}  // namespace epw
