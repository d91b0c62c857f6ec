// Acceptance checks, one PASS/FAIL line per criterion.
//   acceptance [--criterion N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <cstring>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "epw/asympt.hpp"
#include "epw/epsim.hpp"
#include "epw/shooter.hpp"
#include "epw/speeds.hpp"

using namespace epw;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
        char buf[512];
        va_list ap;
        va_start(ap, fmt);
        std::vsnprintf(buf, sizeof buf, fmt, ap);
        va_end(ap);
        if (!detail.empty()) detail += "; ";
        detail += buf;
        if (!ok) {
            detail += " [fail]";
            pass = false;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Outcome critical_speeds() {
    Outcome o;
    const auto t0 = Clock::now();
    const double c0 = critical_speed(0.0).c;
    const double c1 = critical_speed(1.0).c;
    o.check(std::abs(c0 - 1.585201) < 1e-6, "c_0=%.10f", c0);
    o.check(std::abs(c1 - std::sqrt(2.0) - 0.1552702843) < 1e-9, "c_1-sqrt2=%.12f", c1 - std::sqrt(2.0));
    const double s = seconds_since(t0);
    o.check(s < 1.0, "%.3fs", s);
    return o;
}

Outcome speed_gap() {
    Outcome o;
    const auto t0 = Clock::now();
    const double c0 = solve_c0().c;
    const auto rows = speed_gap_scan({1e-2, 1e-4, 1e-6});
    for (const auto& r : rows) o.check(r.c < c0, "kappa=%g gap=%.6e", r.kappa, c0 - r.c);
    const double a = rows[1].gap_over_sqrt_kappa, b = rows[2].gap_over_sqrt_kappa;
    const double var = std::abs(a - b) / std::max(a, b);
    o.check(var < 0.1, "gap/sqrt(kappa) %.6f vs %.6f (%.2f%%)", a, b, 100 * var);
    const double s = seconds_since(t0);
    o.check(s < 1.0, "%.3fs", s);
    return o;
}

Outcome peakon_construction() {
    Outcome o;
    auto t0 = Clock::now();
    const auto p1 = critical_params(1.0);
    const auto orb = integrate_half(p1, unstable_seed(p1), ShootOptions{});
    const auto w1 = assemble_peakon(p1, orb);
    o.check(w1.max_drift < 1e-7, "kappa=1 drift=%.2e", w1.max_drift);
    o.check(std::abs(orb.terminal_rho - p1.c) < 1e-6, "terminal rho - c_1=%.2e", orb.terminal_rho - p1.c);
    const double q = quadrature_check(orb, 20).max_abs_diff;
    o.check(q < 1e-8, "quadrature vs shooting %.2e", q);
    double s = seconds_since(t0);
    o.check(s < 10.0, "kappa=1 %.2fs", s);

    t0 = Clock::now();
    const auto w0 = shoot_wave(critical_params(0.0));
    const auto ode = solve_phi_ode_cold(w0.params.c);
    double worst = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < ode.xi.size(); ++i) {
        const double a = std::abs(ode.xi[i]);
        if (a < 0.01 || a > 5.0) continue;
        const auto it = std::lower_bound(w0.xi.begin(), w0.xi.end(), ode.xi[i]);
        if (it == w0.xi.end() || *it != ode.xi[i]) continue;
        worst = std::max(worst, std::abs(ode.phi[i] - w0.phi[static_cast<std::size_t>(it - w0.xi.begin())]));
        ++n;
    }
    o.check(n > 100 && worst < 1e-6, "kappa=0 vs phi-ODE max|dphi|=%.2e on %zu points", worst, n);
    s = seconds_since(t0);
    o.check(s < 10.0, "kappa=0 %.2fs", s);
    return o;
}

void peak_rows(Outcome& o, const PeakReport& r, double etol, double ctol, bool check_exponents) {
    for (const auto& row : r.rows) {
        if (check_exponents)
            o.check(row.exponent_error <= etol, "%s p=%.5f (target %.5f)", row.quantity.c_str(), row.free_fit.exponent,
                    row.target_exponent);
        o.check(row.coefficient_rel_error <= ctol, "%s C=%.6g (target %.6g, %.3f%%)", row.quantity.c_str(),
                row.pinned_fit.coefficient, row.target_coefficient, 100 * row.coefficient_rel_error);
    }
}

Outcome peak_cold() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto w = shoot_wave(critical_params(0.0));
    peak_rows(o, verify_peak_cold(w), 0.02, 0.02, true);
    const double s = seconds_since(t0);
    o.check(s < 30.0, "%.2fs", s);
    return o;
}

Outcome peak_isothermal() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto w = shoot_wave(critical_params(1.0));
    const auto r = verify_peak_isothermal(w);
    // phi quadratic coefficient and the two one-sided slopes
    PeakReport first3 = r;
    first3.rows.resize(3);
    peak_rows(o, first3, 0.0, 0.01, false);
    const double s = seconds_since(t0);
    o.check(s < 30.0, "%.2fs", s);
    return o;
}

Outcome transition_layer() {
    Outcome o;
    const auto t0 = Clock::now();
    const double t = transition_thickness(shoot_wave(critical_params(1e-3)), 2.0);
    o.check(t > 0.0056 / 2 && t < 0.0056 * 2, "thickness(1e-3)=%.6f", t);
    const auto scan = thickness_scan({1e-4, 3e-4, 1e-3, 3e-3, 1e-2}, 2.0);
    o.check(std::abs(scan.loglog.slope - 0.75) <= 0.03, "log-log slope=%.4f", scan.loglog.slope);
    const double s = seconds_since(t0);
    o.check(s < 120.0, "%.2fs", s);
    return o;
}

Outcome cold_limit() {
    Outcome o;
    const auto t0 = Clock::now();
    const std::vector<double> kappas{1e-1, 1e-2, 1e-3};
    const auto rep = cold_limit_sweep(kappas, {0.2}, {0.5}, {1.2});
    auto series = [&](const std::string& name) {
        std::vector<double> v;
        for (double k : kappas)
            for (const auto& r : rep.rows)
                if (r.kappa == k && r.norm_name == name) v.push_back(r.value);
        return v;
    };
    for (const char* name : {"C1alpha", "Lp", "Cbeta"}) {
        const auto v = series(name);
        const bool dec = v.size() == 3 && v[0] > v[1] && v[1] > v[2];
        o.check(dec, "%s %.4g > %.4g > %.4g", name, v[0], v[1], v[2]);
    }
    const auto w = series("Calpha_seminorm");
    const double lo = *std::min_element(w.begin(), w.end());
    o.check(lo >= rep.witness_floor, "C^{1,1/3} seminorm min %.4f >= %.4f", lo, rep.witness_floor);
    const double s = seconds_since(t0);
    o.check(s < 300.0, "%.2fs", s);
    return o;
}

SimConfig pde_config(const InitialData& init) {
    SimConfig cfg;
    cfg.L = init.L;
    cfg.n_modes = 1024;
    cfg.t_max = 12.0;
    return cfg;
}

Outcome experiment_a() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto init = named_experiment("gaussian-v");
    const auto r = run_experiment(init, pde_config(init)).report;
    o.check(true, "termination=%s at t=%.4f", to_string(r.termination), r.t_final);
    o.check(std::abs(r.T_star_estimate - 4.0) <= 0.5, "T*=%.4f", r.T_star_estimate);
    o.check(r.left_concavity_sign < 0 && r.right_concavity_sign > 0, "concavity left %+d right %+d (x*=%.4f, %s)",
            r.left_concavity_sign, r.right_concavity_sign, r.x_star_estimate, r.type.c_str());
    o.check(true, "%.1fs", seconds_since(t0));
    return o;
}

Outcome experiment_b() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto init = named_experiment("sech-rho");
    const auto r = run_experiment(init, pde_config(init)).report;
    o.check(true, "termination=%s at t=%.4f", to_string(r.termination), r.t_final);
    o.check(std::abs(r.x_star_estimate - 10.0) <= 1.0, "x*=%.4f (%s)", r.x_star_estimate, r.type.c_str());
    o.check(r.dxv_sign_left > 0 && r.dxv_sign_right < 0, "v_x left %+d right %+d", r.dxv_sign_left, r.dxv_sign_right);
    o.check(r.left_concavity_sign > 0 && r.right_concavity_sign > 0, "v_xx left %+d right %+d", r.left_concavity_sign,
            r.right_concavity_sign);
    const double pv = r.v_exponent_fit ? r.v_exponent_fit->exponent : std::nan("");
    const double pr = r.rho_exponent_fit ? r.rho_exponent_fit->exponent : std::nan("");
    const bool in_band = pv >= 0.55 && pv <= 0.80 && pr < 0.0 && -pr >= 0.55 && -pr <= 0.80;
    o.check(in_band || r.window_underflow, "exponents v %.4f rho %.4f%s", pv, pr,
            r.window_underflow ? " (window underflow flagged)" : "");
    o.check(true, "%.1fs", seconds_since(t0));
    return o;
}

Outcome hygiene() {
    Outcome o;
    const auto t0 = Clock::now();
    double tstar = 0.0;
    for (const char* name : {"gaussian-v", "sech-rho"}) {
        const auto init = named_experiment(name);
        const auto r = run_experiment(init, pde_config(init)).report;
        o.check(r.mass_drift < 1e-8, "%s mass drift %.2e", name, r.mass_drift);
        if (std::string(name) == "gaussian-v") tstar = r.T_star_estimate;
    }
    {
        const auto init = named_experiment("gaussian-v");
        const SimConfig cfg = pde_config(init);
        const double t = std::round(0.8 * tstar / cfg.dt) * cfg.dt;
        const auto rr = richardson_ratio(init, cfg, t);
        o.check(rr.ratio >= 3.5 && rr.ratio <= 4.5, "Richardson ratio %.4f at t=%.3f", rr.ratio, t);
    }
    {
        SimConfig cfg;
        Simulator sim(cfg);
        const auto x = sim.spectral().grid();
        const double k = std::numbers::pi / cfg.L;
        std::vector<double> phi_m, rho;
        for (double xi : x) {
            phi_m.push_back(0.3 * std::cos(k * xi));
            rho.push_back(std::exp(phi_m.back()) + k * k * phi_m.back());
        }
        const auto phi = sim.poisson_solve(rho, std::vector<double>(x.size(), 0.0));
        double err = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) err = std::max(err, std::abs(phi[j] - phi_m[j]));
        o.check(err < 1e-9, "manufactured Poisson %.2e", err);
    }
    {
        SimConfig cfg;
        Spectral sp(cfg.n_modes, cfg.L);
        SimState s;
        s.x = sp.grid();
        for (double x : s.x) {
            s.v.push_back(-std::pow(std::abs(x), 2.0 / 3.0));
            s.rho.push_back(1.0 + std::pow(std::max(std::abs(x), 0.5 * sp.dx()), -2.0 / 3.0));
        }
        const auto r = blowup_profile_analysis(s, cfg);
        const double p = r.v_exponent_fit ? r.v_exponent_fit->exponent : std::nan("");
        o.check(std::abs(p - 2.0 / 3.0) <= 0.01, "synthetic |x|^{2/3} exponent %.5f", p);
    }
    const double s = seconds_since(t0);
    o.check(s < 120.0, "%.1fs", s);
    return o;
}

const std::vector<std::pair<const char*, std::function<Outcome()>>> kCriteria{
    {"critical speeds", critical_speeds},
    {"speed gap", speed_gap},
    {"peakon construction", peakon_construction},
    {"peak asymptotics kappa=0", peak_cold},
    {"peak asymptotics kappa=1", peak_isothermal},
    {"transition layer", transition_layer},
    {"cold limit", cold_limit},
    {"PDE experiment A", experiment_a},
    {"PDE experiment B", experiment_b},
    {"numerics hygiene", hygiene},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: acceptance [--criterion N]\n");
            return 2;
        }
    }
    if (only < 0 || only > static_cast<int>(kCriteria.size())) {
        std::fprintf(stderr, "criterion must be 1..%zu\n", kCriteria.size());
        return 2;
    }
    int failed = 0;
    for (std::size_t i = 0; i < kCriteria.size(); ++i) {
        if (only != 0 && static_cast<int>(i) + 1 != only) continue;
        Outcome o;
        try {
            o = kCriteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        std::printf("criterion %zu %s: %s  %s\n", i + 1, kCriteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
