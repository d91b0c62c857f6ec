#pragma once

#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cli_io.hpp"
#include "epw/asympt.hpp"
#include "epw/epsim.hpp"
#include "epw/shooter.hpp"
#include "epw/speeds.hpp"
#include "epw/wavealg.hpp"

namespace epwcli {

struct Context {
    std::string command_line;
    std::string config;  // option values of the running subcommand
    unsigned threads = 0;
};

// ---- JSON views -------------------------------------------------------------

inline json to_json(const epw::Params& p) {
    json j;
    j["kappa"] = p.kappa;
    j["c"] = p.c;
    j["critical"] = p.critical;
    j["rho_star"] = p.rho_star ? json(*p.rho_star) : json(nullptr);
    j["v_star"] = p.v_star;
    j["phi_star"] = p.phi_star;
    j["rho_hat"] = p.rho_hat;
    return j;
}

inline json to_json(const epw::PowerFit& f) {
    return {{"exponent", f.exponent}, {"coefficient", f.coefficient}, {"r_squared", f.r_squared},
            {"window", {f.window.first, f.window.second}}, {"n_points", f.n_points}, {"pinned", f.pinned}};
}

inline json to_json(const epw::PeakReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"quantity", row.quantity}, {"free_fit", to_json(row.free_fit)}, {"pinned_fit", to_json(row.pinned_fit)},
                        {"target_exponent", row.target_exponent}, {"target_coefficient", row.target_coefficient},
                        {"exponent_error", row.exponent_error}, {"coefficient_rel_error", row.coefficient_rel_error},
                        {"exponent_ok", row.exponent_ok}, {"coefficient_ok", row.coefficient_ok}});
    return {{"kappa", r.kappa}, {"c", r.c}, {"window", {r.window.first, r.window.second}}, {"exponent_tol", r.exponent_tol},
            {"coefficient_tol", r.coefficient_tol}, {"pass", r.ok()}, {"rows", rows}};
}

inline json to_json(const epw::SimConfig& c) {
    return {{"L", c.L}, {"n_modes", c.n_modes}, {"dt", c.dt}, {"kappa", c.kappa}, {"t_max", c.t_max},
            {"blowup_threshold", c.blowup_threshold}, {"picard_tol", c.picard_tol}, {"poisson_tol", c.poisson_tol},
            {"dealias", c.dealias}, {"picard_damping", c.picard_damping}, {"picard_max_iter", c.picard_max_iter},
            {"poisson_max_iter", c.poisson_max_iter}, {"snap_every", c.snap_every}, {"tstar_window", c.tstar_window}};
}

inline json to_json(const epw::BlowupReport& r) {
    json j;
    j["T_star_estimate"] = r.T_star_estimate;
    j["T_star_extrapolated"] = r.T_star_extrapolated;
    j["t_final"] = r.t_final;
    j["x_star_estimate"] = r.x_star_estimate;
    j["x_star_peak"] = r.x_star_peak;
    j["x_star_shock"] = r.x_star_shock;
    j["type"] = r.type;
    j["termination"] = epw::to_string(r.termination);
    j["left_concavity_sign"] = r.left_concavity_sign;
    j["right_concavity_sign"] = r.right_concavity_sign;
    j["dxv_sign_left"] = r.dxv_sign_left;
    j["dxv_sign_right"] = r.dxv_sign_right;
    j["v_exponent_fit"] = r.v_exponent_fit ? to_json(*r.v_exponent_fit) : json(nullptr);
    j["rho_exponent_fit"] = r.rho_exponent_fit ? to_json(*r.rho_exponent_fit) : json(nullptr);
    j["window_underflow"] = r.window_underflow;
    j["note"] = r.note;
    j["max_abs_dxv"] = r.max_abs_dxv;
    j["max_abs_dxrho"] = r.max_abs_dxrho;
    j["step_dxv_threshold"] = r.step_dxv_threshold;
    j["step_dxrho_threshold"] = r.step_dxrho_threshold;
    j["mass_drift"] = r.mass_drift;
    return j;
}

// ---- shared pieces ------------------------------------------------------------

inline const std::vector<std::string> kWaveHeader{"xi", "rho", "v", "phi", "E"};

inline std::vector<Row> wave_rows(const epw::WaveProfile& w) {
    std::vector<Row> rows;
    rows.reserve(w.xi.size());
    for (std::size_t i = 0; i < w.xi.size(); ++i) rows.push_back({w.xi[i], w.rho[i], w.v[i], w.phi[i], w.E[i]});
    return rows;
}

inline json wave_sidecar(const epw::WaveProfile& w, const epw::ShootOptions& opt, const epw::GridSpec& grid) {
    return {{"params", to_json(w.params)},
            {"tolerances", {{"tol", opt.tol}, {"delta", opt.delta}, {"max_step", opt.max_step}}},
            {"grid", {{"n", grid.n}, {"xi_min", grid.xi_min}, {"xi_max", grid.xi_max}, {"points", w.xi.size()}}},
            {"drift", {{"max_first_integral_drift", w.max_drift}, {"terminal_rho", w.terminal_rho}}}};
}

inline epw::Params wave_params(double kappa, const std::string& c) {
    if (c == "crit" || c.empty()) return epw::critical_params(kappa);
    double val = 0.0;
    try {
        std::size_t used = 0;
        val = std::stod(c, &used);
        if (used != c.size()) throw std::invalid_argument(c);
    } catch (const std::exception&) {
        throw epw::DomainError("--c must be a number or 'crit', got '" + c + "'");
    }
    return epw::smooth_params(kappa, val);
}

inline std::vector<std::string> speed_header() { return {"kappa", "c", "residual", "gap", "gap_over_sqrt_kappa"}; }

inline void print_csv(const std::vector<std::string>& header, const std::vector<Row>& rows) {
    write_csv(std::cout, header, rows);
}

// ---- subcommands ------------------------------------------------------------

struct SpeedArgs {
    std::vector<double> kappas{0.0};
    double tol = epw::kDefaultSpeedTol;
    bool scan = false;
    std::string out_dir;
};

inline int cmd_speed(const SpeedArgs& a, const Context& ctx) {
    std::vector<Row> rows;
    if (a.scan) {
        for (const auto& r : epw::speed_gap_scan(a.kappas, a.tol)) rows.push_back({r.kappa, r.c, r.residual, r.gap, r.gap_over_sqrt_kappa});
    } else {
        const double c0 = epw::solve_c0(a.tol).c;
        for (double k : a.kappas) {
            const auto s = epw::critical_speed(k, a.tol);
            const double gap = c0 - s.c;
            rows.push_back({k, s.c, s.residual, gap, k > 0.0 ? gap / std::sqrt(k) : std::nan("")});
        }
    }
    if (a.out_dir.empty()) {
        print_csv(speed_header(), rows);
    } else {
        OutputDir out(a.out_dir, ctx.command_line, ctx.config);
        out.csv("speed.csv", speed_header(), rows);
        out.finish();
    }
    return 0;
}

struct PhaseArgs {
    double kappa = 0.0;
    std::string c = "crit";
    int grid = 400;
    double rho_max = 50.0;
    std::string out_dir;
};

inline int cmd_phase(const PhaseArgs& a, const Context& ctx) {
    const epw::Params p = wave_params(a.kappa, a.c);
    std::vector<Row> rows;
    for (const auto& r : epw::phase_table(p, a.grid, a.rho_max)) rows.push_back({r.rho, r.H, r.h, r.g, r.E_separatrix});
    const std::vector<std::string> header{"rho", "H", "h", "g", "E_separatrix"};
    if (a.out_dir.empty()) {
        print_csv(header, rows);
    } else {
        OutputDir out(a.out_dir, ctx.command_line, ctx.config);
        out.csv("phase.csv", header, rows);
        const auto cls = epw::classify_stationary(p);
        out.json_file("phase.json", {{"params", to_json(p)},
                                     {"saddle_lambda_sq", cls.saddle_lambda_sq},
                                     {"saddle_lambda_sq_fd", cls.saddle_lambda_sq_fd},
                                     {"center_location", cls.center_location},
                                     {"center_eigen_imag_sq", cls.center_eigen_imag_sq}});
        out.finish();
    }
    return 0;
}

struct WaveArgs {
    double kappa = 0.0;
    std::string c = "crit";
    epw::ShootOptions opt;
    epw::GridSpec grid;
    std::string out;
};

inline int cmd_wave(const WaveArgs& a, const Context& ctx) {
    const epw::Params p = wave_params(a.kappa, a.c);
    const auto w = epw::shoot_wave(p, a.opt, a.grid);
    if (a.out.empty()) {
        print_csv(kWaveHeader, wave_rows(w));
        return 0;
    }
    const fs::path path(a.out);
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    OutputDir out(dir, ctx.command_line, ctx.config);
    out.csv(path.filename().string(), kWaveHeader, wave_rows(w));
    out.json_file(path.stem().string() + ".json", wave_sidecar(w, a.opt, a.grid));
    out.finish();
    return 0;
}

struct AsymArgs {
    double kappa = 0.0;
    std::pair<double, double> window = epw::kDefaultFitWindow;
    epw::ShootOptions opt;
    epw::GridSpec grid;
    std::string out_dir;
};

inline epw::PeakReport peak_report(double kappa, std::pair<double, double> window, const epw::ShootOptions& opt,
                                   const epw::GridSpec& grid) {
    const auto w = epw::shoot_wave(epw::critical_params(kappa), opt, grid);
    return kappa == 0.0 ? epw::verify_peak_cold(w, window) : epw::verify_peak_isothermal(w, window);
}

inline std::vector<Row> peak_rows(const epw::PeakReport& r) {
    std::vector<Row> rows;
    for (const auto& x : r.rows)
        rows.push_back({x.quantity, x.free_fit.exponent, x.target_exponent, x.exponent_error, x.pinned_fit.coefficient,
                        x.target_coefficient, x.coefficient_rel_error, x.free_fit.r_squared, x.free_fit.n_points,
                        x.exponent_ok, x.coefficient_ok});
    return rows;
}

inline const std::vector<std::string> kPeakHeader{"quantity",          "exponent",  "target_exponent", "exponent_error",
                                                  "coefficient",       "target_coefficient", "coefficient_rel_error",
                                                  "r_squared",         "n_points",  "exponent_ok",     "coefficient_ok"};

inline int cmd_verify_asym(const AsymArgs& a, const Context& ctx) {
    const auto rep = peak_report(a.kappa, a.window, a.opt, a.grid);
    if (a.out_dir.empty()) {
        print_csv(kPeakHeader, peak_rows(rep));
    } else {
        OutputDir out(a.out_dir, ctx.command_line, ctx.config);
        out.csv("peak_fits.csv", kPeakHeader, peak_rows(rep));
        out.json_file("peak_summary.json", to_json(rep));
        out.finish();
    }
    return 0;
}

struct ColdArgs {
    std::vector<double> kappas{1e-1, 1e-2, 1e-3};
    std::vector<double> alphas{0.2};
    std::vector<double> betas{0.5};
    std::vector<double> ps{1.2};
    epw::ShootOptions opt;
    epw::GridSpec grid;
    std::string out_dir;
};

/// Pass/fail view: every norm strictly decreasing as kappa decreases, witness above its floor.
inline json cold_summary(const epw::ConvergenceReport& rep, const std::vector<double>& kappas) {
    std::map<std::string, std::vector<double>> series;
    double witness_min = INFINITY;
    for (const auto& r : rep.rows) {
        if (r.norm_name == "Calpha_seminorm") {
            witness_min = std::min(witness_min, r.value);
            continue;
        }
        series[r.norm_name + "_" + json(r.alpha_or_p).dump()].push_back(r.value);
    }
    bool descending = true;
    for (std::size_t i = 1; i < kappas.size(); ++i) descending = descending && kappas[i] < kappas[i - 1];
    json norms = json::object();
    bool all_dec = true;
    for (const auto& [name, vals] : series) {
        bool dec = true;
        for (std::size_t i = 1; i < vals.size(); ++i) dec = dec && vals[i] < vals[i - 1];
        if (!descending) dec = false;
        norms[name] = {{"values", vals}, {"strictly_decreasing", dec}};
        all_dec = all_dec && dec;
    }
    const bool witness_ok = witness_min >= rep.witness_floor;
    return {{"kappas", kappas},   {"norms", norms},         {"witness_min", witness_min}, {"witness_floor", rep.witness_floor},
            {"witness_ok", witness_ok}, {"pair_set", rep.pair_set}, {"grid", rep.grid},          {"pass", all_dec && witness_ok}};
}

inline int cmd_cold_limit(const ColdArgs& a, const Context& ctx) {
    const auto rep = epw::cold_limit_sweep(a.kappas, a.alphas, a.betas, a.ps, a.opt, a.grid, ctx.threads);
    std::vector<Row> rows;
    for (const auto& r : rep.rows) rows.push_back({r.kappa, r.norm_name, r.alpha_or_p, r.value});
    const std::vector<std::string> header{"kappa", "norm", "alpha_or_p", "value"};
    if (a.out_dir.empty()) {
        print_csv(header, rows);
    } else {
        OutputDir out(a.out_dir, ctx.command_line, ctx.config);
        out.csv("cold_limit.csv", header, rows);
        out.json_file("cold_limit_summary.json", cold_summary(rep, a.kappas));
        out.finish();
    }
    return 0;
}

struct SimArgs {
    std::string experiment = "gaussian-v";
    std::string init;  // custom: CSV with x,rho,v on the simulation grid
    epw::SimConfig cfg;
    std::optional<double> L;
    std::string out_dir = "sim_out";
};

inline const std::vector<std::string> kSnapHeader{"x", "rho", "v", "phi"};

inline std::vector<Row> snapshot_rows(const epw::SimState& s) {
    std::vector<Row> rows;
    for (std::size_t j = 0; j < s.x.size(); ++j) rows.push_back({s.x[j], s.rho[j], s.v[j], s.phi[j]});
    return rows;
}

inline epw::InitialData custom_init(const std::string& path, const epw::SimConfig& cfg) {
    if (path.empty()) throw epw::DomainError("--experiment custom needs --init <csv with x,rho,v>");
    auto cols = read_csv_columns(path);
    for (const char* k : {"x", "rho", "v"})
        if (!cols.count(k)) throw epw::DomainError(path + ": missing column " + k);
    const auto x = cols["x"], rho = cols["rho"], v = cols["v"];
    if (static_cast<int>(x.size()) != cfg.n_modes)
        throw epw::DomainError(path + ": row count must equal --modes (" + std::to_string(cfg.n_modes) + ")");
    const double dx = 2.0 * cfg.L / cfg.n_modes;
    auto lookup = [x, dx, L = cfg.L](const std::vector<double>& f) {
        return [x, f, dx, L](double xq) {
            const long j = std::lround((xq + L) / dx);
            if (j < 0 || j >= static_cast<long>(f.size()) || std::abs(x[j] - xq) > 1e-9 * std::max(1.0, L))
                throw epw::DomainError("custom initial data is not on the simulation grid");
            return f[j];
        };
    };
    return {"custom", lookup(rho), lookup(v), cfg.L};
}

inline json run_simulation(const SimArgs& a, OutputDir& out) {
    epw::SimConfig cfg = a.cfg;
    epw::InitialData init;
    if (a.experiment == "custom") {
        if (!a.L) throw epw::DomainError("--experiment custom needs --L");
        cfg.L = *a.L;
        init = custom_init(a.init, cfg);
    } else {
        init = epw::named_experiment(a.experiment);
        cfg.L = a.L.value_or(init.L);
    }
    const auto run = epw::run_experiment(init, cfg);
    for (const auto& s : run.snapshots) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%07ld.csv", s.step);
        out.csv(name, kSnapHeader, snapshot_rows(s));
    }
    std::vector<Row> hist;
    for (const auto& h : run.history) hist.push_back({h.t, h.min_dxv, h.max_dxv, h.max_abs_dxrho, h.max_rho, h.mass});
    out.csv("history.csv", {"t", "min_dxv", "max_dxv", "max_abs_dxrho", "max_rho", "mass"}, hist);
    json rep = {{"experiment", init.name}, {"config", to_json(cfg)}, {"report", to_json(run.report)}};
    out.json_file("report.json", rep);
    return rep;
}

inline int cmd_simulate(const SimArgs& a, const Context& ctx) {
    OutputDir out(a.out_dir, ctx.command_line, ctx.config);
    const json rep = run_simulation(a, out);
    out.finish();
    const auto& r = rep["report"];
    std::cout << "termination=" << r["termination"].get<std::string>() << " t_final=" << fmt(r["t_final"].get<double>())
              << " T_star=" << fmt(r["T_star_estimate"].get<double>()) << " x_star=" << fmt(r["x_star_estimate"].get<double>())
              << " type=" << r["type"].get<std::string>() << "\n";
    return 0;
}

struct AnalyzeArgs {
    std::string snapshot;
    double threshold = 1e3;
    std::string out_dir;
};

inline int cmd_analyze_blowup(const AnalyzeArgs& a, const Context& ctx) {
    auto cols = read_csv_columns(a.snapshot);
    for (const char* k : {"x", "rho", "v"})
        if (!cols.count(k)) throw epw::DomainError(a.snapshot + ": missing column " + k);
    epw::SimState s;
    s.x = cols["x"];
    s.rho = cols["rho"];
    s.v = cols["v"];
    s.phi = cols.count("phi") ? cols["phi"] : std::vector<double>(s.x.size(), 0.0);
    if (s.x.size() < 8) throw epw::DomainError(a.snapshot + ": too few rows");
    epw::SimConfig cfg;
    cfg.n_modes = static_cast<int>(s.x.size());
    cfg.L = -s.x.front();
    cfg.blowup_threshold = a.threshold;
    const auto rep = epw::blowup_profile_analysis(s, cfg);
    const json j = {{"snapshot", a.snapshot}, {"L", cfg.L}, {"n_modes", cfg.n_modes}, {"report", to_json(rep)}};
    if (a.out_dir.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        OutputDir out(a.out_dir, ctx.command_line, ctx.config);
        out.json_file("analysis.json", j);
        out.finish();
    }
    return 0;
}

// ---- repro ------------------------------------------------------------------

inline const std::vector<std::string> kReproTargets{"speed-gap", "fig1", "fig2", "fig3", "fig5", "thickness",
                                                    "peak-asym", "cold-limit", "fig6", "fig7"};

struct ReproArgs {
    std::string target = "all";
    std::string out_dir = "repro_out";
};

inline json repro_target(const std::string& t, OutputDir& out, unsigned threads) {
    const epw::ShootOptions opt;
    const epw::GridSpec grid;
    if (t == "speed-gap") {
        const std::vector<double> ks{1e-2, 1e-4, 1e-6};
        std::vector<Row> rows;
        for (const auto& r : epw::speed_gap_scan(ks)) rows.push_back({r.kappa, r.c, r.residual, r.gap, r.gap_over_sqrt_kappa});
        out.csv("speed_gap.csv", speed_header(), rows);
        return {{"c0", epw::solve_c0().c}, {"c1_minus_sqrt2", epw::solve_c_kappa(1.0).c - std::sqrt(2.0)},
                {"gap_limit", epw::speed_gap_limit()}};
    }
    if (t == "fig1") {
        const auto w = epw::shoot_wave(epw::critical_params(1e-3), opt, grid);
        const double th = epw::transition_thickness(w, 2.0);
        out.csv("fig1_wave_kappa0.001.csv", kWaveHeader, wave_rows(w));
        return {{"kappa", 1e-3}, {"M", 2.0}, {"thickness", th}, {"reference", 0.0056},
                {"within_factor_2", th > 0.0028 && th < 0.0112}};
    }
    if (t == "fig2" || t == "fig3") {
        const double k = t == "fig2" ? 0.0 : 1.0;
        const auto w = epw::shoot_wave(epw::critical_params(k), opt, grid);
        out.csv(t + "_wave.csv", kWaveHeader, wave_rows(w));
        return wave_sidecar(w, opt, grid);
    }
    if (t == "fig5") {
        json j = json::object();
        for (double k : {0.0, 1.0}) {
            const auto p = epw::critical_params(k);
            std::vector<Row> rows;
            for (const auto& r : epw::phase_table(p, 400)) rows.push_back({r.rho, r.H, r.h, r.g, r.E_separatrix});
            const std::string name = k == 0.0 ? "fig5_phase_kappa0.csv" : "fig5_phase_kappa1.csv";
            out.csv(name, {"rho", "H", "h", "g", "E_separatrix"}, rows);
            j[name] = to_json(p);
        }
        return j;
    }
    if (t == "thickness") {
        const auto scan = epw::thickness_scan({1e-4, 3e-4, 1e-3, 3e-3, 1e-2}, 2.0, opt, grid, threads);
        std::vector<Row> rows;
        for (const auto& r : scan.rows) rows.push_back({r.kappa, r.thickness, r.over_k34});
        out.csv("thickness.csv", {"kappa", "thickness", "thickness_over_kappa_3_4"}, rows);
        return {{"loglog_slope", scan.loglog.slope}, {"r_squared", scan.loglog.r_squared}, {"M", scan.M}};
    }
    if (t == "peak-asym") {
        json j;
        for (double k : {0.0, 1.0}) {
            const auto rep = peak_report(k, epw::kDefaultFitWindow, opt, grid);
            const std::string name = k == 0.0 ? "peak_fits_kappa0.csv" : "peak_fits_kappa1.csv";
            out.csv(name, kPeakHeader, peak_rows(rep));
            j[name] = to_json(rep);
        }
        return j;
    }
    if (t == "cold-limit") {
        const std::vector<double> ks{1e-1, 1e-2, 1e-3};
        const auto rep = epw::cold_limit_sweep(ks, {0.2}, {0.5}, {1.2}, opt, grid, threads);
        std::vector<Row> rows;
        for (const auto& r : rep.rows) rows.push_back({r.kappa, r.norm_name, r.alpha_or_p, r.value});
        out.csv("cold_limit.csv", {"kappa", "norm", "alpha_or_p", "value"}, rows);
        return cold_summary(rep, ks);
    }
    if (t == "fig6" || t == "fig7") {
        SimArgs a;
        a.experiment = t == "fig6" ? "gaussian-v" : "sech-rho";
        a.cfg.t_max = t == "fig6" ? 6.0 : 12.0;
        OutputDir sub(out.path() / t, out.path().string(), "");
        const json rep = run_simulation(a, sub);
        sub.finish();
        return rep;
    }
    throw epw::DomainError("unknown repro target '" + t + "'");
}

inline int cmd_repro(const ReproArgs& a, const Context& ctx) {
    std::vector<std::string> targets;
    if (a.target == "all")
        targets = kReproTargets;
    else
        targets.push_back(a.target);
    OutputDir out(a.out_dir, ctx.command_line, ctx.config);
    json summary = json::object();
    for (const auto& t : targets) {
        std::cerr << "repro: " << t << "\n";
        summary[t] = repro_target(t, out, ctx.threads);
    }
    out.json_file("summary.json", summary);
    out.finish();
    std::cout << summary.dump(2) << "\n";
    return 0;
}

}  // namespace epwcli
