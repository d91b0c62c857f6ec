#include <algorithm>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace epwcli;

namespace {

void shoot_flags(CLI::App* sc, epw::ShootOptions& opt, epw::GridSpec& grid) {
    sc->add_option("--delta", opt.delta, "seed distance from the saddle (1, 0)")->capture_default_str();
    sc->add_option("--tol", opt.tol, "relative integrator tolerance")->capture_default_str();
    sc->add_option("--grid", grid.n, "log-spaced samples per half line")->capture_default_str();
    sc->add_option("--xi-min", grid.xi_min, "smallest |xi| on the grid")->capture_default_str();
    sc->add_option("--xi-max", grid.xi_max, "largest |xi| on the grid")->capture_default_str();
}

// Splices key=value lines from --config in front of the subcommand's own arguments.
// Keys already given on the command line are skipped, so the command line wins.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (path.empty() || out.empty()) return out;
    std::set<std::string> given;
    for (const auto& a : out)
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
    std::vector<std::string> injected;
    for (const auto& [k, v] : read_config(path)) {
        if (given.count(k)) continue;
        injected.push_back("--" + k + "=" + v);
    }
    // out[0] is the subcommand name.
    out.insert(out.begin() + 1, injected.begin(), injected.end());
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"epw: peaked solitary waves and blow-up of the Euler-Poisson system with Boltzmann electrons"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "help for every subcommand");
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads for sweeps (default: EPW_THREADS or all cores)");
    app.add_option("--config", "flat key=value file; keys are long option names, command line overrides");

    SpeedArgs speed;
    auto* sp = app.add_subcommand("speed", "critical speed c_kappa (peakon speed); --scan gives the c_0 - c_kappa gap table");
    sp->add_option("--kappa", speed.kappas, "temperature ratio, repeatable")->capture_default_str();
    sp->add_option("--tol", speed.tol, "root tolerance")->capture_default_str();
    sp->add_flag("--scan", speed.scan, "gap table; kappas must be positive and descending");
    sp->add_option("--out-dir", speed.out_dir, "write speed.csv and a manifest here instead of stdout");

    PhaseArgs phase;
    auto* ph = app.add_subcommand("phase", "phase-plane data: H, h, g and the separatrix branch on rho in [1, rho*]");
    ph->add_option("--kappa", phase.kappa)->capture_default_str();
    ph->add_option("--c", phase.c, "speed, or 'crit' for c_kappa")->capture_default_str();
    ph->add_option("--grid", phase.grid, "number of rho samples")->capture_default_str();
    ph->add_option("--rho-max", phase.rho_max, "upper rho when rho* is unbounded (kappa = 0)")->capture_default_str();
    ph->add_option("--out-dir", phase.out_dir);

    WaveArgs wave;
    auto* wv = app.add_subcommand("wave", "traveling-wave profile by shooting along the unstable manifold");
    wv->add_option("--kappa", wave.kappa)->capture_default_str();
    wv->add_option("--c", wave.c, "speed below c_kappa for a smooth wave, or 'crit' for the peakon")->capture_default_str();
    shoot_flags(wv, wave.opt, wave.grid);
    wv->add_option("--out", wave.out, "CSV path; a JSON sidecar and manifest go next to it");

    AsymArgs asym;
    std::vector<double> window;
    auto* va = app.add_subcommand("verify-asym", "power-law fits of the peakon near its crest against the closed forms");
    va->add_option("--kappa", asym.kappa)->capture_default_str();
    va->add_option("--window", window, "fit window lo,hi in |xi|")->delimiter(',')->expected(2);
    shoot_flags(va, asym.opt, asym.grid);
    va->add_option("--out-dir", asym.out_dir);

    ColdArgs cold;
    auto* cl = app.add_subcommand("cold-limit", "norms of kappa-wave minus cold-wave differences as kappa -> 0");
    cl->add_option("--kappas", cold.kappas, "descending positive kappas")->delimiter(',')->capture_default_str();
    cl->add_option("--alphas", cold.alphas, "C^{1,alpha} exponents for phi")->delimiter(',')->capture_default_str();
    cl->add_option("--betas", cold.betas, "C^beta exponents for v")->delimiter(',')->capture_default_str();
    cl->add_option("--ps", cold.ps, "L^p exponents for rho")->delimiter(',')->capture_default_str();
    shoot_flags(cl, cold.opt, cold.grid);
    cl->add_option("--out-dir", cold.out_dir);

    SimArgs sim;
    double L = 0.0;
    bool no_dealias = false;
    auto* si = app.add_subcommand("simulate", "pseudo-spectral Crank-Nicolson run of the full PDE with blow-up detection");
    si->add_option("--experiment", sim.experiment)->check(CLI::IsMember({"gaussian-v", "sech-rho", "custom"}))->capture_default_str();
    si->add_option("--init", sim.init, "custom: CSV with x,rho,v on the simulation grid");
    si->add_option("--kappa", sim.cfg.kappa)->capture_default_str();
    auto* Lopt = si->add_option("--L", L, "half length of the periodic domain (default per experiment)");
    si->add_option("--modes", sim.cfg.n_modes, "grid points, a power of two")->capture_default_str();
    si->add_option("--dt", sim.cfg.dt)->capture_default_str();
    si->add_option("--tmax", sim.cfg.t_max)->capture_default_str();
    si->add_option("--threshold", sim.cfg.blowup_threshold, "stop when min v_x < -threshold")->capture_default_str();
    si->add_option("--picard-tol", sim.cfg.picard_tol)->capture_default_str();
    si->add_option("--poisson-tol", sim.cfg.poisson_tol)->capture_default_str();
    si->add_flag("--no-dealias", no_dealias, "switch off the 2/3-rule filter");
    si->add_option("--snap-every", sim.cfg.snap_every, "snapshot stride in steps; 0 keeps first and last")->capture_default_str();
    si->add_option("--out-dir", sim.out_dir)->capture_default_str();

    AnalyzeArgs an;
    auto* ab = app.add_subcommand("analyze-blowup", "blow-up location, side signs and local exponents of a saved snapshot");
    ab->add_option("snapshot", an.snapshot, "CSV with x,rho,v[,phi]")->required();
    ab->add_option("--threshold", an.threshold)->capture_default_str();
    ab->add_option("--out-dir", an.out_dir);

    ReproArgs repro;
    std::vector<std::string> choices = kReproTargets;
    choices.push_back("all");
    auto* rp = app.add_subcommand(
        "repro",
        "reproduction pipelines: speed-gap (critical speeds and gap law), fig1 (transition layer at kappa=1e-3), "
        "fig2/fig3 (peakons at kappa=0/1), fig5 (phase planes), thickness (layer width scaling), "
        "peak-asym (crest exponents), cold-limit (kappa -> 0 norms), fig6/fig7 (PDE blow-up runs)");
    rp->add_option("--target", repro.target)->check(CLI::IsMember(choices))->capture_default_str();
    rp->add_option("--out-dir", repro.out_dir)->capture_default_str();

    if (argc <= 1) {
        std::cerr << app.help();
        return 2;
    }

    std::vector<std::string> args(argv + 1, argv + argc);
    std::string command_line = argv[0];
    for (const auto& a : args) command_line += " " + a;
    try {
        // Global options come before the subcommand name.
        std::vector<std::string> head, rest;
        std::size_t i = 0;
        for (; i < args.size(); ++i) {
            if (args[i] == "--threads") {
                head.push_back(args[i]);
                if (i + 1 < args.size()) head.push_back(args[++i]);
                continue;
            }
            if (args[i].rfind("--threads=", 0) == 0) {
                head.push_back(args[i]);
                continue;
            }
            break;
        }
        rest.assign(args.begin() + static_cast<std::ptrdiff_t>(i), args.end());
        rest = expand_config(rest);
        head.insert(head.end(), rest.begin(), rest.end());
        std::reverse(head.begin(), head.end());
        app.parse(head);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    Context ctx;
    ctx.command_line = command_line;
    ctx.threads = threads;
    try {
        if (*sp) {
            ctx.config = sp->config_to_str(true, false);
            return cmd_speed(speed, ctx);
        }
        if (*ph) {
            ctx.config = ph->config_to_str(true, false);
            return cmd_phase(phase, ctx);
        }
        if (*wv) {
            ctx.config = wv->config_to_str(true, false);
            return cmd_wave(wave, ctx);
        }
        if (*va) {
            if (!window.empty()) asym.window = {window[0], window[1]};
            ctx.config = va->config_to_str(true, false);
            return cmd_verify_asym(asym, ctx);
        }
        if (*cl) {
            ctx.config = cl->config_to_str(true, false);
            return cmd_cold_limit(cold, ctx);
        }
        if (*si) {
            if (Lopt->count() > 0) sim.L = L;
            sim.cfg.dealias = !no_dealias;
            ctx.config = si->config_to_str(true, false);
            return cmd_simulate(sim, ctx);
        }
        if (*ab) {
            ctx.config = ab->config_to_str(true, false);
            return cmd_analyze_blowup(an, ctx);
        }
        if (*rp) {
            ctx.config = rp->config_to_str(true, false);
            return cmd_repro(repro, ctx);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
