/// Command-line driver for the boundary-layer study pipeline.
///
/// Subcommands:
///   study      full pipeline: errors, residuals, energies, rates, artifacts
///   residuals  residual magnitudes only
///   energies   energy functionals only
///   rates      error/residual sweep and the fitted convergence rates
///
/// Exit codes: 0 success, 2 configuration error, 3 stage refusal
/// (under-resolution, decay/compatibility failure), 4 a requested rate or
/// monitoring criterion failed.

#include <CLI11.hpp>

#include <iostream>

#include "nsbl/study/study.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string outdir;
    std::vector<double> eps;
    double T = -1.0, dt = -1.0;
    bool split = false;
};

nsbl::StudyConfig resolve(const CliOptions& o) {
    nsbl::StudyConfig c;
    if (!o.config_path.empty()) c = nsbl::StudyConfig::load(o.config_path);
    if (!o.outdir.empty()) c.outdir = o.outdir;
    if (!o.eps.empty()) c.eps = o.eps;
    if (o.T > 0) c.T = o.T;
    if (o.dt > 0) c.dt = o.dt;
    if (o.split) c.vorticity_split = true;
    c.validate();
    return c;
}

void add_common(CLI::App* cmd, CliOptions& o) {
    cmd->add_option("-c,--config", o.config_path, "JSON configuration file");
    cmd->add_option("-o,--outdir", o.outdir, "output directory");
    cmd->add_option("--eps", o.eps, "viscosity-parameter sweep (descending)");
    cmd->add_option("-T,--final-time", o.T, "final time");
    cmd->add_option("--dt", o.dt, "shared clock step");
}

int run_study_cmd(const nsbl::StudyConfig& c, bool check_rates, bool check_energy) {
    nsbl::StudyReport rep = nsbl::run_study(c);
    nsbl::write_study(rep, c.outdir);

    bool ok = true;
    for (const auto& r : rep.rates) {
        std::cout << "rate " << r.quantity << ": slope = " << nsbl::fmt17(r.slope)
                  << " (fit residual " << nsbl::fmt17(r.residual) << ")\n";
        if (check_rates) {
            const bool is_resid = r.quantity.find("residual") != std::string::npos;
            const bool is_linf = r.quantity.find("Linf") != std::string::npos;
            const double lo = is_resid ? 1.6 : (is_linf ? 0.6 : 0.7);
            const double hi = is_resid ? 2.4 : (is_linf ? 1.4 : 1.3);
            if (r.slope < lo || r.slope > hi) {
                std::cout << "rate " << r.quantity << ": outside [" << lo << ", " << hi << "]\n";
                ok = false;
            }
        }
    }
    for (const auto& sw : rep.sweeps) {
        std::cout << "eps = " << nsbl::fmt17(sw.eps)
                  << ": sup L2 error = " << nsbl::fmt17(sw.sup_l2_u)
                  << ", sup residual = " << nsbl::fmt17(sw.sup_resid_l2)
                  << ", energy ratio = " << nsbl::fmt17(sw.energy_ratio) << '\n';
        if (check_energy && sw.energy_ratio > 10.0) {
            std::cout << "eps = " << nsbl::fmt17(sw.eps) << ": energy ratio exceeds 10\n";
            ok = false;
        }
    }
    for (const auto& [name, v] : rep.crosscheck)
        std::cout << "crosscheck " << name << ": rel diff = " << nsbl::fmt17(v) << '\n';
    if (rep.split)
        std::cout << "split: final defect_rel = " << nsbl::fmt17(rep.split->final_defect_rel)
                  << " over window " << nsbl::fmt17(rep.split->window) << '\n';
    std::cout << "artifacts written to " << c.outdir << '\n';
    return ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"boundary-layer zero-viscosity study"};
    app.require_subcommand(1);

    CliOptions o;
    auto* study = app.add_subcommand("study", "full pipeline with all artifacts");
    add_common(study, o);
    study->add_flag("--split", o.split, "also run the vorticity-split diagnostic");
    bool enforce = false;
    study->add_flag("--enforce", enforce, "exit 4 if rates or energy monitoring fail");

    auto* residuals = app.add_subcommand("residuals", "residual magnitudes only");
    add_common(residuals, o);
    auto* energies = app.add_subcommand("energies", "energy functionals only");
    add_common(energies, o);
    auto* rates = app.add_subcommand("rates", "sweep and fitted rates, enforced");
    add_common(rates, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int r = app.exit(e);
        return r == 0 ? 0 : 2;
    }

    try {
        nsbl::StudyConfig c = resolve(o);
        if (study->parsed()) return run_study_cmd(c, enforce, enforce);
        if (rates->parsed()) return run_study_cmd(c, true, false);
        if (residuals->parsed()) {
            c.vorticity_split = false;
            nsbl::StudyReport rep = nsbl::run_study(c);
            nsbl::write_study(rep, c.outdir);
            for (const auto& sw : rep.sweeps)
                for (const auto& r : sw.residuals)
                    std::cout << "eps = " << nsbl::fmt17(sw.eps) << " t = " << nsbl::fmt17(r.t)
                              << ": |Rh| = " << nsbl::fmt17(r.l2_h)
                              << ", |Rv| = " << nsbl::fmt17(r.l2_v) << '\n';
            return 0;
        }
        if (energies->parsed()) {
            c.vorticity_split = false;
            nsbl::StudyReport rep = nsbl::run_study(c);
            nsbl::write_study(rep, c.outdir);
            for (const auto& sw : rep.sweeps)
                for (const auto& e : sw.energies)
                    std::cout << "eps = " << nsbl::fmt17(sw.eps) << " t = " << nsbl::fmt17(e.t)
                              << ": E/eps^2 = " << nsbl::fmt17(e.E() / (sw.eps * sw.eps)) << '\n';
            return 0;
        }
        return 0;
    } catch (const nsbl::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const nsbl::StageRefusal& e) {
        std::cerr << "stage refusal: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
