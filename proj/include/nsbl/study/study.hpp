#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "nsbl/norms/energy.hpp"
#include "nsbl/ns/vorticity_split.hpp"
#include "nsbl/study/digest.hpp"

namespace nsbl {

/// Deterministic "%.17g" rendering, enough digits to round-trip a double.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct StudyConfig {
    // outer half-space grid
    int nx = 64, ny = 384;
    double Ly = 8.0, beta_outer = 3.0;
    // layer strip grid
    int nz = 384;
    double Lz = 12.0, beta_layer = 2.0;

    InitialDataSpec initial{1.0, 1, 2.0, 4.0};
    std::vector<double> eps{0.1, 0.05, 0.025};
    double T = 0.25, dt = 1e-3;
    int ns_refine = 1;      // viscous substeps per shared clock tick
    int sample_stride = 10; // residual/energy sampling cadence in ticks

    std::string outdir = "study_out";
    bool vorticity_split = false;
    bool split_energies = true;  // evolve the vorticity halves for the energies
    bool residual_crosscheck = true;
    unsigned long long seed = 0;

    // energy-functional weights; lambda defaults to 4x the observed advection
    // scale, which puts the seed window delta / (2 lambda) inside the run
    double delta = 0.1, lambda = 4.0;
    int m_star = 2;

    int nsteps() const { return static_cast<int>(std::round(T / dt)); }

    void validate() const {
        if (nx < 8 || ny < 16 || nz < 16) throw ConfigError("config: grid too small");
        if (Ly <= 0 || Lz <= 0) throw ConfigError("config: domain heights must be positive");
        if (eps.empty()) throw ConfigError("config: eps list must not be empty");
        for (size_t i = 0; i < eps.size(); ++i) {
            if (eps[i] <= 0 || eps[i] > 0.5)
                throw ConfigError("config: eps values must lie in (0, 1/2]");
            if (i > 0 && eps[i] >= eps[i - 1])
                throw ConfigError("config: eps values must be distinct and descending");
        }
        if (T <= 0 || dt <= 0) throw ConfigError("config: T and dt must be positive");
        if (std::abs(T / dt - std::round(T / dt)) > 1e-9)
            throw ConfigError("config: T must be an integer number of clock ticks");
        if (nsteps() < 4) throw ConfigError("config: need at least 4 clock ticks");
        if (ns_refine < 1) throw ConfigError("config: ns_refine must be >= 1");
        if (sample_stride < 1) throw ConfigError("config: sample_stride must be >= 1");
        if (delta <= 0 || lambda <= 0)
            throw ConfigError("config: delta and lambda must be positive");
        if (m_star < 1 || m_star > 4) throw ConfigError("config: m_star must be in [1,4]");
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["nx"] = nx;
        j["ny"] = ny;
        j["Ly"] = Ly;
        j["beta_outer"] = beta_outer;
        j["nz"] = nz;
        j["Lz"] = Lz;
        j["beta_layer"] = beta_layer;
        j["initial"] = {{"A", initial.A}, {"k0", initial.k0}, {"a", initial.a}, {"b", initial.b}};
        j["eps"] = eps;
        j["T"] = T;
        j["dt"] = dt;
        j["ns_refine"] = ns_refine;
        j["sample_stride"] = sample_stride;
        j["outdir"] = outdir;
        j["vorticity_split"] = vorticity_split;
        j["split_energies"] = split_energies;
        j["residual_crosscheck"] = residual_crosscheck;
        j["seed"] = seed;
        j["delta"] = delta;
        j["lambda"] = lambda;
        j["m_star"] = m_star;
        return j;
    }

    static StudyConfig from_json(const nlohmann::json& j) {
        StudyConfig c;
        auto get = [&](const char* k, auto& dst) {
            if (j.contains(k)) dst = j.at(k).get<std::decay_t<decltype(dst)>>();
        };
        get("nx", c.nx);
        get("ny", c.ny);
        get("Ly", c.Ly);
        get("beta_outer", c.beta_outer);
        get("nz", c.nz);
        get("Lz", c.Lz);
        get("beta_layer", c.beta_layer);
        if (j.contains("initial")) {
            const auto& i = j.at("initial");
            if (i.contains("A")) c.initial.A = i.at("A").get<double>();
            if (i.contains("k0")) c.initial.k0 = i.at("k0").get<int>();
            if (i.contains("a")) c.initial.a = i.at("a").get<double>();
            if (i.contains("b")) c.initial.b = i.at("b").get<double>();
        }
        get("eps", c.eps);
        get("T", c.T);
        get("dt", c.dt);
        get("ns_refine", c.ns_refine);
        get("sample_stride", c.sample_stride);
        get("outdir", c.outdir);
        get("vorticity_split", c.vorticity_split);
        get("split_energies", c.split_energies);
        get("residual_crosscheck", c.residual_crosscheck);
        get("seed", c.seed);
        get("delta", c.delta);
        get("lambda", c.lambda);
        get("m_star", c.m_star);
        return c;
    }

    static StudyConfig load(const std::filesystem::path& p) {
        std::ifstream in(p);
        if (!in) throw ConfigError("config: cannot read " + p.string());
        nlohmann::json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: parse error: ") + e.what());
        }
        return from_json(j);
    }

    /// Canonical serialization (sorted keys) used for digests and caching.
    std::string canonical() const { return to_json().dump(); }
    std::string digest() const { return sha256_hex(canonical()); }

    /// Digest of the fields that determine the expansion build only.
    std::string build_digest() const {
        StudyConfig c = *this;
        c.eps = {};
        c.outdir.clear();
        c.vorticity_split = false;
        c.split_energies = false;
        c.residual_crosscheck = false;
        c.ns_refine = 1;
        c.sample_stride = 1;
        c.seed = 0;
        c.delta = 0;
        c.lambda = 0;
        c.m_star = 0;
        return sha256_hex(c.to_json().dump());
    }

    GridPtr make_outer() const {
        return Grid::make(1, nx, 2.0 * M_PI, ny, Ly, Stretching::tanh_clustered(beta_outer));
    }
    GridPtr make_layer() const {
        return Grid::make(1, nx, 2.0 * M_PI, nz, Lz, Stretching::tanh_clustered(beta_layer));
    }
};

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

struct RateFit {
    std::string quantity;
    std::vector<std::pair<double, double>> points;  // (eps, value)
    double slope = 0.0, intercept = 0.0, residual = 0.0;
};

/// Least-squares slope in log-log coordinates with the root-mean-square
/// residual of the fit.
inline RateFit fit_rate(std::string quantity, std::vector<std::pair<double, double>> points) {
    if (points.size() < 3) throw ConfigError("rate fit: need at least 3 points");
    const int n = static_cast<int>(points.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [e, v] : points) {
        if (e <= 0 || v <= 0) throw ConfigError("rate fit: values must be positive");
        const double x = std::log(e), y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    RateFit r;
    r.quantity = std::move(quantity);
    r.points = std::move(points);
    const double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-14) throw ConfigError("rate fit: degenerate abscissae");
    r.slope = (n * sxy - sx * sy) / det;
    r.intercept = (sy * sxx - sx * sxy) / det;
    double ss = 0;
    for (auto& [e, v] : r.points) {
        const double d = std::log(v) - (r.intercept + r.slope * std::log(e));
        ss += d * d;
    }
    r.residual = std::sqrt(ss / n);
    return r;
}

// ---------------------------------------------------------------------------
// Report bundle
// ---------------------------------------------------------------------------

struct ResidualSample {
    double t = 0.0;
    double l2_h = 0.0, l2_v = 0.0, linf = 0.0;
    std::vector<std::pair<std::string, double>> groups;
};

struct InvariantAudit {
    double div_max = 0.0;        // assembled divergence, relative
    double wall_u_max = 0.0;     // assembled tangential wall trace
    double wall_v_max = 0.0;     // assembled v(0) - eps^2 f
    double ns_div_max = 0.0;     // viscous divergence
    double ns_noslip_max = 0.0;  // viscous wall traces
};

struct SweepResult {
    double eps = 0.0;
    std::vector<ErrorSample> errors;         // one per clock tick
    std::vector<ResidualSample> residuals;   // sampled ticks
    std::vector<EnergyReport> energies;      // sampled ticks
    InvariantAudit audit;
    double sup_l2_u = 0.0, sup_linf_u = 0.0, sup_l2_v = 0.0, sup_linf_v = 0.0;
    double sup_resid_l2 = 0.0;
    // blow-up trend proxy: E(T) / E(T/2). The error, and with it E, starts at
    // exactly zero for well-prepared data, so a ratio against the earliest
    // samples would only measure the smooth ramp from zero; the second half of
    // the window is where a growing trend would have to show.
    double energy_ratio = 0.0;
};

struct SplitSummary {
    double eps = 0.0, window = 0.0;
    std::vector<std::array<double, 3>> rows;  // t, defect_abs, defect_rel
    double final_defect_rel = 0.0, max_wref = 0.0;
};

struct StudyReport {
    StudyConfig config;
    std::vector<SweepResult> sweeps;
    std::vector<RateFit> rates;
    std::vector<std::pair<std::string, double>> crosscheck;  // case -> rel diff
    std::optional<SplitSummary> split;
};

// ---------------------------------------------------------------------------
// Expansion-build cache (the eps sweep shares one build)
// ---------------------------------------------------------------------------

inline std::shared_ptr<const ExpansionTrajectory> cached_expansion_build(const StudyConfig& c) {
    static std::map<std::string, std::shared_ptr<const ExpansionTrajectory>> cache;
    const std::string key = c.build_digest();
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto X = std::make_shared<ExpansionTrajectory>(
        build_expansions(c.make_outer(), c.make_layer(), c.initial, c.dt, c.nsteps()));
    cache[key] = X;
    return X;
}

// ---------------------------------------------------------------------------
// Residual cross-check on manufactured exact flows
// ---------------------------------------------------------------------------

/// Compares the closed-form outer residual with operator substitution on
/// steady flows where both are exact: a pair of shear profiles and a
/// divergence-free potential corrector. On time-stepped trajectories the
/// two sides differ by the scheme's truncation error, so exact agreement is
/// audited here, where the time derivative vanishes identically.
inline std::vector<std::pair<std::string, double>> residual_crosscheck_cases(GridPtr go,
                                                                             GridPtr gl) {
    auto steady = [&](const VectorField& U0, const VectorField& U1) {
        ExpansionTrajectory X;
        X.outer = go;
        X.layer = gl;
        X.dt = 1e-3;
        X.nsteps = 4;
        SpectralField zl = SpectralField::zero(gl);
        for (int n = 0; n <= 4; ++n) {
            X.Ue0.push_back(U0);
            X.Ue1.push_back(U1);
            X.up0.push_back(zl);
            X.vp1.push_back(zl);
            X.up1.push_back(zl);
            X.vp2.push_back(zl);
            X.f.push_back(CVec::Zero(go->nmodes()));
            X.uew.push_back(U0.u[0].wall_trace());
            X.ue1w.push_back(U1.u[0].wall_trace());
            X.dyue0w.push_back(normal_derivative(U0.u[0], 1).wall_trace());
        }
        return X;
    };
    std::vector<std::pair<std::string, double>> out;
    {
        VectorField U0(go), U1(go);
        U0.u[0] = SpectralField::from_function(
            go, [](double, double, double y) { return std::exp(-0.5 * y); });
        U1.u[0] = SpectralField::from_function(
            go, [](double, double, double y) { return y * std::exp(-y); });
        auto X = steady(U0, U1);
        ExpansionAssembler A(X, 0.2);
        auto r = A.residual_by_substitution(2);
        auto reh = A.closed_Re_h(2);
        auto rev = A.closed_Re_v(2);
        const double s = std::max({l2_norm(reh), l2_norm(rev), 1e-30});
        out.emplace_back("steady_shears",
                         std::max(l2_norm(r.Rh - reh), l2_norm(r.Rv - rev)) / s);
    }
    {
        VectorField U0(go), U1(go);
        auto psi = SpectralField::from_function(go, [](double x, double, double y) {
            return std::sin(x) * y * y * std::exp(-2.0 * y);
        });
        U1.u[0] = normal_derivative(psi, 1);
        U1.v = tangential_derivative(psi);
        U1.v *= -1.0;
        auto X = steady(U0, U1);
        ExpansionAssembler A(X, 0.25);
        auto r = A.residual_by_substitution(2);
        auto reh = A.closed_Re_h(2);
        auto rev = A.closed_Re_v(2);
        const double s = std::max({l2_norm(reh), l2_norm(rev), 1e-30});
        out.emplace_back("potential_corrector",
                         std::max(l2_norm(r.Rh - reh), l2_norm(r.Rv - rev)) / s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Study pipeline
// ---------------------------------------------------------------------------

inline SweepResult run_sweep_member(const ExpansionTrajectory& X, const StudyConfig& c,
                                    double eps) {
    SweepResult sw;
    sw.eps = eps;
    ExpansionAssembler A(X, eps);
    LayerResampler res(X.layer, X.outer, eps);
    NSSolver ns(X.outer, eps, c.dt / c.ns_refine);
    WeightConfig wc{c.delta, c.lambda, c.m_star, c.Lz};

    // the energy functionals weight the two vorticity halves differently, so
    // they are fed from the evolved decomposition; without it the layer part
    // of the error would meet the near-wall outer weight and overflow
    std::unique_ptr<VorticitySplitSolver> split;
    if (c.split_energies) split = std::make_unique<VorticitySplitSolver>(X, eps);

    NSState s = ns.initial_state(c.initial);
    auto sample_tick = [&](int n, const NSState& st) {
        VorticitySplitFrame sf;
        if (split) sf = split->ingest(st);

        SpectralField du = st.U.u[0] - X.Ue0[n].u[0] - res(X.up0[n]);
        SpectralField dv = st.U.v - X.Ue0[n].v - eps * res(X.vp1[n]);
        sw.errors.push_back({st.t, l2_norm(du), l2_norm(dv), linf_norm(du), linf_norm(dv)});

        if (n % c.sample_stride != 0 && n != X.nsteps) return;
        auto a = A.assemble(n, false);
        auto r = A.residual_by_substitution(n);
        ResidualSample rs{st.t, r.l2_h, r.l2_v, r.linf, A.layer_residual_groups(n)};
        sw.residuals.push_back(std::move(rs));

        // invariants of the assembled and viscous states
        const double scale = std::max(1.0, linf_norm(a.u));
        sw.audit.wall_u_max = std::max(sw.audit.wall_u_max,
                                       a.u.wall_trace().cwiseAbs().maxCoeff() / scale);
        sw.audit.wall_v_max = std::max(
            sw.audit.wall_v_max,
            (a.v.wall_trace() - eps * eps * a.f).cwiseAbs().maxCoeff() / scale);
        auto div = tangential_derivative(a.u) + normal_derivative(a.v, 1);
        sw.audit.div_max = std::max(
            sw.audit.div_max, l2_norm(div) / std::max(1.0, l2_norm(tangential_derivative(a.u))));
        auto nsdiv = tangential_derivative(st.U.u[0]) + normal_derivative(st.U.v, 1);
        const double nscale = std::max(1.0, linf_norm(st.U.u[0]));
        sw.audit.ns_div_max = std::max(sw.audit.ns_div_max, l2_norm(nsdiv) / nscale);
        sw.audit.ns_noslip_max = std::max(
            sw.audit.ns_noslip_max,
            std::max(st.U.u[0].wall_trace().cwiseAbs().maxCoeff(),
                     st.U.v.wall_trace().cwiseAbs().maxCoeff()) / nscale);

        // energy functionals of the full error against the assembled solution
        VectorField err(X.outer);
        err.u[0] = st.U.u[0] - a.u;
        err.v = st.U.v - a.v;
        EnergyReport er;
        if (split) {
            er = energy_report(err, sf.we, sf.wp, st.t, eps, wc);
        } else {
            SpectralField werr = tangential_derivative(err.v) - normal_derivative(err.u[0], 1);
            SpectralField wzero = SpectralField::zero(X.outer);
            er = energy_report(err, werr, wzero, st.t, eps, wc);
        }
        sw.energies.push_back(er);
    };

    sample_tick(0, s);
    for (int n = 0; n < X.nsteps; ++n) {
        for (int i = 0; i < c.ns_refine; ++i) s = ns.step_ns(s);
        sample_tick(n + 1, s);
    }

    for (const auto& e : sw.errors) {
        sw.sup_l2_u = std::max(sw.sup_l2_u, e.l2_u);
        sw.sup_linf_u = std::max(sw.sup_linf_u, e.linf_u);
        sw.sup_l2_v = std::max(sw.sup_l2_v, e.l2_v);
        sw.sup_linf_v = std::max(sw.sup_linf_v, e.linf_v);
    }
    for (const auto& r : sw.residuals)
        sw.sup_resid_l2 = std::max(sw.sup_resid_l2, std::hypot(r.l2_h, r.l2_v));
    if (sw.energies.size() >= 2) {
        const double mid = sw.energies[sw.energies.size() / 2].E();
        const double fin = sw.energies.back().E();
        if (mid > 0.0)
            sw.energy_ratio = fin / mid;
        else if (fin > 0.0)
            sw.energy_ratio = std::numeric_limits<double>::infinity();
    }
    return sw;
}

inline StudyReport run_study(const StudyConfig& c) {
    c.validate();
    StudyReport rep;
    rep.config = c;
    auto X = cached_expansion_build(c);

    for (double eps : c.eps) rep.sweeps.push_back(run_sweep_member(*X, c, eps));

    std::vector<std::pair<double, double>> p_l2, p_linf, p_res;
    for (const auto& sw : rep.sweeps) {
        p_l2.emplace_back(sw.eps, sw.sup_l2_u);
        p_linf.emplace_back(sw.eps, sw.sup_linf_u);
        p_res.emplace_back(sw.eps, sw.sup_resid_l2);
    }
    if (rep.sweeps.size() >= 3) {
        rep.rates.push_back(fit_rate("sup_t_L2_error_u", p_l2));
        rep.rates.push_back(fit_rate("sup_t_Linf_error_u", p_linf));
        rep.rates.push_back(fit_rate("sup_t_L2_residual", p_res));
    }

    if (c.residual_crosscheck)
        rep.crosscheck = residual_crosscheck_cases(c.make_outer(), c.make_layer());

    if (c.vorticity_split) {
        const double eps = c.eps.front();
        const int wsteps = std::min(X->nsteps, static_cast<int>(std::round(0.1 / c.dt)));
        NSSolver ns(X->outer, eps, c.dt);
        std::vector<NSState> frames;
        ns.run(ns.initial_state(c.initial), wsteps,
               [&](int, const NSState& s) { frames.push_back(s); });
        auto r = evolve_vorticity_split(*X, eps, frames, wsteps);
        SplitSummary ss;
        ss.eps = eps;
        ss.window = wsteps * c.dt;
        for (const auto& f : r.frames) ss.rows.push_back({f.t, f.defect_abs, f.defect_rel});
        ss.final_defect_rel = r.frames.back().defect_rel;
        ss.max_wref = r.max_wref_l2;
        rep.split = std::move(ss);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Artifact emission
// ---------------------------------------------------------------------------

namespace detail_study {

inline void write_file(const std::filesystem::path& p, const std::string& content,
                       std::map<std::string, std::string>& manifest) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("study: cannot write " + p.string());
    out << content;
    out.close();
    manifest[p.filename().string()] = sha256_hex(content);
}

}  // namespace detail_study

/// Deterministic plotting scripts for the error-vs-eps and energy-vs-time
/// figures; reads the CSVs written next to it, no interactive component.
inline std::string plots_script(const StudyReport& rep) {
    std::ostringstream s;
    s << "#!/usr/bin/env python3\n"
      << "# Generated from the study report; regenerate by rerunning the study.\n"
      << "import csv\n"
      << "import matplotlib\n"
      << "matplotlib.use('Agg')\n"
      << "import matplotlib.pyplot as plt\n\n";
    if (rep.sweeps.empty()) {
        s << "# empty report: nothing to plot\n";
        return s.str();
    }
    s << "def load(name):\n"
      << "    with open(name) as f:\n"
      << "        rows = list(csv.DictReader(f))\n"
      << "    return rows\n\n"
      << "rates = load('rates_points.csv')\n"
      << "fig, ax = plt.subplots()\n"
      << "for q in sorted({r['quantity'] for r in rates}):\n"
      << "    pts = [(float(r['eps']), float(r['value'])) for r in rates if r['quantity'] == q]\n"
      << "    pts.sort()\n"
      << "    ax.loglog([p[0] for p in pts], [p[1] for p in pts], 'o-', label=q)\n"
      << "ax.set_xlabel('eps')\n"
      << "ax.set_ylabel('sup_t value')\n"
      << "ax.legend()\n"
      << "fig.savefig('error_vs_eps.png', dpi=150)\n\n"
      << "en = load('energies.csv')\n"
      << "fig, ax = plt.subplots()\n"
      << "for e in sorted({r['eps'] for r in en}, key=float, reverse=True):\n"
      << "    rows = [r for r in en if r['eps'] == e]\n"
      << "    ax.plot([float(r['t']) for r in rows], [float(r['E_over_eps2']) for r in rows],\n"
      << "            label='eps=' + e)\n"
      << "ax.set_xlabel('t')\n"
      << "ax.set_ylabel('E / eps^2')\n"
      << "ax.legend()\n"
      << "fig.savefig('energy_vs_t.png', dpi=150)\n";
    return s.str();
}

/// Writes every artifact of a study and a manifest listing each file with a
/// content digest. Identical reports produce byte-identical files.
inline void write_study(const StudyReport& rep, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::map<std::string, std::string> manifest;

    detail_study::write_file(dir / "config.json", rep.config.to_json().dump(2) + "\n", manifest);

    {
        std::ostringstream s;
        s << "t,eps,errL2_u,errL2_v,errLinf_u,errLinf_v\n";
        for (const auto& sw : rep.sweeps)
            for (const auto& e : sw.errors)
                s << fmt17(e.t) << ',' << fmt17(sw.eps) << ',' << fmt17(e.l2_u) << ','
                  << fmt17(e.l2_v) << ',' << fmt17(e.linf_u) << ',' << fmt17(e.linf_v) << '\n';
        detail_study::write_file(dir / "errors.csv", s.str(), manifest);
    }
    {
        std::ostringstream s;
        s << "t,eps,Rh_L2,Rv_L2,R_Linf,group,group_L2\n";
        for (const auto& sw : rep.sweeps)
            for (const auto& r : sw.residuals)
                for (const auto& [name, mag] : r.groups)
                    s << fmt17(r.t) << ',' << fmt17(sw.eps) << ',' << fmt17(r.l2_h) << ','
                      << fmt17(r.l2_v) << ',' << fmt17(r.linf) << ',' << name << ','
                      << fmt17(mag) << '\n';
        detail_study::write_file(dir / "residuals.csv", s.str(), manifest);
    }
    {
        std::ostringstream s;
        s << "t,eps,Ev,Kv,Ew,Kw,E_over_eps2\n";
        for (const auto& sw : rep.sweeps)
            for (const auto& e : sw.energies)
                s << fmt17(e.t) << ',' << fmt17(sw.eps) << ',' << fmt17(e.Ev) << ','
                  << fmt17(e.Kv) << ',' << fmt17(e.Ew) << ',' << fmt17(e.Kw) << ','
                  << fmt17(e.E() / (sw.eps * sw.eps)) << '\n';
        detail_study::write_file(dir / "energies.csv", s.str(), manifest);
    }
    {
        std::ostringstream s;
        s << "quantity,slope,intercept,fit_residual,npoints\n";
        for (const auto& r : rep.rates)
            s << r.quantity << ',' << fmt17(r.slope) << ',' << fmt17(r.intercept) << ','
              << fmt17(r.residual) << ',' << r.points.size() << '\n';
        detail_study::write_file(dir / "rates.csv", s.str(), manifest);

        std::ostringstream sp;
        sp << "quantity,eps,value\n";
        for (const auto& r : rep.rates)
            for (const auto& [e, v] : r.points)
                sp << r.quantity << ',' << fmt17(e) << ',' << fmt17(v) << '\n';
        detail_study::write_file(dir / "rates_points.csv", sp.str(), manifest);
    }
    if (!rep.crosscheck.empty()) {
        std::ostringstream s;
        s << "case,rel_diff\n";
        for (const auto& [name, v] : rep.crosscheck) s << name << ',' << fmt17(v) << '\n';
        detail_study::write_file(dir / "crosscheck.csv", s.str(), manifest);
    }
    if (rep.split) {
        std::ostringstream s;
        s << "t,defect_abs,defect_rel\n";
        for (const auto& row : rep.split->rows)
            s << fmt17(row[0]) << ',' << fmt17(row[1]) << ',' << fmt17(row[2]) << '\n';
        detail_study::write_file(dir / "split.csv", s.str(), manifest);
    }
    {
        std::ostringstream s;
        s << "eps,div_max,wall_u_max,wall_v_max,ns_div_max,ns_noslip_max,energy_ratio\n";
        for (const auto& sw : rep.sweeps)
            s << fmt17(sw.eps) << ',' << fmt17(sw.audit.div_max) << ','
              << fmt17(sw.audit.wall_u_max) << ',' << fmt17(sw.audit.wall_v_max) << ','
              << fmt17(sw.audit.ns_div_max) << ',' << fmt17(sw.audit.ns_noslip_max) << ','
              << fmt17(sw.energy_ratio) << '\n';
        detail_study::write_file(dir / "invariants.csv", s.str(), manifest);
    }
    detail_study::write_file(dir / "plots.py", plots_script(rep), manifest);

    nlohmann::json m;
    m["config_digest"] = rep.config.digest();
    for (const auto& [name, dig] : manifest) m["files"][name] = dig;
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << m.dump(2) << "\n";
}

}  // namespace nsbl
