/// @file test_study.cpp
/// Study pipeline: configuration validation and round trip, log-log rate
/// fitting against exact and noisy synthetic data, the closed-form residual
/// cross-check, byte-identical report reruns, and plot-script determinism.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "nsbl/study/study.hpp"

using namespace nsbl;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Small but real configuration that exercises the whole pipeline quickly.
StudyConfig small_config(const std::string& outdir) {
    StudyConfig c;
    c.nx = 16;
    c.ny = 160;
    c.nz = 128;
    c.eps = {0.2, 0.1, 0.05};
    c.T = 0.02;
    c.dt = 2e-3;
    c.sample_stride = 5;
    c.outdir = outdir;
    return c;
}

}  // namespace

TEST_CASE("configuration validation") {
    StudyConfig c;
    CHECK_NOTHROW(c.validate());

    SECTION("empty eps list is rejected") {
        c.eps.clear();
        CHECK_THROWS_AS(c.validate(), ConfigError);
    }
    SECTION("non-descending eps is rejected") {
        c.eps = {0.05, 0.1};
        CHECK_THROWS_AS(c.validate(), ConfigError);
    }
    SECTION("eps above 1/2 is rejected") {
        c.eps = {0.6, 0.1};
        CHECK_THROWS_AS(c.validate(), ConfigError);
    }
    SECTION("non-integral T/dt is rejected") {
        c.dt = 3e-3;
        CHECK_THROWS_AS(c.validate(), ConfigError);
    }
    SECTION("nonpositive weight parameters are rejected") {
        c.lambda = 0.0;
        CHECK_THROWS_AS(c.validate(), ConfigError);
    }
}

TEST_CASE("configuration JSON round trip preserves the digest") {
    StudyConfig c;
    c.eps = {0.2, 0.1, 0.05};
    c.seed = 7;
    c.outdir = "somewhere";
    auto d = StudyConfig::from_json(c.to_json());
    CHECK(d.canonical() == c.canonical());
    CHECK(d.digest() == c.digest());
    CHECK(d.digest().size() == 64);
}

TEST_CASE("rate fit recovers exact power laws") {
    std::vector<std::pair<double, double>> p1, p2;
    for (double e : {0.2, 0.1, 0.05, 0.025}) {
        p1.emplace_back(e, 3.0 * e);
        p2.emplace_back(e, 0.7 * e * e);
    }
    auto r1 = fit_rate("first_order", p1);
    auto r2 = fit_rate("second_order", p2);
    CHECK(std::abs(r1.slope - 1.0) < 1e-12);
    CHECK(std::abs(r2.slope - 2.0) < 1e-12);
    CHECK(r1.residual < 1e-12);
    CHECK(std::abs(std::exp(r1.intercept) - 3.0) < 1e-12);
}

TEST_CASE("rate fit tolerates 1% multiplicative noise") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> noise(-0.01, 0.01);
    std::vector<std::pair<double, double>> pts;
    for (double e : {0.2, 0.1, 0.05, 0.025, 0.0125})
        pts.emplace_back(e, 0.5 * e * e * (1.0 + noise(rng)));
    auto r = fit_rate("noisy_second_order", pts);
    CHECK(r.slope > 1.9);
    CHECK(r.slope < 2.1);
    CHECK(r.residual < 0.05);
}

TEST_CASE("rate fit rejects degenerate input") {
    CHECK_THROWS_AS(fit_rate("too_few", {{0.1, 1.0}, {0.05, 0.5}}), ConfigError);
    CHECK_THROWS_AS(fit_rate("nonpositive", {{0.1, 1.0}, {0.05, 0.5}, {0.025, -0.1}}),
                    ConfigError);
    CHECK_THROWS_AS(fit_rate("same_eps", {{0.1, 1.0}, {0.1, 0.5}, {0.1, 0.2}}), ConfigError);
}

TEST_CASE("closed-form residual cross-check agrees to 1e-6 on exact flows") {
    auto go = Grid::make(1, 16, 2.0 * M_PI, 192, 8.0, Stretching::tanh_clustered(3.0));
    auto gl = Grid::make(1, 16, 2.0 * M_PI, 64, 12.0, Stretching::tanh_clustered(2.0));
    auto cases = residual_crosscheck_cases(go, gl);
    REQUIRE(cases.size() == 2);
    for (const auto& [name, rel] : cases) {
        INFO(name);
        CHECK(rel < 1e-6);
    }
}

TEST_CASE("study reruns produce byte-identical reports") {
    auto c = small_config("study_det_a");
    auto rep1 = run_study(c);
    write_study(rep1, "study_det_a");
    auto rep2 = run_study(c);
    write_study(rep2, "study_det_b");

    for (const char* name : {"errors.csv", "residuals.csv", "energies.csv", "rates.csv",
                             "rates_points.csv", "invariants.csv", "crosscheck.csv",
                             "config.json", "plots.py"}) {
        INFO(name);
        std::string a = slurp(std::filesystem::path("study_det_a") / name);
        CHECK(a == slurp(std::filesystem::path("study_det_b") / name));
        CHECK(!a.empty());
    }
    // the manifest digests are content hashes, so they agree too
    CHECK(slurp("study_det_a/manifest.json") == slurp("study_det_b/manifest.json"));

    // report sanity: errors recorded per tick, rates fitted, energies finite
    REQUIRE(rep1.sweeps.size() == 3);
    for (const auto& sw : rep1.sweeps) {
        CHECK(sw.errors.size() == static_cast<size_t>(c.nsteps() + 1));
        CHECK(sw.sup_l2_u > 0.0);
        for (const auto& e : sw.energies) CHECK(std::isfinite(e.E()));
    }
    CHECK(rep1.rates.size() == 3);
}

TEST_CASE("empty report yields a valid, deterministic plot script") {
    StudyReport rep;
    std::string s1 = plots_script(rep), s2 = plots_script(rep);
    CHECK(s1 == s2);
    CHECK(s1.find("matplotlib") != std::string::npos);
    CHECK(s1.find("nothing to plot") != std::string::npos);
}
