/// @file test_norms.cpp
/// Weight profiles, analytic lift, tangential/conormal/weighted norms and
/// the energy functionals.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "nsbl/norms/energy.hpp"

using namespace nsbl;

namespace {
GridPtr grid1d(int nx = 32, int ny = 192, double Ly = 8.0) {
    return Grid::make(1, nx, 2.0 * M_PI, ny, Ly, Stretching::tanh_clustered(3.0));
}
}  // namespace

TEST_CASE("theta ramp: endpoint and slope conditions") {
    const double d = 0.1;
    CHECK(weights::theta(0.0, d) == 0.0);
    CHECK(weights::theta_prime(0.0, d) == 0.0);
    CHECK(weights::theta(0.5, d) == Catch::Approx(d));
    CHECK(weights::theta_prime(0.5, d) == 0.0);
    CHECK(weights::theta(3.0, d) == d);
    double maxslope = 0.0, prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        double y = i / 1000.0;
        double v = weights::theta(y, d);
        CHECK(v >= prev);  // increasing
        prev = v;
        maxslope = std::max(maxslope, std::abs(weights::theta_prime(y, d)));
    }
    CHECK(maxslope <= 4.0 * d);
    // C^1 at the joints
    CHECK(std::abs(weights::theta_prime(0.4999, d)) < 1e-2 * d);
    CHECK(std::abs(weights::theta(1e-4, d)) < 1e-6 * d);
}

TEST_CASE("conormal weight: branches, continuity, monotonicity") {
    const double d = 0.1;
    CHECK(weights::varphi(0.5, d) == Catch::Approx(0.5 * d));
    CHECK(weights::varphi(3.0, d) == Catch::Approx(2.0 * d * 3.0 / 4.0));
    CHECK(weights::varphi(1.0, d) == Catch::Approx(d));
    CHECK(weights::varphi(2.0, d) == Catch::Approx(4.0 * d / 3.0));
    double prev = 0.0;
    for (int i = 1; i <= 4000; ++i) {
        double y = i * 1e-3;
        double v = weights::varphi(y, d);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("critical height tracks the remaining radius") {
    WeightConfig wc;
    wc.delta = 0.1;
    wc.lambda = 0.4;
    CHECK(weights::critical_height(0.0, wc) == Catch::Approx(0.5));
    double t = 0.1;
    double yc = weights::critical_height(t, wc);
    CHECK(weights::theta(yc, wc.delta) ==
          Catch::Approx(wc.delta - wc.lambda * t).epsilon(1e-10));
    CHECK(weights::critical_height(wc.delta / wc.lambda + 0.01, wc) == 0.0);
    CHECK(weights::critical_height(0.2, wc) < yc);
}

TEST_CASE("subrange quadrature integrates linear functions exactly") {
    auto g = grid1d(8, 64, 4.0);
    double a = 1.37;
    Vec w = weights::subrange_weights(*g, a);
    double s0 = 0.0, s1 = 0.0;
    for (int j = 0; j < g->ny; ++j) {
        s0 += w[j];
        s1 += w[j] * g->y[j];
    }
    CHECK(s0 == Catch::Approx(a).epsilon(1e-12));
    CHECK(s1 == Catch::Approx(0.5 * a * a).epsilon(1e-10));
}

TEST_CASE("analytic lift: mean-mode multiplier and overflow guard") {
    auto g = grid1d(8, 32, 4.0);
    WeightConfig wc;
    wc.delta = 0.1;
    wc.lambda = 0.5;
    SpectralField f(g);
    f.c.row(0).setConstant(Complex(1.0));
    double t = 0.05;
    auto lf = apply_lift(f, t, wc);
    for (int j : {0, 10, 31}) {
        double want = std::exp(weights::phi(t, g->y[j], wc));  // <0> = 1
        CHECK(std::abs(lf.c(0, j) - Complex(want)) < 1e-14);
    }
    WeightConfig big;
    big.delta = 10.0;
    big.lambda = 0.5;
    SpectralField hi(g);
    hi.c.row(3).setConstant(Complex(1.0));
    CHECK_THROWS_AS(apply_lift(hi, 0.0, big), Error);
}

TEST_CASE("tangential norm: single-mode closed forms") {
    auto g = grid1d();
    WeightConfig wc;
    auto f = SpectralField::from_function(
        g, [](double x, double, double y) { return std::sin(x) * std::exp(-y); });
    double l2sq = l2_norm(f) * l2_norm(f);
    // H^1_tan: |f|^2 + |df/dx|^2 = 2 |f|^2 for a k=1 mode
    CHECK(sq_norm(f, NormFamily::Tan, {1, false, -1.0}, 0.0, 1.0, wc) ==
          Catch::Approx(2.0 * l2sq).epsilon(1e-10));
    // half derivative: multiplier sqrt(2) on k=1
    CHECK(sq_norm(f, NormFamily::Tan, {0, true, -1.0}, 0.0, 1.0, wc) ==
          Catch::Approx(std::sqrt(2.0) * l2sq).epsilon(1e-10));
}

TEST_CASE("conormal norm matches a direct evaluation") {
    auto g = grid1d();
    WeightConfig wc;
    auto f = SpectralField::from_function(
        g, [](double x, double, double y) { return std::cos(x) * std::exp(-y) * y; });
    double got = sq_norm(f, NormFamily::Co, {1, false, -1.0}, 0.0, 1.0, wc);
    auto zf = scale_by_profile(normal_derivative(f, 1), weights::varphi_profile(*g, wc.delta));
    double want = l2_norm(f) * l2_norm(f) + l2_norm(tangential_derivative(f)) * l2_norm(tangential_derivative(f)) +
                  l2_norm(zf) * l2_norm(zf);
    CHECK(got == Catch::Approx(want).epsilon(1e-9));
}

TEST_CASE("weighted families reduce to conormal when the weight is flat") {
    auto g = grid1d();
    WeightConfig wc;
    wc.delta = 0.1;
    wc.lambda = 0.1;
    auto f = SpectralField::from_function(
        g, [](double x, double, double y) { return std::sin(2 * x) * std::exp(-2 * y); });
    double co = sq_norm(f, NormFamily::Co, {2, false, -1.0}, 0.0, 1e8, wc);
    double wl = sq_norm(f, NormFamily::WeightedLayer, {2, false, -1.0}, 0.0, 1e8, wc);
    CHECK(wl == Catch::Approx(co).epsilon(1e-9));
}

TEST_CASE("layer-weighted norm of a boundary-layer profile stays finite") {
    auto g = grid1d(16, 384, 8.0);
    WeightConfig wc;
    wc.delta = 0.1;
    wc.lambda = 0.4;
    double eps = 0.05;
    auto f = SpectralField::from_function(g, [eps](double x, double, double y) {
        double z = y / eps;
        return std::cos(x) * std::exp(-z * z);
    });
    double v = sq_norm(f, NormFamily::WeightedLayer, {2, false, -1.0}, 0.0, eps, wc);
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
    // the weight exp(2 y^2 delta / eps^2) is at most e^{0.2 z^2}, so the
    // weighted norm cannot exceed a small multiple of the layer width
    CHECK(v < 1e3);
}

TEST_CASE("layer-weighted norm lives on the strip image y <= eps z_max") {
    auto g = grid1d(16, 384, 8.0);
    WeightConfig wc;
    wc.delta = 0.02;  // keeps the bulk weight small everywhere: the exclusion
    wc.lambda = 0.4;  // below is the domain restriction, not weight clamping
    const double eps = 0.5;  // strip image reaches y = 6 on a height-8 domain
    auto layer = SpectralField::from_function(g, [eps](double x, double, double y) {
        double z = y / eps;
        return std::cos(x) * std::exp(-z * z);
    });
    auto tail = SpectralField::from_function(g, [](double x, double, double y) {
        double s = (y - 7.0) / 0.5;
        return std::abs(s) < 1.0 ? std::cos(x) * std::exp(-1.0 / (1.0 - s * s)) : 0.0;
    });
    const NormParams p{2, false, -1.0};
    double pure = sq_norm(layer, NormFamily::WeightedLayer, p, 0.0, eps, wc);
    double with_tail = sq_norm(layer + tail, NormFamily::WeightedLayer, p, 0.0, eps, wc);
    // content beyond the strip image never enters the layer family
    CHECK(with_tail == Catch::Approx(pure).epsilon(1e-12));
    // but it does enter the unrestricted conormal family
    CHECK(sq_norm(layer + tail, NormFamily::Co, p, 0.0, eps, wc) >
          1.0001 * sq_norm(layer, NormFamily::Co, p, 0.0, eps, wc));
}

TEST_CASE("energy report: zero fields and basic positivity") {
    auto g = grid1d(16, 128, 6.0);
    WeightConfig wc;
    wc.delta = 0.1;
    wc.lambda = 0.4;
    VectorField U(g);
    SpectralField we = SpectralField::zero(g), wp = SpectralField::zero(g);
    auto r0 = energy_report(U, we, wp, 0.01, 0.1, wc);
    CHECK(r0.E() == 0.0);
    CHECK(r0.K() == 0.0);

    U.u[0] = SpectralField::from_function(
        g, [](double x, double, double y) { return 1e-3 * std::sin(x) * std::exp(-y); });
    auto r1 = energy_report(U, we, wp, 0.01, 0.1, wc);
    CHECK(r1.Ev > 0.0);
    CHECK(r1.Kv > 0.0);
    CHECK(r1.Ew == 0.0);
    auto r2 = energy_report(U, we, wp, 0.01, 0.1, wc);
    CHECK(r1.Ev == r2.Ev);  // deterministic
}
