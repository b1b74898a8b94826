/// @file test_euler.cpp
/// Outer-flow solver: initial data construction, transport conservation
/// properties, time-step order, pressure recovery, and the linearized
/// corrector with inhomogeneous wall data.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "nsbl/euler/linearized.hpp"

using namespace nsbl;

namespace {
GridPtr egrid(int nx = 32, int ny = 384, double Ly = 8.0) {
    return Grid::make(1, nx, 2.0 * M_PI, ny, Ly, Stretching::uniform());
}
}  // namespace

TEST_CASE("make_initial_data: zero amplitude gives the zero state") {
    auto g = egrid(16, 64);
    EulerSolver es(g);
    auto s = es.make_initial_data({0.0, 1, 2.0, 4.0});
    CHECK(l2_norm(s.omega) == 0.0);
    CHECK(l2_norm(s.U.u[0]) == 0.0);
}

TEST_CASE("make_initial_data: divergence-free, wall-distant, analytic curl") {
    auto g = egrid();
    EulerSolver es(g);
    InitialDataSpec spec{1.0, 1, 2.0, 4.0};
    auto s = es.make_initial_data(spec);

    CHECK(l2_norm(divergence(s.U)) < 1e-12 * std::max(1.0, l2_norm(s.U.u[0])));
    CHECK(s.U.v.wall_trace().cwiseAbs().maxCoeff() < 1e-12);

    Mat w = s.omega.physical();
    // exclude the stencil halo just below the support seam
    const double halo = 5.0 * g->Ly / g->ny;
    double scale = w.cwiseAbs().maxCoeff(), below = 0.0;
    for (int j = 0; j < g->ny && g->y[j] < 2.0 - halo; ++j)
        below = std::max(below, w.col(j).cwiseAbs().maxCoeff());
    CHECK(below < 1e-10 * scale);

    // analytic curl: omega = -Lap psi = A sin(k0 x)(k0^2 chi - chi'' / half^2)
    const double mid = 3.0, half = 1.0;
    auto want = SpectralField::from_function(g, [&](double x, double, double y) {
        double sc = (y - mid) / half;
        return std::sin(x) * (bump::chi(sc) - bump::chi_dd(sc) / (half * half));
    });
    CHECK(l2_norm(s.omega - want) < 1e-6 * l2_norm(want));
}

TEST_CASE("make_initial_data: support touching the wall is refused") {
    auto g = egrid(16, 64);
    EulerSolver es(g);
    CHECK_THROWS_AS(es.make_initial_data({1.0, 1, 0.5, 2.0}), ConfigError);
}

TEST_CASE("step_euler: zero state stays zero") {
    auto g = egrid(16, 64);
    EulerSolver es(g);
    auto s = es.make_initial_data({0.0, 1, 2.0, 4.0});
    auto r = es.step_euler(s, 0.01);
    CHECK(l2_norm(r.omega) == 0.0);
}

TEST_CASE("step_euler: energy and vorticity extrema conserved on a window") {
    auto g = egrid();
    EulerSolver es(g);
    auto s = es.make_initial_data({1.0, 1, 2.0, 4.0});
    const double E0 = l2_norm(s.U.u[0]) * l2_norm(s.U.u[0]) + l2_norm(s.U.v) * l2_norm(s.U.v);
    const double wmax0 = linf_norm(s.omega);
    const double dt = 0.002;
    for (int n = 0; n < 125; ++n) s = es.step_euler(s, dt);
    CHECK(std::abs(linf_norm(s.omega) - wmax0) < 1e-4 * wmax0);
    for (int n = 0; n < 125; ++n) s = es.step_euler(s, dt);
    CHECK(s.t == Catch::Approx(0.5));
    const double E1 = l2_norm(s.U.u[0]) * l2_norm(s.U.u[0]) + l2_norm(s.U.v) * l2_norm(s.U.v);
    CHECK(std::abs(E1 - E0) < 1e-6 * E0);
}

TEST_CASE("step_euler: observed time order at least 2.8") {
    auto g = egrid(32, 256);
    EulerSolver es(g);
    auto s0 = es.make_initial_data({1.0, 1, 2.0, 4.0});
    auto advance = [&](double dt, int n) {
        auto s = s0;
        for (int i = 0; i < n; ++i) s = es.step_euler(s, dt);
        return s.omega;
    };
    auto w1 = advance(0.008, 5);
    auto w2 = advance(0.004, 10);
    auto w3 = advance(0.002, 20);
    double e12 = l2_norm(w1 - w2), e23 = l2_norm(w2 - w3);
    double order = std::log2(e12 / e23);
    CHECK(order >= 2.8);
}

TEST_CASE("step_euler: CFL violation raises") {
    auto g = egrid(32, 256);
    EulerSolver es(g);
    auto s = es.make_initial_data({1.0, 1, 2.0, 4.0});
    CHECK_THROWS_AS(es.step_euler(s, 10.0), CflViolation);
}

TEST_CASE("support monitor: vorticity near the wall is refused") {
    auto g = egrid(16, 128);
    EulerSolver es(g);
    auto low = SpectralField::from_function(g, [](double x, double, double y) {
        return std::sin(x) * bump::chi((y - 0.6) / 0.5);
    });
    CHECK_THROWS_AS(es.check_support(low), SupportErosion);
}

TEST_CASE("recover_pressure: zero flow and steady shear give zero pressure") {
    auto g = egrid(16, 128);
    EulerSolver es(g);
    VectorField Z(g);
    CHECK(l2_norm(es.recover_pressure(Z)) == 0.0);

    VectorField shear(g);
    shear.u[0] = SpectralField::from_function(
        g, [](double, double, double y) { return std::exp(-(y - 3) * (y - 3)); });
    CHECK(l2_norm(es.recover_pressure(shear)) < 1e-12);
}

TEST_CASE("recover_pressure: Poisson residual small in the interior") {
    auto g = egrid();
    EulerSolver es(g);
    auto s = es.make_initial_data({1.0, 1, 2.0, 4.0});
    auto p = es.recover_pressure(s.U);
    auto rhs = es.pressure_rhs(s.U);
    auto lap = tangential_derivative(tangential_derivative(p)) + normal_derivative(p, 2);
    auto resid = lap + rhs;  // -Lap p = rhs
    double worst = 0.0;
    Mat r = resid.physical();
    for (int j = 3; j < g->ny - 3; ++j) worst = std::max(worst, r.col(j).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-6 * std::max(1.0, linf_norm(rhs)));
}

TEST_CASE("linearized corrector: zero data gives zero; homogeneous system too") {
    auto g = egrid(16, 128);
    EulerSolver es(g);
    LinearizedEulerSolver lin(es);
    auto zero_bv = [&](double) { return CVec::Zero(g->nmodes()).eval(); };

    double w1max = 0.0;
    lin.run({0.0, 1, 2.0, 4.0}, 0.05, 5, zero_bv,
            [&](int, double, const EulerState&, const SpectralField& w1, const VectorField&) {
                w1max = std::max(w1max, l2_norm(w1));
            });
    CHECK(w1max == 0.0);

    // nonzero background, zero boundary data: corrector stays zero
    double w1max2 = 0.0;
    lin.run({1.0, 1, 2.0, 4.0}, 0.05, 5, zero_bv,
            [&](int, double, const EulerState&, const SpectralField& w1, const VectorField&) {
                w1max2 = std::max(w1max2, l2_norm(w1));
            });
    CHECK(w1max2 == 0.0);
}

TEST_CASE("linearized corrector: wall trace of v1 matches the boundary data") {
    auto g = egrid(32, 256);
    EulerSolver es(g);
    LinearizedEulerSolver lin(es);
    auto bv = [&](double t) {
        auto f = SpectralField::from_function(
            g, [t](double x, double, double) { return 0.01 * (1 + t) * std::sin(x); });
        return f.wall_trace().eval();
    };
    double worst = 0.0;
    lin.run({1.0, 1, 2.0, 4.0}, 0.05, 10, bv,
            [&](int, double t, const EulerState&, const SpectralField&, const VectorField& U1) {
                CVec want = bv(t);
                worst = std::max(worst, (U1.v.wall_trace() - want).cwiseAbs().maxCoeff());
            });
    CHECK(worst < 1e-6 * 0.02);
}

TEST_CASE("linearized corrector: mean-carrying wall trace is refused") {
    auto g = egrid(16, 128);
    EulerSolver es(g);
    LinearizedEulerSolver lin(es);
    CVec bad = CVec::Zero(g->nmodes());
    bad[0] = Complex(1.0);
    CHECK_THROWS_AS(lin.reconstruct(SpectralField::zero(g), bad), Error);
}
