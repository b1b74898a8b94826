/// @file test_prandtl.cpp
/// Boundary-layer solvers: diffusion oracle, corrector recovery, the dual
/// (shifted-unknown) formulation against the primitive one, the first-order
/// layer forcing groups, the layer pressure density, and window monitors.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "nsbl/euler/euler.hpp"
#include "nsbl/prandtl/linearized.hpp"

using namespace nsbl;

namespace {

GridPtr zgrid(int nx = 16, int ny = 384) {
    return Grid::make(1, nx, 2.0 * M_PI, ny, 12.0, Stretching::tanh_clustered(2.0));
}

/// Iterated complementary error functions via the standard recurrence.
double ierfc(int n, double x) {
    if (n == 0) return std::erfc(x);
    if (n == 1) return std::exp(-x * x) / std::sqrt(M_PI) - x * std::erfc(x);
    return (-x * ierfc(n - 1, x) + 0.5 * ierfc(n - 2, x)) / n;
}

}  // namespace

TEST_CASE("layer diffusion: quadratic-in-time wall data matches the closed form") {
    auto g = zgrid(8);
    const double dt = 1e-3, T = 0.25;
    const int nsteps = static_cast<int>(std::round(T / dt));
    PrandtlSolver ps(g, dt);
    auto trace = [&](double t) {
        CVec v = CVec::Zero(g->nmodes());
        v[0] = t * t;
        return v;
    };
    SpectralField up;
    ps.run(nsteps, trace, [&](int n, double, const SpectralField& u, const SpectralField&) {
        if (n == nsteps) up = u;
    });

    // u(z, t) = -32 t^2 i4erfc(z / (2 sqrt t)) solves u_t = u_zz, u(0,t) = -t^2
    auto want = SpectralField::from_function(g, [&](double, double, double z) {
        return -32.0 * T * T * ierfc(4, z / (2.0 * std::sqrt(T)));
    });
    CHECK(linf_norm(up - want) < 1e-5 * linf_norm(want));
}

TEST_CASE("layer wall condition holds exactly after each step") {
    auto g = zgrid();
    PrandtlSolver ps(g, 2e-3);
    auto trace = [&](double t) {
        auto f = SpectralField::from_function(
            g, [t](double x, double, double) { return 0.2 * (t + t * t) * std::sin(x); });
        return f.wall_trace().eval();
    };
    double worst = 0.0;
    ps.run(50, trace, [&](int n, double t, const SpectralField& u, const SpectralField&) {
        if (n == 0) return;
        worst = std::max(worst, (u.wall_trace() + trace(t)).cwiseAbs().maxCoeff());
    });
    CHECK(worst < 1e-8 * 0.2);
}

TEST_CASE("recover_vp1: closed form and the fundamental-theorem identity") {
    auto g = zgrid();
    auto u0 = SpectralField::from_function(
        g, [](double x, double, double z) { return std::sin(x) * std::exp(-2.0 * z); });
    auto v = recover_vp1(u0);
    auto want = SpectralField::from_function(
        g, [](double x, double, double z) { return 0.5 * std::cos(x) * std::exp(-2.0 * z); });
    CHECK(linf_norm(v - want) < 1e-6 * linf_norm(want));

    // d/dz v + div_x u = 0
    auto ftc = normal_derivative(v, 1) + tangential_divergence({u0});
    CHECK(linf_norm(ftc) < 1e-8 * linf_norm(u0));
}

TEST_CASE("primitive and shifted formulations agree through an outer-driven run") {
    auto ge = Grid::make(1, 32, 2.0 * M_PI, 384, 8.0, Stretching::uniform());
    EulerSolver es(ge);
    const double dt = 1e-4, T = 0.1;
    const int nsteps = static_cast<int>(std::round(T / dt));

    // record wall traces of the outer flow and its pressure gradient per step
    std::vector<CVec> uew, dxpw;
    auto store = [&](const EulerState& s) {
        uew.push_back(s.U.u[0].wall_trace());
        auto p = es.recover_pressure(s.U);
        dxpw.push_back(tangential_derivative(p).wall_trace());
    };
    auto s = es.make_initial_data({1.0, 1, 2.0, 4.0});
    store(s);
    for (int n = 0; n < nsteps; ++n) {
        s = es.step_euler(s, dt);
        store(s);
    }
    auto at = [&](const std::vector<CVec>& v, double t) {
        return v[static_cast<size_t>(std::round(t / dt))];
    };

    auto g = Grid::make(1, 32, 2.0 * M_PI, 384, 12.0, Stretching::tanh_clustered(2.0));
    PrandtlSolver ps(g, dt);
    SpectralField up, ut;
    ps.run(nsteps, [&](double t) { return at(uew, t); },
           [&](int n, double, const SpectralField& u, const SpectralField&) {
               if (n == nsteps) up = u;
           });
    ps.run_tilde(nsteps, [&](double t) { return at(uew, t); },
                 [&](double t) { return at(dxpw, t); },
                 [&](int n, double, const SpectralField& u) {
                     if (n == nsteps) ut = u;
                 });

    SpectralField shifted = ut - from_wall_trace(g, at(uew, T));
    double scale = std::max(linf_norm(up), at(uew, T).cwiseAbs().maxCoeff());
    CHECK(scale > 1e-6);  // the run actually excites the layer
    CHECK(linf_norm(shifted - up) < 1e-6 * scale);
}

TEST_CASE("first-order layer: every forcing group matches its displayed formula") {
    auto g = zgrid();
    const double a0 = 0.3, a1 = 0.2, b0 = 0.1;
    auto F = [&](const std::function<double(double, double)>& f) {
        return SpectralField::from_function(g, [&](double x, double, double z) { return f(x, z); });
    };
    Order1Slice s;
    s.u0 = F([](double x, double z) { return std::sin(x) * std::exp(-2 * z); });
    s.vp1 = recover_vp1(s.u0);
    s.ue0w = F([&](double x, double) { return a0 * std::sin(x); }).wall_trace();
    s.ue1w = F([&](double x, double) { return a1 * std::cos(x); }).wall_trace();
    s.dyue0w = F([&](double x, double) { return b0 * std::sin(x); }).wall_trace();
    auto u1 = F([](double x, double z) { return std::cos(x) * std::exp(-3 * z); });

    auto E2 = [](double z) { return std::exp(-2 * z); };
    auto E3 = [](double z) { return std::exp(-3 * z); };
    std::vector<std::function<double(double, double)>> ref = {
        [&](double x, double z) {  // (u0 + ue0) dx u1
            return (std::sin(x) * E2(z) + a0 * std::sin(x)) * (-std::sin(x) * E3(z));
        },
        [&](double x, double z) {  // (vp1 - vp1(0) + z dy ve0(0)) dz u1
            double vt = 0.5 * std::cos(x) * (E2(z) - 1.0) - z * a0 * std::cos(x);
            return vt * (-3 * std::cos(x) * E3(z));
        },
        [&](double x, double z) {  // u1 dx(u0 + ue0)
            return std::cos(x) * E3(z) * (std::cos(x) * E2(z) + a0 * std::cos(x));
        },
        [&](double x, double z) {  // (ue1 + z dy ue0) dx u0
            return (a1 * std::cos(x) + z * b0 * std::sin(x)) * std::cos(x) * E2(z);
        },
        [&](double x, double z) {  // (vp2 - vp2(0) + z dy ve1(0) + z^2/2 dyy ve0(0)) dz u0
            double vt = -std::sin(x) * (E3(z) - 1.0) / 3.0 + z * a1 * std::sin(x) -
                        0.5 * z * z * b0 * std::cos(x);
            return vt * (-2 * std::sin(x) * E2(z));
        },
        [&](double x, double z) {  // u0 z dx dy ue0(0)
            return std::sin(x) * E2(z) * z * b0 * std::cos(x);
        },
        [&](double x, double z) {  // u0 dx ue1(0)
            return std::sin(x) * E2(z) * (-a1 * std::sin(x));
        },
        [&](double x, double z) {  // vp1 dy ue0(0)
            return 0.5 * std::cos(x) * E2(z) * b0 * std::sin(x);
        },
    };
    for (int i = 1; i <= 8; ++i) {
        auto got = order1_group(i, s, u1);
        auto want = F(ref[i - 1]);
        INFO("forcing group " << i);
        CHECK(linf_norm(got - want) < 1e-6 * std::max(1e-6, linf_norm(want)));
        CHECK(l2_norm(want) > 1e-4);  // each group is active, so ablation is detectable
    }
}

TEST_CASE("layer corrector order two and net flux") {
    auto g = zgrid();
    auto u1 = SpectralField::from_function(
        g, [](double x, double, double z) { return std::cos(x) * std::exp(-3 * z); });
    auto v2 = compute_vp2(u1);
    auto want = SpectralField::from_function(g, [](double x, double, double z) {
        return -std::sin(x) * std::exp(-3 * z) / 3.0;
    });
    CHECK(linf_norm(v2 - want) < 1e-6 * linf_norm(want));

    CVec f = compute_f(u1);
    CHECK(std::abs(f[0]) < 1e-12);
    CHECK((f - v2.wall_trace()).cwiseAbs().maxCoeff() < 1e-8 * f.cwiseAbs().maxCoeff());
}

TEST_CASE("layer pressure density matches a term-by-term independent assembly") {
    auto g = zgrid();
    const double a0 = 0.3;
    auto F = [&](const std::function<double(double, double)>& f) {
        return SpectralField::from_function(g, [&](double x, double, double z) { return f(x, z); });
    };
    auto u0 = F([](double x, double z) { return std::sin(x) * std::exp(-2 * z); });
    auto vp1a = F([](double x, double z) { return 0.5 * std::cos(x) * std::exp(-2 * z); });
    auto dtvp1 = F([](double x, double z) { return 0.1 * std::cos(x) * std::exp(-2 * z); });
    CVec ue0w = F([&](double x, double) { return a0 * std::sin(x); }).wall_trace();

    auto got = p2_density(u0, vp1a, dtvp1, ue0w);

    // assemble from analytic ingredients: traces differentiated symbolically
    std::vector<SpectralField> terms;
    terms.push_back(F([](double x, double z) { return 2.0 * std::cos(x) * std::exp(-2 * z); }));
    terms.push_back(F([](double x, double z) { return -0.1 * std::cos(x) * std::exp(-2 * z); }));
    terms.push_back(F([&](double x, double z) {  // -ue0 dx vp1
        return -a0 * std::sin(x) * (-0.5 * std::sin(x) * std::exp(-2 * z));
    }));
    terms.push_back(F([](double x, double z) {  // -u0 (dx ve1(0) + dx vp1)
        return -std::sin(x) * std::exp(-2 * z) *
               (0.5 * std::sin(x) - 0.5 * std::sin(x) * std::exp(-2 * z));
    }));
    terms.push_back(F([&](double x, double z) {  // -vp1 dy ve0(0), dy ve0(0) = -a0 cos x
        return 0.5 * std::cos(x) * std::exp(-2 * z) * a0 * std::cos(x);
    }));
    terms.push_back(F([](double x, double z) {  // -(ve1(0) + vp1) dz vp1
        double sum = -0.5 * std::cos(x) + 0.5 * std::cos(x) * std::exp(-2 * z);
        return -sum * (-std::cos(x) * std::exp(-2 * z));
    }));
    terms.push_back(F([&](double x, double z) {  // -z u0 dx dy ve0(0) = -z u0 (-a0 sin x)'...
        return -z * std::sin(x) * std::exp(-2 * z) * (a0 * std::sin(x));
    }));
    terms.push_back(F([&](double x, double z) {  // -z dy ve0(0) dz vp1
        return -z * (-a0 * std::cos(x)) * (-std::cos(x) * std::exp(-2 * z));
    }));
    SpectralField want = terms[0];
    for (size_t i = 1; i < terms.size(); ++i) want += terms[i];
    double scale = linf_norm(want);
    CHECK(linf_norm(got - want) < 1e-6 * scale);
    for (size_t i = 0; i < terms.size(); ++i) {
        INFO("pressure density term " << i + 1);
        CHECK(l2_norm(terms[i]) > 1e-4);  // dropping any one term is detectable
    }

    auto pp2 = compute_pp2(u0, vp1a, dtvp1, ue0w);
    CHECK(linf_norm(normal_derivative(pp2, 1) - want) < 1e-6 * scale);
}

TEST_CASE("co-advanced background equals the standalone layer run") {
    auto g = zgrid();
    const double dt = 2e-3;
    const int nsteps = 40;
    auto tr0 = [&](double t) {
        auto f = SpectralField::from_function(
            g, [t](double x, double, double) { return 0.2 * t * std::sin(x); });
        return f.wall_trace().eval();
    };
    auto tr1 = [&](double t) {
        auto f = SpectralField::from_function(
            g, [t](double x, double, double) { return 0.1 * t * std::cos(x); });
        return f.wall_trace().eval();
    };
    auto trd = [&](double t) {
        auto f = SpectralField::from_function(
            g, [t](double x, double, double) { return 0.05 * t * std::sin(x); });
        return f.wall_trace().eval();
    };

    PrandtlSolver ps(g, dt);
    SpectralField alone;
    ps.run(nsteps, tr0, [&](int n, double, const SpectralField& u, const SpectralField&) {
        if (n == nsteps) alone = u;
    });

    LinearizedPrandtlSolver lin(g, dt);
    SpectralField u0c, u1c;
    double wall_worst = 0.0;
    lin.run(nsteps, {tr0, tr1, trd},
            [&](int n, double t, const Order1Slice& s, const SpectralField& u1,
                const SpectralField&) {
                if (n == nsteps) {
                    u0c = s.u0;
                    u1c = u1;
                }
                if (n > 0)
                    wall_worst =
                        std::max(wall_worst, (u1.wall_trace() + tr1(t)).cwiseAbs().maxCoeff());
            });
    CHECK(linf_norm(u0c - alone) < 1e-13);
    CHECK(wall_worst < 1e-8 * 0.1);
    CHECK(l2_norm(u1c) > 1e-8);  // the corrector is genuinely excited

    // zero traces leave both orders at rest
    auto zero = [&](double) { return CVec::Zero(g->nmodes()).eval(); };
    double quiet = 0.0;
    lin.run(10, {zero, zero, zero},
            [&](int, double, const Order1Slice& s, const SpectralField& u1, const SpectralField&) {
                quiet = std::max({quiet, l2_norm(s.u0), l2_norm(u1)});
            });
    CHECK(quiet == 0.0);
}

TEST_CASE("window monitors: gradient cap and Gaussian decay") {
    auto g = zgrid(8, 256);
    PrandtlSolver ps(g, 1e-3);
    ps.gradient_cap = 1e-9;
    auto trace = [&](double t) {
        CVec v = CVec::Zero(g->nmodes());
        v[0] = t;
        return v;
    };
    CHECK_THROWS_AS(
        ps.run(5, trace, [](int, double, const SpectralField&, const SpectralField&) {}),
        WindowTermination);

    auto gauss = SpectralField::from_function(
        g, [](double, double, double z) { return std::exp(-z * z); });
    auto slow = SpectralField::from_function(
        g, [](double, double, double z) { return std::exp(-0.5 * z); });
    CHECK(PrandtlSolver::gaussian_weighted_sup(gauss) < 2.0);
    CHECK(PrandtlSolver::gaussian_weighted_sup(slow) > 1e4);
}
