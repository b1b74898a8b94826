#pragma once

#include "nsbl/prandtl/prandtl.hpp"

namespace nsbl {

/// v corrector one order up: v2(x, z) = int_z^inf div_x u1 dz'.
inline SpectralField compute_vp2(const SpectralField& up1) {
    if (l2_norm(up1) == 0.0) return SpectralField::zero(up1.grid, "vp2");
    auto v = vertical_tail_integral(tangential_divergence({up1}));
    v.name = "vp2";
    return v;
}

/// Net layer mass flux f(t, x) = int_0^inf div_x u1 dz, per tangential mode.
/// Mean-free by construction (every entry is a pure x-derivative).
inline CVec compute_f(const SpectralField& up1) {
    if (l2_norm(up1) == 0.0) return CVec::Zero(up1.grid->nmodes());
    auto dx = tangential_divergence({up1});
    check_decay(dx, "div_x u_p1");
    CVec f(up1.grid->nmodes());
    for (int m = 0; m < up1.grid->nmodes(); ++m) {
        CVec col = dx.c.row(m).transpose();
        f[m] = up1.grid->integrate(col);
    }
    return f;
}

/// Wall traces of the outer hierarchy needed by the first-order layer:
/// u_e0, u_e1 and d_y u_e0 at y = 0, as functions of time (modal vectors).
struct Order1Traces {
    std::function<CVec(double)> ue0w;
    std::function<CVec(double)> ue1w;
    std::function<CVec(double)> dyue0w;
};

/// Frozen-time inputs for assembling the first-order layer equation.
struct Order1Slice {
    double t = 0.0;
    SpectralField u0;    // order-0 layer velocity
    SpectralField vp1;   // its normal corrector
    CVec ue0w, ue1w, dyue0w;
};

/// The eight transport/forcing groups of the first-order layer equation,
/// d_t u1 - d_zz u1 + sum_i group_i = 0, exposed one by one so each can be
/// checked against an independently assembled reference. Wall traces of the
/// outer normal component and its derivatives are rewritten through the
/// divergence relation: d_y v_e0(0) = -d_x u_e0(0), d_y v_e1(0) = -d_x u_e1(0),
/// d_yy v_e0(0) = -d_x d_y u_e0(0), and v_e1(0) = -v_p1(., 0).
inline SpectralField order1_group(int i, const Order1Slice& s, const SpectralField& u1) {
    GridPtr g = s.u0.grid;
    auto B = [&](const CVec& tr) { return from_wall_trace(g, tr); };
    auto ik = [&](const CVec& tr) {
        CVec out(g->nmodes());
        for (int m = 0; m < g->nmodes(); ++m) {
            double k1, k2;
            g->wavevector(m, k1, k2);
            out[m] = Complex(0.0, k1) * tr[m];
        }
        return out;
    };
    switch (i) {
        case 1:  // (u0 + u_e0(0)) dx u1
            return multiply(s.u0 + B(s.ue0w), tangential_derivative(u1));
        case 2: {  // (vp1 - vp1(0) + z dy v_e0(0)) dz u1
            SpectralField vt = s.vp1;
            vt -= B(s.vp1.wall_trace());
            vt -= times_z(B(ik(s.ue0w)));
            return multiply(vt, normal_derivative(u1, 1));
        }
        case 3:  // u1 dx(u0 + u_e0(0))
            return multiply(u1, tangential_derivative(s.u0) + B(ik(s.ue0w)));
        case 4:  // (u_e1(0) + z dy u_e0(0)) dx u0
            return multiply(B(s.ue1w) + times_z(B(s.dyue0w)), tangential_derivative(s.u0));
        case 5: {  // (vp2 - vp2(0) + z dy v_e1(0) + z^2/2 dyy v_e0(0)) dz u0
            SpectralField vp2 = compute_vp2(u1);
            SpectralField vt = vp2;
            vt -= B(vp2.wall_trace());
            vt -= times_z(B(ik(s.ue1w)));
            vt -= 0.5 * times_z(B(ik(s.dyue0w)), 2);
            return multiply(vt, normal_derivative(s.u0, 1));
        }
        case 6:  // u0 z dx dy u_e0(0)
            return multiply(s.u0, times_z(B(ik(s.dyue0w))));
        case 7:  // u0 dx u_e1(0)
            return multiply(s.u0, B(ik(s.ue1w)));
        case 8:  // vp1 dy u_e0(0)
            return multiply(s.vp1, B(s.dyue0w));
        default:
            throw Error("order1_group: index must be 1..8");
    }
}

inline SpectralField order1_rhs(const Order1Slice& s, const SpectralField& u1) {
    SpectralField n = order1_group(1, s, u1);
    for (int i = 2; i <= 8; ++i) n += order1_group(i, s, u1);
    return n;
}

/// First-order layer corrector co-advanced with a fresh order-0 layer run,
/// both on the same SBDF2 clock. rec fires every step with the full slice.
class LinearizedPrandtlSolver {
public:
    LinearizedPrandtlSolver(GridPtr zgrid, double dt) : base_(std::move(zgrid), dt) {}

    const PrandtlSolver& base() const { return base_; }

    void run(int nsteps, const Order1Traces& tr,
             const std::function<void(int, double, const Order1Slice&, const SpectralField&,
                                      const SpectralField&)>& rec) const {
        GridPtr g = base_.grid_ptr();
        const double dt = base_.dt();
        auto slice = [&](double t, const SpectralField& u0) {
            Order1Slice s;
            s.t = t;
            s.u0 = u0;
            s.vp1 = recover_vp1(u0);
            s.ue0w = tr.ue0w(t);
            s.ue1w = tr.ue1w(t);
            s.dyue0w = tr.dyue0w(t);
            return s;
        };

        SpectralField u0 = SpectralField::zero(g, "up0"), u0p = u0;
        SpectralField u1 = SpectralField::zero(g, "up1"), u1p = u1;
        if (rec) {
            auto s = slice(0.0, u0);
            rec(0, 0.0, s, u1, compute_vp2(u1));
        }
        double scale = 1e-12;
        for (int n = 0; n < nsteps; ++n) {
            const double t = n * dt, t1 = (n + 1) * dt;
            scale = std::max({scale, tr.ue0w(t1).cwiseAbs().maxCoeff(),
                              tr.ue1w(t1).cwiseAbs().maxCoeff()});
            auto sn = slice(t, u0);
            SpectralField n00 = base_.transport_rhs(u0, sn.ue0w);
            SpectralField n10 = order1_rhs(sn, u1);
            CMat r0, r1;
            if (n == 0) {
                r0 = u0.c / dt - n00.c;
                r1 = u1.c / dt - n10.c;
            } else {
                auto sm = slice(t - dt, u0p);
                SpectralField n0m = base_.transport_rhs(u0p, sm.ue0w);
                SpectralField n1m = order1_rhs(sm, u1p);
                r0 = (4.0 * u0.c - u0p.c) / (2.0 * dt) - 2.0 * n00.c + n0m.c;
                r1 = (4.0 * u1.c - u1p.c) / (2.0 * dt) - 2.0 * n10.c + n1m.c;
            }
            u0p = u0;
            u1p = u1;
            u0.c = base_.implicit_solve(r0, CVec(-tr.ue0w(t1)), n == 0);
            u1.c = base_.implicit_solve(r1, CVec(-tr.ue1w(t1)), n == 0);
            base_.check_window(u0, scale);
            base_.check_window(u1, scale);
            if (rec) {
                auto s1 = slice(t1, u0);
                rec(n + 1, t1, s1, u1, compute_vp2(u1));
            }
        }
    }

private:
    PrandtlSolver base_;
};

/// The quantity whose tail integral gives the layer pressure two orders up:
/// P2 = dzz vp1 - dt vp1 - u_e0(0) dx vp1 - u0 (dx v_e1(0) + dx vp1)
///      - vp1 dy v_e0(0) - (v_e1(0) + vp1) dz vp1
///      - z u0 dx dy v_e0(0) - z dy v_e0(0) dz vp1,
/// with the outer traces rewritten via the divergence relation as above.
/// The time derivative of vp1 is an explicit input (finite-differenced by the
/// caller from neighboring steps).
inline SpectralField p2_density(const SpectralField& u0, const SpectralField& vp1,
                                const SpectralField& dtvp1, const CVec& ue0w) {
    GridPtr g = u0.grid;
    auto B = [&](const CVec& tr) { return from_wall_trace(g, tr); };
    auto mul = [&](const CVec& tr, Complex fac) {
        CVec out(g->nmodes());
        for (int m = 0; m < g->nmodes(); ++m) {
            double k1, k2;
            g->wavevector(m, k1, k2);
            out[m] = fac * Complex(0.0, k1) * tr[m];
        }
        return out;
    };
    CVec dxue0w = mul(ue0w, Complex(1.0));          // dx u_e0(0)
    CVec ve1w = -vp1.wall_trace();                  // v_e1(0) = -vp1(., 0)
    CVec dxve1w = mul(CVec(-vp1.wall_trace()), Complex(1.0));
    CVec dyve0w = CVec(-dxue0w);                    // dy v_e0(0) = -dx u_e0(0)
    CVec dxdyve0w = mul(CVec(-dxue0w), Complex(1.0));
    SpectralField dzvp1 = normal_derivative(vp1, 1);

    SpectralField P2 = normal_derivative(vp1, 2);
    P2 -= dtvp1;
    P2 -= multiply(B(ue0w), tangential_derivative(vp1));
    P2 -= multiply(u0, B(dxve1w) + tangential_derivative(vp1));
    P2 -= multiply(vp1, B(dyve0w));
    P2 -= multiply(B(ve1w) + vp1, dzvp1);
    P2 -= multiply(u0, times_z(B(dxdyve0w)));
    P2 -= multiply(times_z(B(dyve0w)), dzvp1);
    P2.name = "P2";
    return P2;
}

/// Layer pressure p2(x, z) = -int_z^inf P2 dz'.
inline SpectralField compute_pp2(const SpectralField& u0, const SpectralField& vp1,
                                 const SpectralField& dtvp1, const CVec& ue0w) {
    auto P2 = p2_density(u0, vp1, dtvp1, ue0w);
    if (l2_norm(P2) == 0.0) return SpectralField::zero(u0.grid, "pp2");
    // Every constituent of P2 is pinned or decayed at the strip top, so the
    // top row holds only differentiation round-off; drop it so the tail-decay
    // check measures the density itself, not amplified noise.
    P2.c.col(u0.grid->ny - 1).setZero();
    auto p = vertical_tail_integral(P2);
    p *= -1.0;
    p.name = "pp2";
    return p;
}

}  // namespace nsbl
