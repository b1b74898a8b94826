#pragma once

#include <map>
#include <vector>

#include "nsbl/euler/linearized.hpp"
#include "nsbl/expansion/resample.hpp"
#include "nsbl/prandtl/linearized.hpp"

namespace nsbl {

/// Two-term outer + two-term layer expansion sampled on a shared clock.
/// Outer fields live on the half-space grid, layer fields on the strip grid
/// in the fast variable z.
struct ExpansionTrajectory {
    GridPtr outer, layer;
    double dt = 0.0;
    int nsteps = 0;

    std::vector<VectorField> Ue0, Ue1;           // outer orders 0 and 1
    std::vector<SpectralField> up0, vp1;         // layer order 0
    std::vector<SpectralField> up1, vp2;         // layer order 1
    std::vector<CVec> f;                         // net layer flux trace
    std::vector<CVec> uew, ue1w, dyue0w;         // cached wall traces

    double time(int n) const { return n * dt; }
    void require_step(int n) const {
        if (n < 0 || n > nsteps) throw WindowMismatch("expansion: step outside shared window");
    }
};

/// Deterministic pipeline: outer flow -> order-0 layer -> outer corrector ->
/// order-1 layer, all on one clock. The outer corrector's wall condition is
/// v1(t, x, 0) = -vp1(t, x, 0) so the composite normal velocity cancels at
/// order eps at the wall.
inline ExpansionTrajectory build_expansions(GridPtr outer, GridPtr layer,
                                            const InitialDataSpec& spec, double dt, int nsteps) {
    ExpansionTrajectory X;
    X.outer = outer;
    X.layer = layer;
    X.dt = dt;
    X.nsteps = nsteps;
    const int nn = nsteps + 1;
    X.Ue0.resize(nn);
    X.Ue1.resize(nn);
    X.up0.resize(nn);
    X.vp1.resize(nn);
    X.up1.resize(nn);
    X.vp2.resize(nn);
    X.f.resize(nn);
    X.uew.resize(nn);
    X.ue1w.resize(nn);
    X.dyue0w.resize(nn);

    // pass 1: outer flow wall traces
    EulerSolver es(outer);
    {
        auto s = es.make_initial_data(spec);
        X.uew[0] = s.U.u[0].wall_trace();
        for (int n = 0; n < nsteps; ++n) {
            s = es.step_euler(s, dt);
            X.uew[n + 1] = s.U.u[0].wall_trace();
        }
    }

    // pass 2: order-0 layer, for the corrector's wall data
    PrandtlSolver ps(layer, dt);
    std::vector<CVec> gw(nn);
    ps.run(nsteps, [&](double t) { return X.uew[static_cast<size_t>(std::round(t / dt))]; },
           [&](int n, double, const SpectralField&, const SpectralField& v1) {
               gw[n] = v1.wall_trace();
           });

    // pass 3: outer corrector (re-advances the background on the same stages)
    LinearizedEulerSolver lin(es);
    lin.run(spec, dt * nsteps, nsteps,
            [&](double t) { return CVec(-gw[static_cast<size_t>(std::round(t / dt))]); },
            [&](int n, double, const EulerState& bg, const SpectralField&, const VectorField& U1) {
                X.Ue0[n] = bg.U;
                X.Ue1[n] = U1;
                X.uew[n] = bg.U.u[0].wall_trace();
                X.ue1w[n] = U1.u[0].wall_trace();
                X.dyue0w[n] = normal_derivative(bg.U.u[0], 1).wall_trace();
            });

    // pass 4: order-1 layer
    LinearizedPrandtlSolver lps(layer, dt);
    auto lookup = [&](const std::vector<CVec>& v) {
        return [&v, dt](double t) { return v[static_cast<size_t>(std::round(t / dt))]; };
    };
    lps.run(nsteps, {lookup(X.uew), lookup(X.ue1w), lookup(X.dyue0w)},
            [&](int n, double, const Order1Slice& s, const SpectralField& u1,
                const SpectralField& v2) {
                X.up0[n] = s.u0;
                X.vp1[n] = s.vp1;
                X.up1[n] = u1;
                X.vp2[n] = v2;
                X.f[n] = compute_f(u1);
            });
    return X;
}

/// Assembled approximate solution at one time.
struct ApproximateSolution {
    double eps = 0.0, t = 0.0;
    SpectralField u, v, p;
    CVec f;
};

struct ResidualSet {
    SpectralField Rh, Rv;
    double l2_h = 0.0, l2_v = 0.0, linf = 0.0;
};

/// Assembles the composite expansion at a given eps and evaluates the
/// momentum residuals of the composite system by operator substitution.
class ExpansionAssembler {
public:
    ExpansionAssembler(const ExpansionTrajectory& X, double eps)
        : X_(X), eps_(eps), res_(X.layer, X.outer, eps), ell_(X.outer) {
        if (eps <= 0 || eps > 0.5) throw ConfigError("assemble: eps must lie in (0, 1/2]");
        ey_.resize(X_.outer->ny);
        for (int j = 0; j < X_.outer->ny; ++j) ey_[j] = std::exp(-X_.outer->y[j]);
    }

    const ExpansionTrajectory& trajectory() const { return X_; }
    double eps() const { return eps_; }
    const LayerResampler& resampler() const { return res_; }

    /// u_a = ue0 + eps ue1 + up0(y/eps) + eps up1(y/eps)
    /// v_a = ve0 + eps ve1 + eps vp1(y/eps) + eps^2 vp2(y/eps)
    /// p_a = pe0 + eps pe1 + eps^2 pp2(y/eps)
    ApproximateSolution assemble(int n, bool with_pressure = true) const {
        X_.require_step(n);
        ApproximateSolution a;
        a.eps = eps_;
        a.t = X_.time(n);
        a.f = X_.f[n];
        a.u = X_.Ue0[n].u[0] + eps_ * X_.Ue1[n].u[0] + res_(X_.up0[n]) + eps_ * res_(X_.up1[n]);
        a.v = X_.Ue0[n].v + eps_ * X_.Ue1[n].v + eps_ * res_(X_.vp1[n]) +
              (eps_ * eps_) * res_(X_.vp2[n]);
        a.u.name = "u_a";
        a.v.name = "v_a";
        if (with_pressure) {
            a.p = pe0(n) + eps_ * pe1(n) + (eps_ * eps_) * res_(pp2(n));
            a.p.name = "p_a";
        }
        return a;
    }

    /// Outer pressure of the background flow (Poisson solve, zero wall flux).
    SpectralField pe0(int n) const {
        X_.require_step(n);
        SpectralField rhs = quad_rhs(X_.Ue0[n], X_.Ue0[n]);
        // The wall flux vanishes analytically; the discrete rhs mean carries
        // the trajectory's truncation error, so absorb it into the mean flux
        // to keep the mean-mode problem solvable.
        CVec flux = CVec::Zero(X_.outer->nmodes());
        flux[0] = X_.outer->integrate(CVec(rhs.c.row(0).transpose()));
        return ell_.solve_neumann(rhs, &flux);
    }

    /// Corrector pressure: -Lap p1 = div(U0 . grad U1 + U1 . grad U0) with
    /// Neumann wall data dp1/dy(0) = -(dt ve1 + ue0 dx ve1 + ve1 dy ve0)(0),
    /// the normal momentum balance at the wall (ve0 and dx ve0 vanish there).
    SpectralField pe1(int n) const {
        X_.require_step(n);
        SpectralField rhs = quad_rhs(X_.Ue0[n], X_.Ue1[n]);
        rhs *= 2.0;
        CVec flux = pe1_flux(n);
        // The mean-mode flux and the mean of the rhs agree analytically; on a
        // discrete trajectory they differ by the scheme's truncation error, so
        // project the mean flux onto the discretely solvable value.
        flux[0] = X_.outer->integrate(CVec(rhs.c.row(0).transpose()));
        return ell_.solve_neumann(rhs, &flux);
    }

    /// Layer pressure two orders up, with the time derivative of vp1 taken
    /// from the stored trajectory by one-sided/centered 4th-order differences.
    SpectralField pp2(int n) const {
        X_.require_step(n);
        SpectralField dtvp1 = field_time_derivative(X_.vp1, n);
        return compute_pp2(X_.up0[n], X_.vp1[n], dtvp1, X_.uew[n]);
    }

    /// Momentum residuals by direct substitution: the composite momentum
    /// operator applied to the assembled fields, with d/dt by 4th-order
    /// differences across neighboring assembly times. Returns (Rh, Rv) with
    /// the sign convention LHS = -Rh (resp. -Rv).
    ResidualSet residual_by_substitution(int n) const {
        X_.require_step(n);
        int j0;
        Vec w = time_weights(n, j0);
        std::vector<ApproximateSolution> window;
        for (int i = 0; i < static_cast<int>(w.size()); ++i) window.push_back(assemble(j0 + i, false));
        ApproximateSolution a = assemble(n, true);

        SpectralField dtu(X_.outer, "dtu"), dtv(X_.outer, "dtv");
        for (int i = 0; i < static_cast<int>(w.size()); ++i) {
            dtu.c += w[i] * window[i].u.c;
            dtv.c += w[i] * window[i].v.c;
        }
        SpectralField veff =
            a.v - (eps_ * eps_) * scale_by_profile(from_wall_trace(X_.outer, a.f), ey_);
        ResidualSet r;
        r.Rh = dtu + multiply(a.u, tangential_derivative(a.u)) +
               multiply(veff, normal_derivative(a.u, 1)) + tangential_derivative(a.p) -
               (eps_ * eps_) * laplacian(a.u);
        r.Rv = dtv + multiply(a.u, tangential_derivative(a.v)) +
               multiply(veff, normal_derivative(a.v, 1)) + normal_derivative(a.p, 1) -
               (eps_ * eps_) * laplacian(a.v);
        r.Rh *= -1.0;
        r.Rv *= -1.0;
        r.Rh.name = "R_h";
        r.Rv.name = "R_v";
        r.l2_h = l2_norm(r.Rh);
        r.l2_v = l2_norm(r.Rv);
        r.linf = std::max(linf_norm(r.Rh), linf_norm(r.Rv));
        return r;
    }

    /// Closed-form outer residual (tangential component): the substitution
    /// target restricted to outer fields,
    /// -R_eh = eps^2 (ue1 dx ue1 + ve1 dy ue1 - f e^{-y}(dy ue0 + eps dy ue1))
    ///         - eps^2 Lap(ue0 + eps ue1).
    SpectralField closed_Re_h(int n) const {
        X_.require_step(n);
        const VectorField &U0 = X_.Ue0[n], &U1 = X_.Ue1[n];
        SpectralField fe = scale_by_profile(from_wall_trace(X_.outer, X_.f[n]), ey_);
        SpectralField m = multiply(U1.u[0], tangential_derivative(U1.u[0])) +
                          multiply(U1.v, normal_derivative(U1.u[0], 1)) -
                          multiply(fe, normal_derivative(U0.u[0], 1) +
                                           eps_ * normal_derivative(U1.u[0], 1)) -
                          laplacian(U0.u[0] + eps_ * U1.u[0]);
        m *= -(eps_ * eps_);
        m.name = "R_eh";
        return m;
    }

    /// Normal component of the closed-form outer residual.
    SpectralField closed_Re_v(int n) const {
        X_.require_step(n);
        const VectorField &U0 = X_.Ue0[n], &U1 = X_.Ue1[n];
        SpectralField fe = scale_by_profile(from_wall_trace(X_.outer, X_.f[n]), ey_);
        SpectralField m = multiply(U1.u[0], tangential_derivative(U1.v)) +
                          multiply(U1.v, normal_derivative(U1.v, 1)) -
                          multiply(fe, normal_derivative(U0.v, 1) +
                                           eps_ * normal_derivative(U1.v, 1)) -
                          laplacian(U0.v + eps_ * U1.v);
        m *= -(eps_ * eps_);
        m.name = "R_ev";
        return m;
    }

    /// Labeled magnitudes of the layer-residual groups (tangential equation):
    /// the eps^2 block, the eps^1 block, the three Taylor remainders in the
    /// normal velocity, the two Taylor remainders in the tangential velocity,
    /// the tangential viscous remainder, and the layer pressure gradient.
    std::vector<std::pair<std::string, double>> layer_residual_groups(int n) const {
        X_.require_step(n);
        const VectorField &U0 = X_.Ue0[n], &U1 = X_.Ue1[n];
        SpectralField P0 = res_(X_.up0[n]), P1 = res_(X_.up1[n]);
        SpectralField Q1 = res_(X_.vp1[n]), Q2 = res_(X_.vp2[n]);
        SpectralField dzP0 = res_(normal_derivative(X_.up0[n], 1));
        SpectralField dzP1 = res_(normal_derivative(X_.up1[n], 1));
        SpectralField fe = scale_by_profile(from_wall_trace(X_.outer, X_.f[n]), ey_);
        SpectralField ff = from_wall_trace(X_.outer, X_.f[n]);
        auto B = [&](const CVec& tr) { return from_wall_trace(X_.outer, tr); };
        auto wall = [&](const SpectralField& g) { return B(g.wall_trace()); };

        const double e2 = eps_ * eps_;
        std::vector<std::pair<std::string, double>> out;
        auto push = [&](const std::string& name, const SpectralField& g) {
            out.emplace_back(name, l2_norm(g));
        };

        SpectralField g_eps2 =
            multiply(U1.u[0], tangential_derivative(P1)) +
            multiply(P1, tangential_derivative(U1.u[0])) +
            multiply(P1, tangential_derivative(P1)) +
            multiply(Q1, normal_derivative(U1.u[0], 1)) +
            multiply(Q2, normal_derivative(U0.u[0], 1) + eps_ * normal_derivative(U1.u[0], 1)) -
            multiply(fe, dzP1) + multiply(Q2, dzP1);
        g_eps2 *= e2;
        push("eps2_block", g_eps2);

        SpectralField one_minus_fe = ff - fe;
        SpectralField g_eps1 =
            multiply(U0.u[0] - wall(U0.u[0]), tangential_derivative(P1)) +
            multiply(tangential_derivative(U1.u[0]) - wall(tangential_derivative(U1.u[0])), P0) +
            multiply(U1.u[0] - wall(U1.u[0]), tangential_derivative(P0)) +
            multiply(tangential_derivative(U0.u[0]) - wall(tangential_derivative(U0.u[0])), P1) +
            multiply(U1.v - wall(U1.v), dzP1) +
            multiply(normal_derivative(U0.u[0], 1) - wall(normal_derivative(U0.u[0], 1)), Q1) +
            multiply(one_minus_fe, dzP0);
        g_eps1 *= eps_;
        push("eps1_block", g_eps1);

        // Taylor remainders of the outer normal velocity at the wall
        SpectralField ve0_t2 = U0.v - times_z(B(normal_derivative(U0.v, 1).wall_trace())) -
                               0.5 * times_z(B(normal_derivative(U0.v, 2).wall_trace()), 2);
        push("taylor_ve0_dzup0_over_eps", (1.0 / eps_) * multiply(ve0_t2, dzP0));
        SpectralField ve0_t1 = U0.v - times_z(B(normal_derivative(U0.v, 1).wall_trace()));
        push("taylor_ve0_dzup1", multiply(ve0_t1, dzP1));
        SpectralField ve1_t1 = U1.v - wall(U1.v) -
                               times_z(B(normal_derivative(U1.v, 1).wall_trace()));
        push("taylor_ve1_dzup0", multiply(ve1_t1, dzP0));

        // Taylor remainders of the outer tangential velocity
        SpectralField ue0_t1 = U0.u[0] - wall(U0.u[0]) -
                               times_z(B(normal_derivative(U0.u[0], 1).wall_trace()));
        push("taylor_ue0_dxup0", multiply(ue0_t1, tangential_derivative(P0)));
        SpectralField dxue0 = tangential_derivative(U0.u[0]);
        SpectralField dxue0_t1 = dxue0 - wall(dxue0) -
                                 times_z(B(normal_derivative(dxue0, 1).wall_trace()));
        push("taylor_dxue0_up0", multiply(dxue0_t1, P0));

        SpectralField visc = tangential_derivative(tangential_derivative(P0 + eps_ * P1));
        visc *= -e2;
        push("tangential_viscous", visc);
        push("layer_pressure_gradient", e2 * tangential_derivative(res_(pp2(n))));
        return out;
    }

    /// 4th-order time-derivative of a stored field series at step n.
    SpectralField field_time_derivative(const std::vector<SpectralField>& s, int n) const {
        int j0;
        Vec w = time_weights(n, j0);
        SpectralField r(s[n].grid, "dt(" + s[n].name + ")");
        for (int i = 0; i < static_cast<int>(w.size()); ++i) r.c += w[i] * s[j0 + i].c;
        return r;
    }

    SpectralField laplacian(const SpectralField& f) const {
        return tangential_derivative(tangential_derivative(f)) + normal_derivative(f, 2);
    }

private:
    Vec time_weights(int n, int& j0) const {
        const int w = std::min(5, X_.nsteps + 1);
        if (w < 3) throw WindowMismatch("expansion: too few steps for a time derivative");
        j0 = std::clamp(n - 2, 0, X_.nsteps + 1 - w);
        Vec xs(w);
        for (int i = 0; i < w; ++i) xs[i] = (j0 + i) * X_.dt;
        return detail::fornberg_weights(n * X_.dt, xs, 1);
    }

    CVec trace_time_derivative(const std::function<CVec(int)>& s, int n) const {
        int j0;
        Vec w = time_weights(n, j0);
        CVec r = CVec::Zero(X_.outer->nmodes());
        for (int i = 0; i < static_cast<int>(w.size()); ++i) r += w[i] * s(j0 + i);
        return r;
    }

    /// Wall flux for the corrector pressure, assembled in physical space:
    /// -(dt ve1 + ue0 dx ve1 + ve1 dy ve0) traced at the wall.
    CVec pe1_flux(int n) const {
        GridPtr g = X_.outer;
        CVec dtve1w = trace_time_derivative([&](int m) { return X_.Ue1[m].v.wall_trace(); }, n);
        SpectralField adv = multiply(X_.Ue0[n].u[0], tangential_derivative(X_.Ue1[n].v)) +
                            multiply(X_.Ue1[n].v, normal_derivative(X_.Ue0[n].v, 1));
        CVec flux = -(dtve1w + adv.wall_trace());
        return flux;
    }

    /// div(A . grad B) for divergence-free A, B (symmetrized in the caller
    /// when A != B): sum_ij d_i A_j d_j B_i.
    SpectralField quad_rhs(const VectorField& A, const VectorField& B) const {
        auto ax = tangential_derivative(A.u[0]);
        auto ay = normal_derivative(A.u[0], 1);
        auto avx = tangential_derivative(A.v);
        auto avy = normal_derivative(A.v, 1);
        auto bx = tangential_derivative(B.u[0]);
        auto by = normal_derivative(B.u[0], 1);
        auto bvx = tangential_derivative(B.v);
        auto bvy = normal_derivative(B.v, 1);
        return 0.5 * (multiply(ax, bx) + multiply(avx, by) + multiply(ay, bvx) +
                      multiply(avy, bvy) + multiply(bx, ax) + multiply(bvx, ay) +
                      multiply(by, avx) + multiply(bvy, avy));
    }

    const ExpansionTrajectory& X_;
    double eps_;
    LayerResampler res_;
    mutable HalfspaceElliptic ell_;
    Vec ey_;
};

}  // namespace nsbl
