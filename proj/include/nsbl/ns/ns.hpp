#pragma once

#include <memory>

#include "nsbl/expansion/expansion.hpp"

namespace nsbl {

/// Full viscous solution at one time: streamfunction representation, so the
/// velocity is divergence-free to round-off by construction.
struct NSState {
    double t = 0.0;
    double eps = 0.0;
    SpectralField psi;    // per-mode streamfunction; the k = 0 row is unused
    SpectralField omega;  // scalar vorticity dx v - dy u
    SpectralField p;      // recovered pressure
    VectorField U;
};

/// Viscous solver at viscosity eps^2 with no-slip walls (d = 1).
///
/// Vorticity-streamfunction form per tangential mode: the vorticity update
/// (implicit diffusion, explicit transport via SBDF2) and the streamfunction
/// inversion are solved as one coupled linear system, so the no-slip pair
/// psi(0) = psi'(0) = 0 is imposed exactly without an intermediate projection:
/// the streamfunction representation itself is the exact discrete projector.
class NSSolver {
public:
    NSSolver(GridPtr g, double eps, double dt)
        : g_(std::move(g)), eps_(eps), dt_(dt), ell_(g_) {
        if (g_->d != 1) throw StageRefusal("ns", "only d = 1 flows are implemented");
        if (eps <= 0.0) throw ConfigError("ns: eps must be positive");
        if (dt <= 0.0) throw ConfigError("ns: dt must be positive");
        check_resolution();
    }

    const Grid& grid() const { return *g_; }
    GridPtr grid_ptr() const { return g_; }
    double eps() const { return eps_; }
    double dt() const { return dt_; }

    double cfl_max = 0.5;

    /// Optional body force (t -> force field), evaluated at the new time
    /// level inside each step. Used by the manufactured-solution tests.
    std::function<VectorField(double)> body_force;

    /// Same stream-function bump data as the inviscid solver; it satisfies
    /// no-slip exactly because the bump is supported away from the wall.
    NSState initial_state(const InitialDataSpec& spec) {
        spec.validate(*g_);
        const double mid = 0.5 * (spec.a + spec.b), half = 0.5 * (spec.b - spec.a);
        auto psi = SpectralField::from_function(g_, [&](double x, double, double y) {
            return spec.A * std::sin(spec.k0 * x) * bump::chi((y - mid) / half);
        });
        return from_streamfunction(psi, 0.0);
    }

    /// State from a prescribed streamfunction (psi(0) = psi'(0) = 0 assumed).
    NSState from_streamfunction(const SpectralField& psi, double t) {
        NSState s;
        s.t = t;
        s.eps = eps_;
        s.psi = psi;
        s.psi.name = "psi";
        s.omega = tangential_derivative(tangential_derivative(psi)) + normal_derivative(psi, 2);
        s.omega *= -1.0;
        s.omega.name = "omega";
        s.U = VectorField(g_);
        s.U.u[0] = normal_derivative(psi, 1);
        s.U.v = tangential_derivative(psi);
        s.U.v *= -1.0;
        s.p = recover_pressure(s.U, t);
        history_valid_ = false;
        return s;
    }

    /// One IMEX step: viscous terms implicit, transport explicit (SBDF2 with
    /// an SBDF1 start). Restarting from a state off the internal clock
    /// silently re-primes the multistep history.
    NSState step_ns(const NSState& s) {
        check_cfl(s.U);
        const bool first = !history_valid_ || std::abs(s.t - expected_t_) > 1e-12 * (1.0 + s.t);
        const double sigma = first ? 1.0 : 1.5;

        SpectralField Nw = multiply(s.U.u[0], tangential_derivative(s.omega)) +
                           multiply(s.U.v, normal_derivative(s.omega, 1));
        SpectralField Nu = multiply(s.U.u[0], tangential_derivative(s.U.u[0])) +
                           multiply(s.U.v, normal_derivative(s.U.u[0], 1));

        CMat rhs_w;
        CVec rhs_u0;
        if (first) {
            rhs_w = s.omega.c / dt_ - Nw.c;
            rhs_u0 = s.U.u[0].c.row(0).transpose() / dt_ - Nu.c.row(0).transpose();
        } else {
            rhs_w = (2.0 * s.omega.c - 0.5 * prev_omega_) / dt_ - (2.0 * Nw.c - prev_Nw_);
            rhs_u0 = (2.0 * s.U.u[0].c.row(0).transpose() - 0.5 * prev_u0_) / dt_ -
                     (2.0 * Nu.c.row(0).transpose() - prev_Nu0_);
        }
        if (body_force) {
            VectorField F = body_force(s.t + dt_);
            SpectralField Fw = tangential_derivative(F.v) - normal_derivative(F.u[0], 1);
            rhs_w += Fw.c;
            rhs_u0 += F.u[0].c.row(0).transpose();
        }

        prev_omega_ = s.omega.c;
        prev_Nw_ = Nw.c;
        prev_u0_ = s.U.u[0].c.row(0).transpose();
        prev_Nu0_ = Nu.c.row(0).transpose();

        const int ny = g_->ny;
        NSState r;
        r.t = s.t + dt_;
        r.eps = eps_;
        r.psi = SpectralField(g_, "psi");
        r.omega = SpectralField(g_, "omega");
        r.U = VectorField(g_);

        CVec u0_new;
        for (int m = 0; m < g_->nmodes(); ++m) {
            if (g_->kmag(m) == 0.0) {
                CVec b = rhs_u0;
                b[0] = Complex(0.0);       // no-slip
                b[ny - 1] = Complex(0.0);  // flat top
                u0_new = solve_real(mode0_lu(sigma), b);
            } else {
                CVec b = CVec::Zero(2 * ny);
                b.segment(1, ny - 2) = rhs_w.row(m).segment(1, ny - 2).transpose();
                CVec x = solve_real(mode_lu(m, sigma), b);
                r.omega.c.row(m) = x.head(ny).transpose();
                r.psi.c.row(m) = x.tail(ny).transpose();
            }
        }
        r.U.u[0] = normal_derivative(r.psi, 1);
        r.U.v = tangential_derivative(r.psi);
        r.U.v *= -1.0;
        r.U.u[0].c.row(0) = u0_new.transpose();
        r.U.v.c.row(0).setZero();
        r.omega.c.row(0) = -(g_->D1 * u0_new).transpose();
        r.p = recover_pressure(r.U, r.t);

        history_valid_ = true;
        expected_t_ = r.t;
        return r;
    }

    NSState run(NSState s, int nsteps,
                const std::function<void(int, const NSState&)>& rec = nullptr) {
        if (rec) rec(0, s);
        for (int n = 0; n < nsteps; ++n) {
            s = step_ns(s);
            if (rec) rec(n + 1, s);
        }
        return s;
    }

    /// Pressure from the divergence of the momentum equation with the viscous
    /// wall flux dp/dy(0) = eps^2 d2v/dy2(0) (+ normal body force trace).
    /// The mean-mode flux is projected onto the discretely solvable value.
    SpectralField recover_pressure(const VectorField& U, double t) {
        SpectralField rhs = quad_form(U);
        CVec flux = (eps_ * eps_) * normal_derivative(U.v, 2).wall_trace();
        if (body_force) {
            VectorField F = body_force(t);
            rhs -= tangential_derivative(F.u[0]) + normal_derivative(F.v, 1);
            flux += F.v.wall_trace();
        }
        flux[0] = g_->integrate(CVec(rhs.c.row(0).transpose()));
        auto p = ell_.solve_neumann(rhs, &flux);
        p.name = "p";
        return p;
    }

    double kinetic_energy(const VectorField& U) const {
        const double a = l2_norm(U.u[0]), b = l2_norm(U.v);
        return 0.5 * (a * a + b * b);
    }

    /// |grad U|^2 integral (the viscous dissipation rate is eps^2 times this).
    double gradient_energy(const VectorField& U) const {
        const double a = l2_norm(tangential_derivative(U.u[0]));
        const double b = l2_norm(normal_derivative(U.u[0], 1));
        const double c = l2_norm(tangential_derivative(U.v));
        const double d = l2_norm(normal_derivative(U.v, 1));
        return a * a + b * b + c * c + d * d;
    }

    /// Advective rate per wall-normal level (as in the inviscid solver).
    void check_cfl(const VectorField& U) const {
        const double dx = g_->box / g_->nx;
        Mat up = U.u[0].physical(), vp = U.v.physical();
        double rate = 0.0;
        for (int j = 0; j < g_->ny; ++j) {
            double dyl = j > 0 ? g_->y[j] - g_->y[j - 1] : g_->y[1] - g_->y[0];
            double dyr = j + 1 < g_->ny ? g_->y[j + 1] - g_->y[j] : dyl;
            double dy = std::min(dyl, dyr);
            rate = std::max(rate, up.col(j).cwiseAbs().maxCoeff() / dx +
                                      vp.col(j).cwiseAbs().maxCoeff() / dy);
        }
        if (dt_ * rate > cfl_max)
            throw CflViolation("dt * max|U| / spacing = " + std::to_string(dt_ * rate) +
                               " exceeds " + std::to_string(cfl_max));
    }

private:
    using LU = Eigen::PartialPivLU<Mat>;

    /// The wall layer has width O(eps); require at least 12 nodes inside
    /// y <= 3 eps, else refuse with an estimate of the ny that would do.
    void check_resolution() const {
        int count = 0;
        for (int j = 0; j < g_->ny; ++j)
            if (g_->y[j] <= 3.0 * eps_) ++count;
        if (count < 12) {
            int required = static_cast<int>(std::ceil(12.0 / std::max(count, 1) * g_->ny));
            throw ResolutionRefusal("only " + std::to_string(count) +
                                    " wall-normal nodes inside y <= 3 eps = " +
                                    std::to_string(3.0 * eps_) + "; need >= 12 (estimated ny >= " +
                                    std::to_string(required) + " with this stretching)");
        }
    }

    /// Solve a real-factored system with a complex right-hand side.
    static CVec solve_real(const LU& lu, const CVec& b) {
        Mat rb(b.size(), 2);
        rb.col(0) = b.real();
        rb.col(1) = b.imag();
        Mat x = lu.solve(rb);
        CVec out(b.size());
        for (int j = 0; j < b.size(); ++j) out[j] = Complex(x(j, 0), x(j, 1));
        return out;
    }

    /// Mean tangential flow: (sigma/dt) u - eps^2 u'' = rhs, u(0) = 0,
    /// u'(Ly) = 0.
    const LU& mode0_lu(double sigma) {
        auto& slot = sigma < 1.25 ? lu0_start_ : lu0_main_;
        if (!slot) {
            const int ny = g_->ny;
            Mat A = (sigma / dt_) * Mat::Identity(ny, ny) - (eps_ * eps_) * g_->D2;
            A.row(0).setZero();
            A(0, 0) = 1.0;
            A.row(ny - 1) = g_->D1.row(ny - 1);
            slot = std::make_unique<LU>(A);
        }
        return *slot;
    }

    /// Coupled (omega, psi) block for one mode: vorticity update rows,
    /// streamfunction inversion rows, and the four boundary rows
    /// psi'(0) = 0 (no-slip), psi(0) = 0 (impermeable), transparent top for
    /// both unknowns. Real matrix, factored once per (mode, scheme stage).
    const LU& mode_lu(int m, double sigma) {
        auto& cache = sigma < 1.25 ? lu_start_ : lu_main_;
        if (cache.empty()) cache.resize(g_->nmodes());
        if (!cache[m]) {
            const int ny = g_->ny;
            const double k = g_->kmag(m), e2 = eps_ * eps_;
            Mat A = Mat::Zero(2 * ny, 2 * ny);
            // row 0: no-slip, u(0) = psi'(0) = 0
            A.block(0, ny, 1, ny) = g_->D1.row(0);
            // interior vorticity rows
            A.block(1, 0, ny - 2, ny) = -e2 * g_->D2.block(1, 0, ny - 2, ny);
            for (int j = 1; j < ny - 1; ++j) A(j, j) += sigma / dt_ + e2 * k * k;
            // transparent top for omega
            A.block(ny - 1, 0, 1, ny) = g_->D1.row(ny - 1);
            A(ny - 1, ny - 1) += k;
            // psi(0) = 0
            A(ny, ny) = 1.0;
            // streamfunction inversion rows: (-D2 + k^2) psi - omega = 0
            A.block(ny + 1, ny, ny - 2, ny) = -g_->D2.block(1, 0, ny - 2, ny);
            for (int j = 1; j < ny - 1; ++j) {
                A(ny + j, ny + j) += k * k;
                A(ny + j, j) = -1.0;
            }
            // transparent top for psi
            A.block(2 * ny - 1, ny, 1, ny) = g_->D1.row(ny - 1);
            A(2 * ny - 1, 2 * ny - 1) += k;
            cache[m] = std::make_unique<LU>(A);
        }
        return *cache[m];
    }

    /// div(U . grad U) for a divergence-free field.
    SpectralField quad_form(const VectorField& U) const {
        auto ux = tangential_derivative(U.u[0]);
        auto uy = normal_derivative(U.u[0], 1);
        auto vx = tangential_derivative(U.v);
        auto vy = normal_derivative(U.v, 1);
        return multiply(ux, ux) + 2.0 * multiply(uy, vx) + multiply(vy, vy);
    }

    GridPtr g_;
    double eps_, dt_;
    HalfspaceElliptic ell_;

    bool history_valid_ = false;
    double expected_t_ = 0.0;
    CMat prev_omega_, prev_Nw_;
    CVec prev_u0_, prev_Nu0_;

    std::unique_ptr<LU> lu0_start_, lu0_main_;
    std::vector<std::unique_ptr<LU>> lu_start_, lu_main_;
};

/// One row of the inviscid-limit error experiment.
struct ErrorSample {
    double t = 0.0;
    double l2_u = 0.0, l2_v = 0.0;
    double linf_u = 0.0, linf_v = 0.0;
};

/// Advances the viscous flow from the shared initial data and measures, on
/// the trajectory's clock, the distance to the leading-order composite:
/// u - ue0 - up0(y/eps) and v - ve0 - weight * vp1(y/eps). The physical
/// weight is eps (the layer's normal velocity enters one order down);
/// passing weight = 1 is the negative control that destroys the rate.
inline std::vector<ErrorSample> run_error_experiment(const ExpansionTrajectory& X,
                                                     const InitialDataSpec& spec, double eps,
                                                     int refine = 1,
                                                     double layer_v_weight = -1.0) {
    if (refine < 1) throw ConfigError("error experiment: refine must be >= 1");
    const double w = layer_v_weight < 0.0 ? eps : layer_v_weight;
    NSSolver ns(X.outer, eps, X.dt / refine);
    LayerResampler res(X.layer, X.outer, eps);
    std::vector<ErrorSample> out;
    auto sample = [&](int n, const NSState& st) {
        SpectralField du = st.U.u[0] - X.Ue0[n].u[0] - res(X.up0[n]);
        SpectralField dv = st.U.v - X.Ue0[n].v - w * res(X.vp1[n]);
        out.push_back({st.t, l2_norm(du), l2_norm(dv), linf_norm(du), linf_norm(dv)});
    };
    NSState s = ns.initial_state(spec);
    sample(0, s);
    for (int n = 0; n < X.nsteps; ++n) {
        for (int i = 0; i < refine; ++i) s = ns.step_ns(s);
        sample(n + 1, s);
    }
    return out;
}

}  // namespace nsbl
