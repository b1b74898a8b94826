#pragma once

#include <functional>

#include "nsbl/core/field.hpp"

namespace nsbl {

/// Broadcast a wall trace (per-mode values) to a z-independent layer field.
inline SpectralField from_wall_trace(GridPtr g, const CVec& tr, std::string name = "") {
    SpectralField f(std::move(g), std::move(name));
    for (int m = 0; m < f.grid->nmodes(); ++m) f.c.row(m).setConstant(tr[m]);
    return f;
}

/// Multiply a layer field by z^p.
inline SpectralField times_z(const SpectralField& f, int p = 1) {
    Vec zp(f.grid->ny);
    for (int j = 0; j < f.grid->ny; ++j) zp[j] = std::pow(f.grid->y[j], p);
    return scale_by_profile(f, zp);
}

/// v corrector from the layer divergence relation with decay at infinity:
/// v(x, z) = int_z^inf div_x u dz'. (Sign fixed by decay plus consistency of
/// the composite boundary values; d v / dz = -div_x u holds identically.)
inline SpectralField recover_vp1(const SpectralField& up) {
    if (l2_norm(up) == 0.0) return SpectralField::zero(up.grid, "vp1");
    auto v = vertical_tail_integral(tangential_divergence({up}));
    v.name = "vp1";
    return v;
}

/// Nonlinear boundary-layer flow driven by the outer wall trace.
/// Time stepping is SBDF2 (implicit z-diffusion, explicit transport) with an
/// SBDF1 start; the implicit factorization is shared by all modes.
class PrandtlSolver {
public:
    PrandtlSolver(GridPtr zgrid, double dt) : g_(std::move(zgrid)), dt_(dt) {
        if (g_->d != 1) throw StageRefusal("prandtl", "only d = 1 layers are implemented");
        if (dt <= 0) throw ConfigError("prandtl: dt must be positive");
        build_matrices();
    }

    const Grid& grid() const { return *g_; }
    GridPtr grid_ptr() const { return g_; }
    double dt() const { return dt_; }
    double gradient_cap = 1e3;

    /// Explicit transport part N of  du/dt = d2u/dz2 - N:
    /// N = u dx(ue0w) + (u + ue0w) dx u + Vt dz u with
    /// Vt = vp1 - vp1(0) + z dy(ve0)(0), dy(ve0)(0) = -dx ue0w.
    SpectralField transport_rhs(const SpectralField& up, const CVec& uew) const {
        CVec dxuew = tangential_trace_derivative(uew);
        SpectralField vt = recover_vp1(up);
        vt -= from_wall_trace(g_, vt.wall_trace());
        vt -= times_z(from_wall_trace(g_, dxuew));
        SpectralField n = multiply(up, from_wall_trace(g_, dxuew)) +
                          multiply(up + from_wall_trace(g_, uew), tangential_derivative(up)) +
                          multiply(vt, normal_derivative(up, 1));
        return n;
    }

    /// One-shot implicit solve: (c I - d2/dz2) u = rhs, u(0) = wall, u(Lz) = 0.
    CMat implicit_solve(const CMat& rhs, const CVec& wall, bool first_step) const {
        CMat r = rhs;
        r.col(g_->ny - 1).setZero();
        return implicit_solve_impl(r, wall, first_step);
    }

    /// Advance nsteps from zero data; rec(step, t, u_p, v_p1) at every step.
    void run(int nsteps, const std::function<CVec(double)>& ue_wall,
             const std::function<void(int, double, const SpectralField&, const SpectralField&)>&
                 rec) const {
        SpectralField up = SpectralField::zero(g_, "up0");
        SpectralField prev = up;
        if (rec) rec(0, 0.0, up, recover_vp1(up));
        double trace_scale = 1e-12;
        for (int n = 0; n < nsteps; ++n) {
            const double t = n * dt_, t1 = (n + 1) * dt_;
            trace_scale = std::max(trace_scale, ue_wall(t1).cwiseAbs().maxCoeff());
            SpectralField nn = transport_rhs(up, ue_wall(t));
            CMat rhs;
            if (n == 0) {
                rhs = up.c / dt_ - nn.c;
            } else {
                SpectralField nm = transport_rhs(prev, ue_wall(t - dt_));
                rhs = (4.0 * up.c - prev.c) / (2.0 * dt_) - 2.0 * nn.c + nm.c;
            }
            prev = up;
            up.c = implicit_solve(rhs, (-ue_wall(t1)).eval(), n == 0);
            check_window(up, trace_scale);
            if (rec) rec(n + 1, t1, up, recover_vp1(up));
        }
    }

    /// Dual form (shifted unknowns): evolve ut = u_p + ue0w with
    /// dt ut - dzz ut + ut dx ut + vt dz ut + dx pe0(.,0) = 0,
    /// ut(0)=0 at the wall and ut -> ue0w at the top. Pressure trace supplied
    /// independently (outer Bernoulli / pressure recovery).
    void run_tilde(int nsteps, const std::function<CVec(double)>& ue_wall,
                   const std::function<CVec(double)>& dxpe_wall,
                   const std::function<void(int, double, const SpectralField&)>& rec) const {
        SpectralField ut = from_wall_trace(g_, ue_wall(0.0), "ut");
        SpectralField prev = ut;
        if (rec) rec(0, 0.0, ut);
        for (int n = 0; n < nsteps; ++n) {
            const double t = n * dt_, t1 = (n + 1) * dt_;
            auto N = [&](const SpectralField& u, double tt) {
                SpectralField vt = vertical_cumulative(tangential_divergence({u}));
                vt *= -1.0;
                return multiply(u, tangential_derivative(u)) +
                       multiply(vt, normal_derivative(u, 1)) +
                       from_wall_trace(g_, dxpe_wall(tt));
            };
            SpectralField nn = N(ut, t);
            CMat rhs;
            if (n == 0) {
                rhs = ut.c / dt_ - nn.c;
            } else {
                SpectralField nm = N(prev, t - dt_);
                rhs = (4.0 * ut.c - prev.c) / (2.0 * dt_) - 2.0 * nn.c + nm.c;
            }
            prev = ut;
            // top row carries the matched outer value instead of zero
            CVec top = ue_wall(t1);
            for (int m = 0; m < g_->nmodes(); ++m) rhs(m, g_->ny - 1) = top[m];
            ut.c = implicit_solve_impl(rhs, CVec::Zero(g_->nmodes()), n == 0);
            if (rec) rec(n + 1, t1, ut);
        }
    }

    CVec tangential_trace_derivative(const CVec& tr) const {
        CVec out(g_->nmodes());
        for (int m = 0; m < g_->nmodes(); ++m) {
            double k1, k2;
            g_->wavevector(m, k1, k2);
            out[m] = Complex(0.0, k1) * tr[m];
        }
        return out;
    }

    void check_window(const SpectralField& up, double scale) const {
        if (linf_norm(normal_derivative(up, 1)) > gradient_cap * std::max(scale, 1e-12))
            throw WindowTermination("layer gradient cap exceeded");
        check_decay(up, "u_p");
        if (gaussian_weighted_sup(up) > decay_cap * std::max(scale, 1e-12))
            throw WindowTermination("layer Gaussian decay monitor exceeded");
    }

    /// sup_z e^{z^2/4} max_x |u| below z = zmax. The cutoff keeps the weight
    /// from amplifying round-off at the top of the strip.
    static double gaussian_weighted_sup(const SpectralField& up, double zmax = 8.0) {
        Mat p = up.physical();
        double s = 0.0;
        const Grid& g = *up.grid;
        for (int j = 0; j < g.ny && g.y[j] <= zmax; ++j)
            s = std::max(s, std::exp(0.25 * g.y[j] * g.y[j]) * p.col(j).cwiseAbs().maxCoeff());
        return s;
    }

    double decay_cap = 1e4;

private:
    void build_matrices() {
        Mat A2 = (3.0 / (2.0 * dt_)) * Mat::Identity(g_->ny, g_->ny) - g_->D2;
        Mat A1 = (1.0 / dt_) * Mat::Identity(g_->ny, g_->ny) - g_->D2;
        for (Mat* A : {&A2, &A1}) {
            A->row(0).setZero();
            (*A)(0, 0) = 1.0;
            A->row(g_->ny - 1).setZero();
            (*A)(g_->ny - 1, g_->ny - 1) = 1.0;
        }
        lu2_ = Eigen::PartialPivLU<Mat>(A2);
        lu1_ = Eigen::PartialPivLU<Mat>(A1);
    }

    CMat implicit_solve_impl(const CMat& rhs, const CVec& wall, bool first_step) const {
        const auto& lu = first_step ? lu1_ : lu2_;
        CMat out(g_->nmodes(), g_->ny);
        Eigen::MatrixXd R(g_->ny, 2);
        for (int m = 0; m < g_->nmodes(); ++m) {
            for (int j = 0; j < g_->ny; ++j) {
                R(j, 0) = rhs(m, j).real();
                R(j, 1) = rhs(m, j).imag();
            }
            R(0, 0) = wall[m].real();
            R(0, 1) = wall[m].imag();
            Eigen::MatrixXd X = lu.solve(R);
            for (int j = 0; j < g_->ny; ++j) out(m, j) = Complex(X(j, 0), X(j, 1));
        }
        return out;
    }

    GridPtr g_;
    double dt_;
    Eigen::PartialPivLU<Mat> lu2_, lu1_;
};

}  // namespace nsbl
