#pragma once

#include <functional>

#include "nsbl/elliptic/halfspace.hpp"

namespace nsbl {

/// Stream-function initial data: psi = A sin(k0 x) bump_[a,b](y).
/// The bump vanishes to all orders at a and b, so the initial vorticity is
/// smooth and supported strictly inside [a, b], away from the wall.
struct InitialDataSpec {
    double A = 1.0;
    int k0 = 1;
    double a = 2.0;
    double b = 4.0;

    void validate(const Grid& g) const {
        if (a < 2.0) throw ConfigError("initial data: support must satisfy a >= 2");
        if (b <= a) throw ConfigError("initial data: need b > a");
        if (b >= g.Ly) throw ConfigError("initial data: support exceeds the domain height");
        if (k0 < 1 || k0 > g.nx / 3) throw ConfigError("initial data: k0 outside dealiased band");
    }
};

namespace bump {

/// (1-s^2)^8 on (-1,1), 0 outside: vanishes to 8th order at the edges and
/// keeps moderate high derivatives (a C-infinity bump of the exp(-1/(1-s^2))
/// kind is far too rough for the resolutions used here).
inline double chi(double s) {
    if (std::abs(s) >= 1.0) return 0.0;
    const double q = 1.0 - s * s;
    const double q2 = q * q;
    return q2 * q2 * q2 * q2;
}

inline double chi_dd(double s) {
    if (std::abs(s) >= 1.0) return 0.0;
    const double q = 1.0 - s * s;
    const double q6 = q * q * q * q * q * q;
    return q6 * (224.0 * s * s - 16.0 * q);
}

}  // namespace bump

struct EulerState {
    double t = 0.0;
    SpectralField omega;  // scalar vorticity (d = 1)
    VectorField U;
};

/// Incompressible outer flow advanced in vorticity form with velocity
/// recovered by stream-function inversion each stage (d = 1).
class EulerSolver {
public:
    explicit EulerSolver(GridPtr g) : g_(std::move(g)), ell_(g_) {
        if (g_->d != 1) throw StageRefusal("euler", "only d = 1 flows are implemented");
    }

    const Grid& grid() const { return *g_; }
    GridPtr grid_ptr() const { return g_; }
    HalfspaceElliptic& elliptic() { return ell_; }

    double y_guard = 1.0;
    double guard_tol = 1e-8;
    double cfl_max = 0.5;

    EulerState make_initial_data(const InitialDataSpec& spec) {
        spec.validate(*g_);
        EulerState s;
        const double mid = 0.5 * (spec.a + spec.b), half = 0.5 * (spec.b - spec.a);
        auto psi = SpectralField::from_function(g_, [&](double x, double, double y) {
            return spec.A * std::sin(spec.k0 * x) * bump::chi((y - mid) / half);
        });
        s.omega = tangential_derivative(tangential_derivative(psi)) + normal_derivative(psi, 2);
        s.omega *= -1.0;
        s.omega.name = "omega";
        s.U = VectorField(g_);
        s.U.u[0] = normal_derivative(psi, 1);
        s.U.v = tangential_derivative(psi);
        s.U.v *= -1.0;
        return s;
    }

    /// One SSP-RK3 step of scalar vorticity transport.
    EulerState step_euler(const EulerState& s, double dt) {
        check_cfl(s.U, dt);
        SpectralField k1 = transport(s.omega, s.U);
        SpectralField w1 = s.omega + dt * k1;
        VectorField U1 = ell_.biot_savart(w1);
        SpectralField w2 = 0.75 * s.omega + 0.25 * (w1 + dt * transport(w1, U1));
        VectorField U2 = ell_.biot_savart(w2);
        EulerState r;
        r.t = s.t + dt;
        r.omega = (1.0 / 3.0) * s.omega + (2.0 / 3.0) * (w2 + dt * transport(w2, U2));
        r.omega.name = "omega";
        r.U = ell_.biot_savart(r.omega);
        check_support(r.omega);
        return r;
    }

    /// Pressure from the divergence of the momentum equation:
    /// -Lap p = div(U . grad U), dp/dy(0) = 0 (impermeable wall), k=0 pinned.
    SpectralField recover_pressure(const VectorField& U) {
        SpectralField rhs = pressure_rhs(U);
        CVec flux = CVec::Zero(g_->nmodes());
        auto p = ell_.solve_neumann(rhs, &flux);
        p.name = "p";
        return p;
    }

    /// div(U . grad U) = sum_ij d_i u_j d_j u_i for a divergence-free field.
    SpectralField pressure_rhs(const VectorField& U) {
        auto ux = tangential_derivative(U.u[0]);
        auto uy = normal_derivative(U.u[0], 1);
        auto vx = tangential_derivative(U.v);
        auto vy = normal_derivative(U.v, 1);
        SpectralField rhs = multiply(ux, ux) + 2.0 * multiply(uy, vx) + multiply(vy, vy);
        rhs.name = "div(U.grad U)";
        return rhs;
    }

    /// -(u dx w + v dy w), dealiased.
    SpectralField transport(const SpectralField& w, const VectorField& U) {
        SpectralField r =
            multiply(U.u[0], tangential_derivative(w)) + multiply(U.v, normal_derivative(w, 1));
        r *= -1.0;
        return r;
    }

    /// Advective rate per wall-normal level so that stretched grids are not
    /// penalized by tiny near-wall cells where v is itself tiny.
    void check_cfl(const VectorField& U, double dt) const {
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
        if (dt * rate > cfl_max)
            throw CflViolation("dt * max|U| / spacing = " + std::to_string(dt * rate) +
                               " exceeds " + std::to_string(cfl_max));
    }

    void check_support(const SpectralField& omega) const {
        Mat p = omega.physical();
        double below = 0.0, scale = p.cwiseAbs().maxCoeff();
        for (int j = 0; j < g_->ny && g_->y[j] < y_guard; ++j)
            below = std::max(below, p.col(j).cwiseAbs().maxCoeff());
        if (scale > 0.0 && below > guard_tol * scale)
            throw SupportErosion("vorticity reached below the guard height " +
                                 std::to_string(y_guard));
    }

private:
    GridPtr g_;
    HalfspaceElliptic ell_;
};

}  // namespace nsbl
