#pragma once

#include "nsbl/euler/euler.hpp"

namespace nsbl {

/// First-order outer corrector: linearized transport around the background
/// flow, zero initial data, wall condition v1(t, x, 0) = boundary_v(t).
/// Background and corrector advance jointly with the same SSP-RK3 stages so
/// the pair is a consistent third-order discretization of the coupled system.
class LinearizedEulerSolver {
public:
    explicit LinearizedEulerSolver(EulerSolver& base) : es_(base) {}

    /// Velocity of the corrector vorticity with inhomogeneous wall trace g
    /// (modal values of v1 at y = 0; must be mean-free).
    VectorField reconstruct(const SpectralField& w1, const CVec& g) {
        const Grid& gr = es_.grid();
        double scale = std::max(g.cwiseAbs().maxCoeff(), 1e-30);
        if (std::abs(g[0]) > 1e-10 * std::max(scale, 1.0))
            throw Error("linearized euler: wall trace of v1 must be mean-free");
        CVec psi_wall = CVec::Zero(gr.nmodes());
        for (int m = 1; m < gr.nmodes(); ++m) {
            double k1, k2;
            gr.wavevector(m, k1, k2);
            psi_wall[m] = Complex(0.0, 1.0) * g[m] / k1;  // v = -dx psi
        }
        return es_.elliptic().biot_savart(w1, &psi_wall);
    }

    /// Advance from zero corrector data over nsteps of size dt = T/nsteps.
    /// rec(step, t, background, omega1, U1) fires at every step incl. step 0.
    void run(const InitialDataSpec& spec, double T, int nsteps,
             const std::function<CVec(double)>& boundary_v,
             const std::function<void(int, double, const EulerState&, const SpectralField&,
                                      const VectorField&)>& rec) {
        if (nsteps < 1) throw ConfigError("linearized euler: nsteps must be positive");
        const double dt = T / nsteps;
        EulerState bg = es_.make_initial_data(spec);
        SpectralField w1 = SpectralField::zero(es_.grid_ptr(), "omega1");
        VectorField U1 = reconstruct(w1, boundary_v(0.0));
        if (rec) rec(0, 0.0, bg, w1, U1);

        for (int n = 0; n < nsteps; ++n) {
            const double t = n * dt;
            es_.check_cfl(bg.U, dt);

            auto rhs1 = [&](const SpectralField& w0s, const VectorField& U0s,
                            const SpectralField& w1s, const VectorField& U1s) {
                SpectralField r = multiply(U0s.u[0], tangential_derivative(w1s)) +
                                  multiply(U0s.v, normal_derivative(w1s, 1)) +
                                  multiply(U1s.u[0], tangential_derivative(w0s)) +
                                  multiply(U1s.v, normal_derivative(w0s, 1));
                r *= -1.0;
                return r;
            };

            // stage 1 (at t)
            SpectralField a0 = bg.omega + dt * es_.transport(bg.omega, bg.U);
            SpectralField a1 = w1 + dt * rhs1(bg.omega, bg.U, w1, U1);
            VectorField Ua0 = es_.elliptic().biot_savart(a0);
            VectorField Ua1 = reconstruct(a1, boundary_v(t + dt));

            // stage 2 (at t + dt)
            SpectralField b0 = 0.75 * bg.omega + 0.25 * (a0 + dt * es_.transport(a0, Ua0));
            SpectralField b1 = 0.75 * w1 + 0.25 * (a1 + dt * rhs1(a0, Ua0, a1, Ua1));
            VectorField Ub0 = es_.elliptic().biot_savart(b0);
            VectorField Ub1 = reconstruct(b1, boundary_v(t + 0.5 * dt));

            // stage 3 (at t + dt/2)
            bg.omega = (1.0 / 3.0) * bg.omega + (2.0 / 3.0) * (b0 + dt * es_.transport(b0, Ub0));
            w1 = (1.0 / 3.0) * w1 + (2.0 / 3.0) * (b1 + dt * rhs1(b0, Ub0, b1, Ub1));
            bg.t = (n + 1) * dt;
            bg.U = es_.elliptic().biot_savart(bg.omega);
            U1 = reconstruct(w1, boundary_v(bg.t));
            es_.check_support(bg.omega);
            if (rec) rec(n + 1, bg.t, bg, w1, U1);
        }
    }

private:
    EulerSolver& es_;
};

}  // namespace nsbl
