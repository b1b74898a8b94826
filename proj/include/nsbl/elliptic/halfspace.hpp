#pragma once

#include <Eigen/Dense>
#include <memory>
#include <unordered_map>
#include <vector>

#include "nsbl/core/field.hpp"

namespace nsbl {

/// Per-mode solvers for -Lap u = f on the half-space, truncated at y = Ly with
/// a transparent condition u'(Ly) + |k| u(Ly) = 0 (exact for the decaying
/// harmonic tail). Factorizations are cached per tangential mode.
class HalfspaceElliptic {
public:
    using LU = Eigen::PartialPivLU<Eigen::MatrixXcd>;

    explicit HalfspaceElliptic(GridPtr g) : g_(std::move(g)) {}

    const Grid& grid() const { return *g_; }

    /// u with (-D2 + k^2) u = f per mode, u(0) = wall trace, transparent top.
    SpectralField solve_dirichlet(const SpectralField& f, const CVec* wall = nullptr) {
        SpectralField u(f.grid, "dirichlet(" + f.name + ")");
        CVec rhs(g_->ny);
        for (int m = 0; m < g_->nmodes(); ++m) {
            rhs = f.c.row(m).transpose();
            rhs[0] = wall ? (*wall)[m] : Complex(0.0);
            rhs[g_->ny - 1] = Complex(0.0);
            u.c.row(m) = dirichlet_lu(m).solve(rhs).transpose();
        }
        return u;
    }

    /// u with (-D2 + k^2) u = f per mode, u'(0) = flux trace, transparent top.
    /// The k = 0 problem needs int f = flux; it is gauged by u(Ly) = 0.
    SpectralField solve_neumann(const SpectralField& f, const CVec* flux = nullptr) {
        SpectralField u(f.grid, "neumann(" + f.name + ")");
        CVec rhs(g_->ny);
        for (int m = 0; m < g_->nmodes(); ++m) {
            const Complex fl = flux ? (*flux)[m] : Complex(0.0);
            if (g_->kmag(m) == 0.0) {
                // compatibility: int_0^Ly f = u'(0) - u'(Ly) = flux for a
                // solution with a flat top
                Vec re(g_->ny), im(g_->ny);
                for (int j = 0; j < g_->ny; ++j) {
                    re[j] = f.c(m, j).real();
                    im[j] = f.c(m, j).imag();
                }
                const Complex total(g_->integrate(re), g_->integrate(im));
                double scale = std::max({std::abs(total), std::abs(fl), 1e-14});
                if (std::abs(total - fl) > 1e-7 * std::max(scale, 1.0))
                    throw CompatibilityError("mean-mode flux mismatch: |int f - flux| = " +
                                             std::to_string(std::abs(total - fl)));
            }
            rhs = f.c.row(m).transpose();
            rhs[0] = fl;
            rhs[g_->ny - 1] = Complex(0.0);
            u.c.row(m) = neumann_lu(m).solve(rhs).transpose();
        }
        return u;
    }

    /// Dirichlet-to-Neumann trace map of the harmonic extension:
    /// g  ->  -d/dy E[g] at the wall, the |D_x| multiplier up to truncation.
    CVec dn_map(const CVec& wall) {
        CVec out = CVec::Zero(g_->nmodes());
        CVec rhs = CVec::Zero(g_->ny);
        for (int m = 0; m < g_->nmodes(); ++m) {
            if (g_->kmag(m) == 0.0) continue;  // flat extension, zero flux
            rhs.setZero();
            rhs[0] = wall[m];
            CVec u = dirichlet_lu(m).solve(rhs);
            out[m] = -(g_->D1.row(0).cast<Complex>() * u)(0);
        }
        return out;
    }

    /// Inverse of dn_map on mean-zero traces.
    CVec nd_map(const CVec& flux) {
        double scale = flux.cwiseAbs().maxCoeff();
        for (int m = 0; m < g_->nmodes(); ++m)
            if (g_->kmag(m) == 0.0 && std::abs(flux[m]) > 1e-10 * std::max(scale, 1.0))
                throw Error("nd_map: trace must be mean-free");
        CVec out = CVec::Zero(g_->nmodes());
        CVec rhs = CVec::Zero(g_->ny);
        for (int m = 0; m < g_->nmodes(); ++m) {
            if (g_->kmag(m) == 0.0) continue;
            rhs.setZero();
            rhs[0] = -flux[m];  // u'(0) = -(-d/dy u)(0)
            CVec u = neumann_lu(m).solve(rhs);
            out[m] = u[0];
        }
        return out;
    }

    /// d = 1 stream-function inversion: u = (dy psi, -dx psi), -Lap psi = w,
    /// psi(0) = 0 so the wall stays impermeable. A nonzero wall value may be
    /// supplied per mode to impose v(x, 0) = -dx psi(x, 0).
    VectorField biot_savart(const SpectralField& omega, const CVec* psi_wall = nullptr) {
        if (g_->d != 1) throw Error("biot_savart: scalar form is d = 1 only");
        SpectralField psi = solve_dirichlet(omega, psi_wall);
        VectorField U(omega.grid);
        U.u[0] = normal_derivative(psi, 1);
        U.v = tangential_derivative(psi);
        U.v *= -1.0;
        return U;
    }

    /// Decaying solution of  w' + |k| w = f  per mode. k = 0 integrates down
    /// from a vanishing top; k != 0 uses the wall-causal branch, which obeys
    /// || |k| w || <= || f || by Young's inequality.
    SpectralField solve_decay_ode(const SpectralField& f) {
        SpectralField w(f.grid, "decay(" + f.name + ")");
        CVec rhs(g_->ny);
        for (int m = 0; m < g_->nmodes(); ++m) {
            rhs = f.c.row(m).transpose();
            if (g_->kmag(m) == 0.0)
                rhs[g_->ny - 1] = Complex(0.0);
            else
                rhs[0] = Complex(0.0);
            w.c.row(m) = decay_lu(m).solve(rhs).transpose();
        }
        return w;
    }

private:
    Eigen::MatrixXcd base_operator(int m) const {
        const double k2 = g_->kmag(m) * g_->kmag(m);
        Eigen::MatrixXcd A = (-g_->D2 + k2 * Mat::Identity(g_->ny, g_->ny)).cast<Complex>();
        // transparent top row
        A.row(g_->ny - 1) = g_->D1.row(g_->ny - 1).cast<Complex>();
        A(g_->ny - 1, g_->ny - 1) += Complex(g_->kmag(m));
        return A;
    }

    const LU& dirichlet_lu(int m) {
        auto it = dir_.find(m);
        if (it != dir_.end()) return *it->second;
        Eigen::MatrixXcd A = base_operator(m);
        A.row(0).setZero();
        A(0, 0) = Complex(1.0);
        return *dir_.emplace(m, std::make_unique<LU>(A)).first->second;
    }

    const LU& neumann_lu(int m) {
        auto it = neu_.find(m);
        if (it != neu_.end()) return *it->second;
        Eigen::MatrixXcd A = base_operator(m);
        A.row(0) = g_->D1.row(0).cast<Complex>();
        if (g_->kmag(m) == 0.0) {
            // gauge: pin the top value instead of the (redundant) top flux
            A.row(g_->ny - 1).setZero();
            A(g_->ny - 1, g_->ny - 1) = Complex(1.0);
        }
        return *neu_.emplace(m, std::make_unique<LU>(A)).first->second;
    }

    const LU& decay_lu(int m) {
        auto it = dec_.find(m);
        if (it != dec_.end()) return *it->second;
        Eigen::MatrixXcd A =
            (g_->D1 + g_->kmag(m) * Mat::Identity(g_->ny, g_->ny)).cast<Complex>();
        if (g_->kmag(m) == 0.0) {
            A.row(g_->ny - 1).setZero();
            A(g_->ny - 1, g_->ny - 1) = Complex(1.0);
        } else {
            A.row(0).setZero();
            A(0, 0) = Complex(1.0);
        }
        return *dec_.emplace(m, std::make_unique<LU>(A)).first->second;
    }

    GridPtr g_;
    std::unordered_map<int, std::unique_ptr<LU>> dir_, neu_, dec_;
};

}  // namespace nsbl
