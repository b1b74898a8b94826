#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nsbl/core/fft.hpp"
#include "nsbl/core/grid.hpp"

namespace nsbl {

/// A real scalar field, periodic tangentially, gridded wall-normally.
/// Stored as tangential Fourier coefficients (r2c layout) per wall-normal node.
struct SpectralField {
    GridPtr grid;
    CMat c;            // nmodes x ny
    std::string name;

    SpectralField() = default;
    SpectralField(GridPtr g, std::string n = "") : grid(std::move(g)), name(std::move(n)) {
        c = CMat::Zero(grid->nmodes(), grid->ny);
    }
    SpectralField(GridPtr g, CMat coeffs, std::string n = "")
        : grid(std::move(g)), c(std::move(coeffs)), name(std::move(n)) {}

    static SpectralField zero(GridPtr g, std::string n = "") { return SpectralField(g, n); }

    /// Sample fn(x1[, x2], y) on the grid and transform. d=1 callers receive x2=0.
    static SpectralField from_function(
        GridPtr g, const std::function<double(double, double, double)>& fn, std::string n = "") {
        Mat p(g->npts_tan(), g->ny);
        const double dx = g->box / g->nx;
        for (int j = 0; j < g->ny; ++j)
            for (int t = 0; t < g->npts_tan(); ++t) {
                const double x1 = dx * (g->d == 1 ? t : t % g->nx);
                const double x2 = g->d == 1 ? 0.0 : dx * (t / g->nx);
                p(t, j) = fn(x1, x2, g->y[j]);
            }
        SpectralField f(g, std::move(n));
        f.c = Fourier::for_grid(*g).to_spectral(p);
        return f;
    }

    Mat physical() const { return Fourier::for_grid(*grid).to_physical(c); }

    SpectralField& operator+=(const SpectralField& o) { c += o.c; return *this; }
    SpectralField& operator-=(const SpectralField& o) { c -= o.c; return *this; }
    SpectralField& operator*=(double a) { c *= a; return *this; }

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { a += b; return a; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { a -= b; return a; }
    friend SpectralField operator*(double a, SpectralField f) { f *= a; return f; }

    /// Wall trace (per-mode values at y=0).
    CVec wall_trace() const { return c.col(0); }
    /// Top-boundary trace.
    CVec top_trace() const { return c.col(grid->ny - 1); }
};

/// (u, v): d tangential components plus the wall-normal one, on a shared grid.
struct VectorField {
    std::vector<SpectralField> u;  // size d
    SpectralField v;

    VectorField() = default;
    explicit VectorField(GridPtr g) : v(g, "v") {
        for (int i = 0; i < g->d; ++i) u.emplace_back(g, "u" + std::to_string(i + 1));
    }
    GridPtr grid() const { return v.grid; }

    VectorField& operator+=(const VectorField& o) {
        for (size_t i = 0; i < u.size(); ++i) u[i] += o.u[i];
        v += o.v;
        return *this;
    }
    VectorField& operator-=(const VectorField& o) {
        for (size_t i = 0; i < u.size(); ++i) u[i] -= o.u[i];
        v -= o.v;
        return *this;
    }
    VectorField& operator*=(double a) {
        for (auto& f : u) f *= a;
        v *= a;
        return *this;
    }
};

// ---------------------------------------------------------------------------
// Tangential spectral calculus
// ---------------------------------------------------------------------------

/// d/dx_axis as the ik multiplier (axis in 1..d).
inline SpectralField tangential_derivative(const SpectralField& f, int axis = 1) {
    const Grid& g = *f.grid;
    if (axis < 1 || axis > g.d) throw Error("tangential_derivative: axis out of range");
    SpectralField r(f.grid, "dx" + std::to_string(axis) + "(" + f.name + ")");
    for (int m = 0; m < g.nmodes(); ++m) {
        double k1, k2;
        g.wavevector(m, k1, k2);
        r.c.row(m) = Complex(0.0, axis == 1 ? k1 : k2) * f.c.row(m);
    }
    return r;
}

/// <D_x>^{1/2}: multiplier (1+|k|^2)^{1/4}.
inline SpectralField tangential_halfderivative(const SpectralField& f) {
    const Grid& g = *f.grid;
    SpectralField r(f.grid, "halfD(" + f.name + ")");
    for (int m = 0; m < g.nmodes(); ++m) {
        const double k = g.kmag(m);
        r.c.row(m) = std::pow(1.0 + k * k, 0.25) * f.c.row(m);
    }
    return r;
}

/// |D_x| multiplier.
inline SpectralField abs_derivative(const SpectralField& f) {
    SpectralField r(f.grid, "absD(" + f.name + ")");
    for (int m = 0; m < f.grid->nmodes(); ++m) r.c.row(m) = f.grid->kmag(m) * f.c.row(m);
    return r;
}

/// d/dy or d2/dy2 via the mapped-grid stencil operators.
inline SpectralField normal_derivative(const SpectralField& f, int order = 1) {
    const Grid& g = *f.grid;
    if (order != 1 && order != 2) throw Error("normal_derivative: order must be 1 or 2");
    if (g.ny < 2 * order + 1) throw Error("normal_derivative: grid too small");
    SpectralField r(f.grid, "dy" + std::to_string(order) + "(" + f.name + ")");
    const Mat& D = order == 1 ? g.D1 : g.D2;
    r.c = f.c * D.transpose();
    return r;
}

/// Pointwise product with a wall-normal profile w(y).
inline SpectralField scale_by_profile(const SpectralField& f, const Vec& w) {
    SpectralField r = f;
    for (int j = 0; j < f.grid->ny; ++j) r.c.col(j) *= w[j];
    return r;
}

/// 2/3-rule truncation.
inline void dealias(SpectralField& f) {
    for (int m = 0; m < f.grid->nmodes(); ++m)
        if (!f.grid->dealias_keep(m)) f.c.row(m).setZero();
}

/// Dealiased pointwise product.
inline SpectralField multiply(const SpectralField& a, const SpectralField& b) {
    Fourier& F = Fourier::for_grid(*a.grid);
    Mat p = F.to_physical(a.c).cwiseProduct(F.to_physical(b.c));
    SpectralField r(a.grid, "(" + a.name + "*" + b.name + ")");
    r.c = F.to_spectral(p);
    dealias(r);
    return r;
}

/// max |f| over the physical grid.
inline double linf_norm(const SpectralField& f) {
    return f.physical().cwiseAbs().maxCoeff();
}

/// L2 norm over the box x [0,Ly] via Parseval + wall-normal quadrature.
inline double l2_norm(const SpectralField& f) {
    const Grid& g = *f.grid;
    double s = 0.0;
    for (int m = 0; m < g.nmodes(); ++m) {
        double acc = 0.0;
        for (int j = 0; j < g.ny; ++j) acc += g.qw[j] * std::norm(f.c(m, j));
        s += g.mode_weight(m) * acc;
    }
    return std::sqrt(std::max(0.0, s) * g.tan_volume());
}

inline double l2_norm(const VectorField& U) {
    double s = 0.0;
    for (const auto& f : U.u) s += l2_norm(f) * l2_norm(f);
    s += l2_norm(U.v) * l2_norm(U.v);
    return std::sqrt(s);
}

/// sum over tangential axes of d u_i / dx_i.
inline SpectralField tangential_divergence(const std::vector<SpectralField>& u) {
    SpectralField r = tangential_derivative(u[0], 1);
    for (size_t i = 1; i < u.size(); ++i) r += tangential_derivative(u[i], static_cast<int>(i) + 1);
    r.name = "divx";
    return r;
}

inline SpectralField divergence(const VectorField& U) {
    SpectralField r = tangential_divergence(U.u) + normal_derivative(U.v, 1);
    r.name = "div";
    return r;
}

/// Tail tolerance for semi-infinite integrals: |f| at the top row <= tol * max|f|.
inline constexpr double kTailTolerance = 1e-8;

inline void check_decay(const SpectralField& f, const std::string& who) {
    const Grid& g = *f.grid;
    double top = 0.0, scale = 0.0;
    for (int m = 0; m < g.nmodes(); ++m) {
        top = std::max(top, std::abs(f.c(m, g.ny - 1)));
        scale = std::max(scale, f.c.row(m).cwiseAbs().maxCoeff());
    }
    if (scale > 0.0 && top > kTailTolerance * scale)
        throw DecayViolation(who.empty() ? f.name : who, top, scale);
}

/// g(x, z0) = int_{z0}^{Lz} f(x, s) ds for every node z0; requires tail decay.
inline SpectralField vertical_tail_integral(const SpectralField& f) {
    check_decay(f, f.name);
    SpectralField r(f.grid, "tailint(" + f.name + ")");
    for (int m = 0; m < f.grid->nmodes(); ++m)
        r.c.row(m) = f.grid->tail_integral(CVec(f.c.row(m).transpose())).transpose();
    return r;
}

/// Antiderivative pinned at the wall: F(x,z) = int_0^z f.
inline SpectralField vertical_cumulative(const SpectralField& f) {
    SpectralField r(f.grid, "cumint(" + f.name + ")");
    for (int m = 0; m < f.grid->nmodes(); ++m)
        r.c.row(m) = f.grid->cumulative_from_bottom(CVec(f.c.row(m).transpose())).transpose();
    return r;
}

}  // namespace nsbl
