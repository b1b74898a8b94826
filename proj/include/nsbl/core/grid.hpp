#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <string>

#include "nsbl/core/errors.hpp"

namespace nsbl {

using Real = double;
using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Wall-normal coordinate map descriptor.
struct Stretching {
    enum class Kind { Uniform, Tanh };
    Kind kind = Kind::Uniform;
    double beta = 3.0;  // clustering strength for the tanh map

    static Stretching uniform() { return {Kind::Uniform, 0.0}; }
    static Stretching tanh_clustered(double beta) { return {Kind::Tanh, beta}; }
};

namespace detail {

/// Fornberg's algorithm: FD weights for derivative `m` at point x0 given nodes x.
inline Vec fornberg_weights(double x0, const Vec& x, int m) {
    const int n = static_cast<int>(x.size());
    Mat c = Mat::Zero(n, m + 1);
    double c1 = 1.0, c4 = x[0] - x0;
    c(0, 0) = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0, c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
                c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
            }
            for (int k = mn; k >= 1; --k)
                c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
            c(j, 0) = c4 * c(j, 0) / c3;
        }
        c1 = c2;
    }
    return c.col(m);
}

}  // namespace detail

/// Discrete domain T^d_x x [0, Ly]: Fourier modes tangentially, a mapped
/// collocation grid wall-normally. All wall-normal calculus (derivatives,
/// quadrature, antiderivatives) lives here as dense banded-structure operators
/// built once per grid.
class Grid {
  public:
    int d = 1;          // tangential dimension (1 or 2)
    int nx = 0;         // points (== modes) per tangential direction
    double box = 0.0;   // tangential period per direction
    int ny = 0;         // wall-normal points
    double Ly = 0.0;    // wall-normal extent
    Stretching stretching;
    int stencil = 7;    // wall-normal stencil width (order stencil-1)

    Vec y;              // nodes, y[0]=0 .. y[ny-1]=Ly
    Vec dyds, d2yds2;   // map derivatives at nodes (s uniform on [0,1])
    Vec qw;             // wall-normal quadrature weights
    Mat D1, D2;         // d/dy, d2/dy2 on the mapped grid

    static std::shared_ptr<const Grid> make(int d, int nx, double box, int ny, double Ly,
                                            Stretching st = Stretching::uniform(),
                                            int stencil = 7) {
        if (d != 1 && d != 2) throw ConfigError("grid: d must be 1 or 2");
        if (nx < 4 || nx % 2 != 0) throw ConfigError("grid: nx must be even and >= 4");
        if (ny < 8) throw ConfigError("grid: ny must be >= 8");
        if (Ly <= 0 || box <= 0) throw ConfigError("grid: box and Ly must be positive");
        auto g = std::make_shared<Grid>();
        g->d = d;
        g->nx = nx;
        g->box = box;
        g->ny = ny;
        g->Ly = Ly;
        g->stretching = st;
        g->stencil = std::min(stencil, ny);
        g->build();
        return g;
    }

    int npts_tan() const { return d == 1 ? nx : nx * nx; }
    int nmodes() const { return d == 1 ? nx / 2 + 1 : nx * (nx / 2 + 1); }

    /// Wavevector of flattened mode index. For d=1 the r2c index m gives
    /// k1 = 2*pi*m/box. For d=2, FFTW row-major r2c layout: mode = i0*(nx/2+1)+i1
    /// with k2 from signed index i0 and k1 = i1.
    void wavevector(int mode, double& k1, double& k2) const {
        const double f = 2.0 * M_PI / box;
        if (d == 1) {
            k1 = f * mode;
            k2 = 0.0;
        } else {
            const int nh = nx / 2 + 1;
            const int i0 = mode / nh, i1 = mode % nh;
            k1 = f * i1;
            k2 = f * (i0 <= nx / 2 ? i0 : i0 - nx);
        }
    }

    double kmag(int mode) const {
        double k1, k2;
        wavevector(mode, k1, k2);
        return std::hypot(k1, k2);
    }

    /// Parseval multiplicity of a mode in the r2c layout (1 or 2).
    double mode_weight(int mode) const {
        if (d == 1) return (mode == 0 || mode == nx / 2) ? 1.0 : 2.0;
        const int i1 = mode % (nx / 2 + 1);
        return (i1 == 0 || i1 == nx / 2) ? 1.0 : 2.0;
    }

    /// Tangential volume of the periodic box.
    double tan_volume() const { return d == 1 ? box : box * box; }

    /// Whether mode survives the 2/3-rule truncation.
    bool dealias_keep(int mode) const {
        const int cut = nx / 3;
        if (d == 1) return mode <= cut;
        const int nh = nx / 2 + 1;
        const int i0 = mode / nh, i1 = mode % nh;
        const int m2 = i0 <= nx / 2 ? i0 : nx - i0;
        return i1 <= cut && m2 <= cut;
    }

    /// integral over [0,Ly] of nodal values
    double integrate(const Vec& f) const { return qw.dot(f); }
    Complex integrate(const CVec& f) const { return qw.cast<Complex>().dot(f); }

    /// Antiderivative with F(0)=0 (i.e. F(y) = int_0^y f).
    Vec cumulative_from_bottom(const Vec& f) const {
        return anti_bottom_->solve(rhs_for_anti(f, 0));
    }
    CVec cumulative_from_bottom(const CVec& f) const {
        CVec r = rhs_c(f, 0);
        return anti_bottom_->solve(r.real()).cast<Complex>() +
               Complex(0, 1) * anti_bottom_->solve(r.imag()).cast<Complex>();
    }

    /// Tail integral G(y) = int_y^Ly f (G(Ly)=0).
    Vec tail_integral(const Vec& f) const { return -anti_top_->solve(rhs_for_anti(f, ny - 1)); }
    CVec tail_integral(const CVec& f) const {
        CVec r = rhs_c(f, ny - 1);
        return -(anti_top_->solve(r.real()).cast<CVec::Scalar>() +
                 Complex(0, 1) * anti_top_->solve(r.imag()).cast<CVec::Scalar>());
    }

  private:
    // d/ds matrix on the uniform computational grid, with row `pin` replaced by identity
    std::shared_ptr<Eigen::PartialPivLU<Mat>> anti_bottom_, anti_top_;
    Mat ds_;  // pure d/ds operator

    Vec rhs_for_anti(const Vec& f, int pin) const {
        Vec r = f.cwiseProduct(dyds);
        r[pin] = 0.0;
        return r;
    }
    CVec rhs_c(const CVec& f, int pin) const {
        CVec r = f.cwiseProduct(dyds.cast<Complex>());
        r[pin] = 0.0;
        return r;
    }

    void map(double s, double& yv, double& y1, double& y2) const {
        switch (stretching.kind) {
            case Stretching::Kind::Uniform:
                yv = Ly * s;
                y1 = Ly;
                y2 = 0.0;
                return;
            case Stretching::Kind::Tanh: {
                const double b = stretching.beta, tb = std::tanh(b);
                const double c = std::cosh(b * (1.0 - s));
                yv = Ly * (1.0 - std::tanh(b * (1.0 - s)) / tb);
                y1 = Ly * b / (tb * c * c);
                y2 = Ly * 2.0 * b * b * std::tanh(b * (1.0 - s)) / (tb * c * c);
                return;
            }
        }
        throw Error("grid: unknown stretching");
    }

    void build() {
        y.resize(ny);
        dyds.resize(ny);
        d2yds2.resize(ny);
        const double h = 1.0 / (ny - 1);
        for (int i = 0; i < ny; ++i) map(i * h, y[i], dyds[i], d2yds2[i]);
        y[0] = 0.0;
        y[ny - 1] = Ly;

        // d/ds and d2/ds2 on the uniform grid, then chain rule.
        ds_ = Mat::Zero(ny, ny);
        Mat d2s = Mat::Zero(ny, ny);
        const int w = stencil;
        for (int i = 0; i < ny; ++i) {
            int j0 = std::clamp(i - w / 2, 0, ny - w);
            Vec xs(w);
            for (int j = 0; j < w; ++j) xs[j] = (j0 + j) * h;
            Vec w1 = detail::fornberg_weights(i * h, xs, 1);
            Vec w2 = detail::fornberg_weights(i * h, xs, 2);
            for (int j = 0; j < w; ++j) {
                ds_(i, j0 + j) = w1[j];
                d2s(i, j0 + j) = w2[j];
            }
        }
        Vec sy = dyds.cwiseInverse();                              // ds/dy
        Vec syy = -d2yds2.cwiseQuotient(dyds.array().pow(3).matrix());  // d2s/dy2
        D1 = sy.asDiagonal() * ds_;
        D2 = sy.cwiseProduct(sy).asDiagonal() * d2s + syy.asDiagonal() * ds_;

        // Antiderivative solvers: replace one row of d/ds with a pin.
        Mat ab = ds_, at = ds_;
        ab.row(0).setZero();
        ab(0, 0) = 1.0;
        at.row(ny - 1).setZero();
        at(ny - 1, ny - 1) = 1.0;
        anti_bottom_ = std::make_shared<Eigen::PartialPivLU<Mat>>(ab);
        anti_top_ = std::make_shared<Eigen::PartialPivLU<Mat>>(at);

        // Quadrature weights from the antiderivative operator: w_i = d(F(Ly))/df_i.
        qw.resize(ny);
        for (int i = 0; i < ny; ++i) {
            Vec e = Vec::Zero(ny);
            e[i] = 1.0;
            qw[i] = cumulative_from_bottom(e)[ny - 1];
        }
    }
};

using GridPtr = std::shared_ptr<const Grid>;

}  // namespace nsbl
