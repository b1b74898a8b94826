#pragma once

#include "nsbl/core/field.hpp"

namespace nsbl {

/// Interpolates layer fields u(z) onto the outer wall-normal grid through
/// z = y / eps. Interpolation is 8-point Lagrange in the layer grid's uniform
/// computational coordinate, so it inherits the smoothness of the mapped
/// representation. Outer nodes with y / eps beyond the layer strip get zero;
/// this is legitimate only for fields that have decayed by the strip top,
/// which is checked per call.
class LayerResampler {
public:
    LayerResampler(GridPtr layer, GridPtr outer, double eps)
        : layer_(std::move(layer)), outer_(std::move(outer)), eps_(eps) {
        if (eps <= 0) throw ConfigError("resample: eps must be positive");
        if (layer_->nmodes() != outer_->nmodes())
            throw ConfigError("resample: layer and outer grids must share the tangential box");
        const int nz = layer_->ny, p = std::min(8, nz);
        const double h = 1.0 / (nz - 1);
        W_ = Mat::Zero(outer_->ny, nz);
        for (int j = 0; j < outer_->ny; ++j) {
            const double z = outer_->y[j] / eps_;
            if (z > layer_->Ly) continue;
            const double s = inverse_map(z);
            int i0 = std::clamp(static_cast<int>(std::floor(s / h)) - p / 2 + 1, 0, nz - p);
            Vec xs(p);
            for (int i = 0; i < p; ++i) xs[i] = (i0 + i) * h;
            Vec w = detail::fornberg_weights(s, xs, 0);
            for (int i = 0; i < p; ++i) W_(j, i0 + i) = w[i];
        }
    }

    GridPtr outer() const { return outer_; }
    double eps() const { return eps_; }

    SpectralField operator()(const SpectralField& f) const {
        if (f.grid.get() != layer_.get())
            throw Error("resample: field lives on a different layer grid");
        check_decay(f, f.name.empty() ? "layer field" : f.name);
        SpectralField r(outer_, f.name);
        r.c = f.c * W_.transpose();
        return r;
    }

private:
    double inverse_map(double z) const {
        switch (layer_->stretching.kind) {
            case Stretching::Kind::Uniform:
                return z / layer_->Ly;
            case Stretching::Kind::Tanh: {
                const double b = layer_->stretching.beta;
                return 1.0 - std::atanh((1.0 - z / layer_->Ly) * std::tanh(b)) / b;
            }
        }
        throw Error("resample: unknown stretching");
    }

    GridPtr layer_, outer_;
    double eps_;
    Mat W_;
};

}  // namespace nsbl
