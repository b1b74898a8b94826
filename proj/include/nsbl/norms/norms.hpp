#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "nsbl/core/field.hpp"
#include "nsbl/norms/weights.hpp"

namespace nsbl {

/// Tangential analytic lift: multiply mode k at height y by
/// e^{phi(t,y) <k>}. Refuses multipliers beyond 1e12.
inline SpectralField apply_lift(const SpectralField& f, double t, const WeightConfig& wc) {
    const Grid& g = *f.grid;
    SpectralField r(f.grid, "lift(" + f.name + ")");
    for (int m = 0; m < g.nmodes(); ++m) {
        const double brk = std::sqrt(1.0 + g.kmag(m) * g.kmag(m));
        for (int j = 0; j < g.ny; ++j) {
            const double e = weights::phi(t, g.y[j], wc) * brk;
            if (e > 27.7) throw Error("apply_lift: multiplier overflow (> 1e12)");
            r.c(m, j) = std::exp(e) * f.c(m, j);
        }
    }
    return r;
}

enum class NormFamily { Tan, Co, WeightedOuter, WeightedLayer };

struct NormParams {
    int m = 2;                 // total derivative order
    bool half = false;         // extra <D_x>^{1/2}
    double upto = -1.0;        // integrate over (0, upto); negative = full
};

namespace detail {

/// Points where the bulk weight exceeds the reciprocal of the per-term noise
/// floor are excluded from weighted sums: every field these families are
/// defined for has decayed below representable relative accuracy before the
/// weight reaches this size, so keeping such points would integrate
/// weight-amplified discretization error, not the field.
inline constexpr double kLogWeightCap = 16.0;  // weight <= ~9e6 per point

/// Log-space accumulation of
///   sum_{m,j} modeweight_m tanfac_m quad_j e^{2 logw_j} |c(m,j)|^2 * volume.
/// Entries where |c| is below the relative noise floor are dropped so huge
/// weights cannot amplify round-off into the sum.
inline double weighted_sq_sum(const CMat& c, const Grid& g, const Vec& tanfac, const Vec& quad,
                              const Vec* logw) {
    const double cmax = c.cwiseAbs().maxCoeff();
    if (cmax == 0.0) return 0.0;
    const double floor_log = std::log(1e-14 * cmax);
    double M = -std::numeric_limits<double>::infinity();
    // quadrature weights may be signed (high-order rule); keep the sign
    std::vector<std::pair<double, double>> terms;  // (log magnitude, sign)
    terms.reserve(static_cast<size_t>(c.size()));
    const double logvol = std::log(g.tan_volume());
    for (int m = 0; m < g.nmodes(); ++m) {
        const double base = std::log(g.mode_weight(m) * tanfac[m]) + logvol;
        for (int j = 0; j < g.ny; ++j) {
            if (quad[j] == 0.0) continue;
            if (logw && (*logw)[j] > kLogWeightCap) continue;
            const double a = std::abs(c(m, j));
            if (a == 0.0) continue;
            const double la = std::log(a);
            if (la < floor_log) continue;
            double term =
                base + std::log(std::abs(quad[j])) + 2.0 * la + (logw ? 2.0 * (*logw)[j] : 0.0);
            terms.emplace_back(term, quad[j] > 0.0 ? 1.0 : -1.0);
            M = std::max(M, term);
        }
    }
    if (terms.empty()) return 0.0;
    double s = 0.0;
    for (auto [lt, sg] : terms) s += sg * std::exp(lt - M);
    if (s <= 0.0) return 0.0;  // fully cancelled: below quadrature noise
    return std::exp(M + std::log(s));
}

inline Vec tangential_factor(const Grid& g, int orders_up_to, bool half) {
    Vec f(g.nmodes());
    for (int m = 0; m < g.nmodes(); ++m) {
        const double k2 = g.kmag(m) * g.kmag(m);
        double s = 1.0, p = 1.0;
        for (int i = 1; i <= orders_up_to; ++i) {
            p *= k2;
            s += p;
        }
        if (half) s *= std::sqrt(1.0 + k2);
        f[m] = s;
    }
    return f;
}

}  // namespace detail

/// Squared norm of one scalar field in the requested family at time t.
/// Tan: sum_{i<=m} |dx^i f|^2. Co adds conormal layers Z^j = varphi^j dy^j.
/// The weighted families multiply by the outer/layer bulk weights (held in
/// log space throughout).
inline double sq_norm(const SpectralField& f, NormFamily fam, const NormParams& p, double t,
                      double eps, const WeightConfig& wc) {
    const Grid& g = *f.grid;
    // the layer family is a norm of the strip profile w(y/eps): its domain is
    // the strip image y <= eps z_max, where the bulk weight stays bounded by
    // e^{z_max^2 delta}
    double upto = p.upto;
    if (fam == NormFamily::WeightedLayer) {
        const double strip = eps * wc.z_max;
        if (strip < g.y[g.ny - 1]) upto = upto < 0.0 ? strip : std::min(upto, strip);
    }
    const Vec quad = upto >= 0.0 ? weights::subrange_weights(g, upto) : g.qw;
    Vec logw;
    const Vec* lw = nullptr;
    if (fam == NormFamily::WeightedOuter) {
        logw = weights::log_outer_weight(g, t, eps, wc);
        lw = &logw;
    } else if (fam == NormFamily::WeightedLayer) {
        logw = weights::log_layer_weight(g, t, eps, wc);
        lw = &logw;
    }
    if (fam == NormFamily::Tan) {
        return detail::weighted_sq_sum(f.c, g, detail::tangential_factor(g, p.m, p.half), quad,
                                       lw);
    }
    const Vec vp = weights::varphi_profile(g, wc.delta);
    double total = 0.0;
    SpectralField dj = f;
    Vec scale = Vec::Ones(g.ny);
    for (int j = 0; j <= p.m; ++j) {
        if (j > 0) {
            dj = normal_derivative(dj, 1);
            scale = scale.cwiseProduct(vp);
        }
        CMat zc = dj.c;
        for (int col = 0; col < g.ny; ++col) zc.col(col) *= scale[col];
        total += detail::weighted_sq_sum(zc, g, detail::tangential_factor(g, p.m - j, p.half),
                                         quad, lw);
    }
    return total;
}

inline double sq_norm(const VectorField& U, NormFamily fam, const NormParams& p, double t,
                      double eps, const WeightConfig& wc) {
    double s = 0.0;
    for (const auto& f : U.u) s += sq_norm(f, fam, p, t, eps, wc);
    s += sq_norm(U.v, fam, p, t, eps, wc);
    return s;
}

}  // namespace nsbl
