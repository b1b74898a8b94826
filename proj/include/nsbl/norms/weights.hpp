#pragma once

#include <cmath>

#include "nsbl/core/grid.hpp"

namespace nsbl {

/// Parameters of the analytic / conormal weight family and the surrogate
/// derivative order used by the energy functionals.
struct WeightConfig {
    double delta = 0.1;   // weight amplitude
    double lambda = 1.0;  // analyticity-radius decay rate
    int m_star = 2;       // surrogate order replacing the 8/9/10 ladder
    double z_max = 12.0;  // layer-strip height; layer norms live on y <= eps z_max

    void validate() const {
        if (delta <= 0 || lambda <= 0) throw Error("weights: delta and lambda must be positive");
        if (m_star < 1 || m_star > 4) throw Error("weights: m_star must be in [1,4]");
        if (z_max <= 0) throw Error("weights: z_max must be positive");
    }
};

namespace weights {

/// C^2 ramp: 0 at 0 with zero slope, delta from y = 1/2 on, slopes O(delta).
inline double theta(double y, double delta) {
    double t = 2.0 * y;
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return delta;
    return delta * t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

inline double theta_prime(double y, double delta) {
    double t = 2.0 * y;
    if (t <= 0.0 || t >= 1.0) return 0.0;
    double omt = t - 1.0;
    return 2.0 * delta * 30.0 * t * t * omt * omt;
}

/// phi(t, y) = delta - theta(y) - lambda t; the radius of tangential
/// analyticity at height y.
inline double phi(double t, double y, const WeightConfig& w) {
    return w.delta - theta(y, w.delta) - w.lambda * t;
}

/// Height where phi vanishes: full 1/2 before decay starts, 0 once the
/// radius is exhausted at the wall.
inline double critical_height(double t, const WeightConfig& w) {
    double target = w.delta - w.lambda * t;
    if (target >= w.delta) return 0.5;
    if (target <= 0.0) return 0.0;
    double lo = 0.0, hi = 0.5;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        (theta(mid, w.delta) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Conormal weight: delta y near the wall, 2 delta y / (1+y) far out, joined
/// by a monotone cubic Hermite bridge on [1, 2]. (The branches delta y and
/// delta y/(1+y) cannot be joined monotonically, so the outer one is doubled;
/// it keeps the same y and 1 asymptotics up to a constant.)
inline double varphi(double y, double delta) {
    if (y <= 0.0) return 0.0;
    if (y <= 1.0) return delta * y;
    if (y >= 2.0) return 2.0 * delta * y / (1.0 + y);
    const double s = y - 1.0;
    const double v0 = delta, v1 = 4.0 * delta / 3.0;
    const double m0 = delta, m1 = 2.0 * delta / 9.0;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * v0 + h10 * m0 + h01 * v1 + h11 * m1;
}

inline Vec varphi_profile(const Grid& g, double delta) {
    Vec w(g.ny);
    for (int j = 0; j < g.ny; ++j) w[j] = varphi(g.y[j], delta);
    return w;
}

/// log of the bulk weight for the outer vorticity piece: phi(t,y)/eps^2.
inline Vec log_outer_weight(const Grid& g, double t, double eps, const WeightConfig& w) {
    Vec lw(g.ny);
    for (int j = 0; j < g.ny; ++j) lw[j] = phi(t, g.y[j], w) / (eps * eps);
    return lw;
}

/// log of the bulk weight for the layer vorticity piece:
/// y^2 (delta - lambda t) / eps^2.
inline Vec log_layer_weight(const Grid& g, double t, double eps, const WeightConfig& w) {
    Vec lw(g.ny);
    const double a = (w.delta - w.lambda * t) / (eps * eps);
    for (int j = 0; j < g.ny; ++j) lw[j] = g.y[j] * g.y[j] * a;
    return lw;
}

/// Trapezoid quadrature weights for int_0^a, with a fractional last cell.
inline Vec subrange_weights(const Grid& g, double a) {
    Vec w = Vec::Zero(g.ny);
    for (int j = 0; j + 1 < g.ny; ++j) {
        const double y0 = g.y[j], y1 = g.y[j + 1];
        if (y0 >= a) break;
        const double dy = y1 - y0;
        if (y1 <= a) {
            w[j] += 0.5 * dy;
            w[j + 1] += 0.5 * dy;
        } else {
            const double s = (a - y0) / dy;
            w[j] += dy * (s - 0.5 * s * s);
            w[j + 1] += dy * 0.5 * s * s;
        }
    }
    return w;
}

}  // namespace weights
}  // namespace nsbl
