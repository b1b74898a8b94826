#pragma once

#include "nsbl/norms/norms.hpp"

namespace nsbl {

/// The velocity/vorticity energy pair tracked along an error evolution.
/// E is built from lifted tangential norms of the error velocity plus
/// weighted conormal norms of the outer/layer vorticity pieces; K collects
/// the matching half-derivative dissipation terms over (0, y(t)).
struct EnergyReport {
    double t = 0.0;
    double eps = 0.0;
    double Ev = 0.0, Kv = 0.0, Ew = 0.0, Kw = 0.0;
    double E() const { return Ev + Ew; }
    double K() const { return Kv + Kw; }
};

/// Evaluate the energy functionals for error velocity U and the vorticity
/// split (we, wp), with the 8/9/10 order ladder replaced by
/// m_star/m_star+1/m_star+2.
inline EnergyReport energy_report(const VectorField& U, const SpectralField& we,
                                  const SpectralField& wp, double t, double eps,
                                  const WeightConfig& wc) {
    wc.validate();
    const int ms = wc.m_star;
    const double ie2 = 1.0 / (eps * eps);
    const double yc = weights::critical_height(t, wc);
    EnergyReport r;
    r.t = t;
    r.eps = eps;

    VectorField Ul(U.grid());
    for (size_t i = 0; i < U.u.size(); ++i) Ul.u[i] = apply_lift(U.u[i], t, wc);
    Ul.v = apply_lift(U.v, t, wc);

    r.Ev = ie2 * (sq_norm(Ul, NormFamily::Tan, {ms + 1, false, -1.0}, t, eps, wc) +
                  sq_norm(U, NormFamily::Tan, {ms + 2, false, -1.0}, t, eps, wc));
    r.Kv = ie2 * sq_norm(Ul, NormFamily::Tan, {ms + 1, true, yc}, t, eps, wc);

    const Vec vp = weights::varphi_profile(*we.grid, wc.delta);
    SpectralField pwe = scale_by_profile(we, vp);
    SpectralField pwp = scale_by_profile(wp, vp);
    SpectralField wel = apply_lift(we, t, wc);
    SpectralField wpl = apply_lift(wp, t, wc);
    SpectralField pwel = apply_lift(pwe, t, wc);
    SpectralField pwpl = apply_lift(pwp, t, wc);

    const NormParams pm{ms, false, -1.0};
    const NormParams pm1{ms + 1, false, -1.0};
    r.Ew = ie2 * (sq_norm(pwel, NormFamily::WeightedOuter, pm, t, eps, wc) +
                  sq_norm(pwpl, NormFamily::WeightedLayer, pm, t, eps, wc) +
                  sq_norm(pwe, NormFamily::Co, pm1, t, eps, wc) +
                  sq_norm(pwp, NormFamily::WeightedLayer, pm1, t, eps, wc)) +
           sq_norm(wel, NormFamily::WeightedOuter, pm, t, eps, wc) +
           sq_norm(wpl, NormFamily::WeightedLayer, pm, t, eps, wc) +
           sq_norm(we, NormFamily::Co, pm1, t, eps, wc) +
           sq_norm(wp, NormFamily::WeightedLayer, pm1, t, eps, wc);

    const NormParams km{ms, true, yc};
    r.Kw = ie2 * (sq_norm(pwel, NormFamily::WeightedOuter, km, t, eps, wc) +
                  sq_norm(pwpl, NormFamily::WeightedLayer, km, t, eps, wc)) +
           sq_norm(wel, NormFamily::WeightedOuter, km, t, eps, wc) +
           sq_norm(wpl, NormFamily::WeightedLayer, km, t, eps, wc);
    return r;
}

}  // namespace nsbl
