#pragma once

#include <fftw3.h>

#include <mutex>
#include <vector>

#include "nsbl/core/grid.hpp"

namespace nsbl {

/// RAII FFTW plans for the tangential transforms of one grid family.
/// Physical layout: npts_tan x ny (column-major), spectral: nmodes x ny.
/// Plans use FFTW_ESTIMATE so planning is deterministic run to run.
class Fourier {
  public:
    explicit Fourier(const Grid& g) : d_(g.d), nx_(g.nx), ny_(g.ny) {
        const int npts = g.npts_tan(), nmod = g.nmodes();
        in_.resize(static_cast<size_t>(npts) * ny_);
        out_.resize(static_cast<size_t>(nmod) * ny_);
        std::lock_guard<std::mutex> lk(planner_mutex());
        if (d_ == 1) {
            int n[1] = {nx_};
            fwd_ = fftw_plan_many_dft_r2c(1, n, ny_, in_.data(), nullptr, 1, npts,
                                          reinterpret_cast<fftw_complex*>(out_.data()), nullptr, 1,
                                          nmod, FFTW_ESTIMATE);
            bwd_ = fftw_plan_many_dft_c2r(1, n, ny_, reinterpret_cast<fftw_complex*>(out_.data()),
                                          nullptr, 1, nmod, in_.data(), nullptr, 1, npts,
                                          FFTW_ESTIMATE);
        } else {
            int n[2] = {nx_, nx_};
            fwd_ = fftw_plan_many_dft_r2c(2, n, ny_, in_.data(), nullptr, 1, npts,
                                          reinterpret_cast<fftw_complex*>(out_.data()), nullptr, 1,
                                          nmod, FFTW_ESTIMATE);
            bwd_ = fftw_plan_many_dft_c2r(2, n, ny_, reinterpret_cast<fftw_complex*>(out_.data()),
                                          nullptr, 1, nmod, in_.data(), nullptr, 1, npts,
                                          FFTW_ESTIMATE);
        }
    }

    ~Fourier() {
        std::lock_guard<std::mutex> lk(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }

    Fourier(const Fourier&) = delete;
    Fourier& operator=(const Fourier&) = delete;

    /// physical (npts x ny) -> spectral (nmodes x ny), normalized so that
    /// f(x) = sum_k c_k e^{i k.x} with Hermitian completion.
    CMat to_spectral(const Mat& phys) {
        const int npts = d_ == 1 ? nx_ : nx_ * nx_;
        std::copy(phys.data(), phys.data() + phys.size(), in_.data());
        fftw_execute(fwd_);
        CMat c(npts == nx_ ? nx_ / 2 + 1 : nx_ * (nx_ / 2 + 1), ny_);
        std::copy(out_.data(), out_.data() + c.size(), c.data());
        c /= static_cast<double>(npts);
        return c;
    }

    Mat to_physical(const CMat& spec) {
        const int npts = d_ == 1 ? nx_ : nx_ * nx_;
        std::copy(spec.data(), spec.data() + spec.size(), out_.data());
        fftw_execute(bwd_);
        Mat p(npts, ny_);
        std::copy(in_.data(), in_.data() + p.size(), p.data());
        return p;
    }

    /// Shared transform object per grid signature.
    static Fourier& for_grid(const Grid& g) {
        static std::mutex m;
        static std::vector<std::pair<std::tuple<int, int, int>, std::unique_ptr<Fourier>>> cache;
        std::lock_guard<std::mutex> lk(m);
        auto key = std::make_tuple(g.d, g.nx, g.ny);
        for (auto& [k, f] : cache)
            if (k == key) return *f;
        cache.emplace_back(key, std::make_unique<Fourier>(g));
        return *cache.back().second;
    }

  private:
    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }
    int d_, nx_, ny_;
    std::vector<double> in_;
    std::vector<Complex> out_;
    fftw_plan fwd_, bwd_;
};

}  // namespace nsbl
