#pragma once

// Data-parallel inner loops of the simulator. Each kernel has a scalar
// reference implementation and, where the build and the CPU allow it, an AVX2
// variant. The active backend is chosen once at first use; CFMIMO_SIMD=scalar
// forces the reference path.

#include <cstddef>
#include <span>

#include "cfmimo/types.hpp"

namespace cfmimo::simd {

struct KernelSet {
    const char* name;

    // f[i] = rho[i] * f[i] + sqrt(1 - rho[i]^2) * innovation[i]
    void (*ar1_update)(double* f, const double* rho, const double* innovation, std::size_t n);

    // out[i] = torus distance between (px, py) and (xs[i], ys[i]) on a square of
    // side `side`; both points must already be folded into [0, side).
    void (*wrap_distances)(const double* xs, const double* ys, double px, double py, double side,
                           double* out, std::size_t n);

    // acc (n x n, row-major) += x x^H
    void (*herm_rank1_update)(cplx* acc, const cplx* x, std::size_t n);

    // sum_i conj(a[i]) * b[i]
    cplx (*dot_conj)(const cplx* a, const cplx* b, std::size_t n);

    // out[d] = sum_q w[q] * z[q]^d for d in [0, lags)
    void (*power_moments)(const cplx* z, const double* w, std::size_t q, cplx* out,
                          std::size_t lags);
};

const KernelSet& scalar_kernels();

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelSet* avx2_kernels();

/// Backend selected for this process.
const KernelSet& active_kernels();

// Span front-ends over the active backend.

inline void ar1_update(std::span<double> f, std::span<const double> rho,
                       std::span<const double> innovation) {
    active_kernels().ar1_update(f.data(), rho.data(), innovation.data(), f.size());
}

inline void wrap_distances(std::span<const double> xs, std::span<const double> ys, double px,
                           double py, double side, std::span<double> out) {
    active_kernels().wrap_distances(xs.data(), ys.data(), px, py, side, out.data(), out.size());
}

inline void herm_rank1_update(std::span<cplx> acc, std::span<const cplx> x) {
    active_kernels().herm_rank1_update(acc.data(), x.data(), x.size());
}

inline cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b) {
    return active_kernels().dot_conj(a.data(), b.data(), a.size());
}

inline void power_moments(std::span<const cplx> z, std::span<const double> w,
                          std::span<cplx> out) {
    active_kernels().power_moments(z.data(), w.data(), z.size(), out.data(), out.size());
}

}  // namespace cfmimo::simd
