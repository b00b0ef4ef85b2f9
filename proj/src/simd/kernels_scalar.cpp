#include <cmath>

#include "cfmimo/simd/kernels.hpp"

namespace cfmimo::simd {
namespace {

// Complex arithmetic is spelled out on the real/imaginary parts so the vector
// variants can reproduce the exact operation order.

void ar1_update(double* f, const double* rho, const double* innovation, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double scale = std::sqrt(1.0 - rho[i] * rho[i]);
        f[i] = rho[i] * f[i] + scale * innovation[i];
    }
}

void wrap_distances(const double* xs, const double* ys, double px, double py, double side,
                    double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double dx = std::fabs(xs[i] - px);
        double dy = std::fabs(ys[i] - py);
        dx = std::fmin(dx, side - dx);
        dy = std::fmin(dy, side - dy);
        out[i] = std::sqrt(dx * dx + dy * dy);
    }
}

void herm_rank1_update(cplx* acc, const cplx* x, std::size_t n) {
    auto* a = reinterpret_cast<double*>(acc);
    const auto* v = reinterpret_cast<const double*>(x);
    for (std::size_t r = 0; r < n; ++r) {
        const double ar = v[2 * r];
        const double ai = v[2 * r + 1];
        double* row = a + 2 * r * n;
        for (std::size_t c = 0; c < n; ++c) {
            const double cr = v[2 * c];
            const double ci = v[2 * c + 1];
            row[2 * c] += ar * cr + ai * ci;
            row[2 * c + 1] += ai * cr - ar * ci;
        }
    }
}

cplx dot_conj(const cplx* a, const cplx* b, std::size_t n) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    return {re, im};
}

void power_moments(const cplx* z, const double* w, std::size_t q, cplx* out, std::size_t lags) {
    for (std::size_t d = 0; d < lags; ++d) out[d] = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
        const double zr = z[i].real(), zi = z[i].imag();
        double pr = 1.0, pi = 0.0;
        for (std::size_t d = 0; d < lags; ++d) {
            out[d] += cplx(w[i] * pr, w[i] * pi);
            const double nr = pr * zr - pi * zi;
            const double ni = pr * zi + pi * zr;
            pr = nr;
            pi = ni;
        }
    }
}

}  // namespace

const KernelSet& scalar_kernels() {
    static const KernelSet set{"scalar", ar1_update, wrap_distances, herm_rank1_update, dot_conj,
                               power_moments};
    return set;
}

}  // namespace cfmimo::simd
