#include <immintrin.h>

#include <cmath>
#include <vector>

#include "cfmimo/simd/kernels.hpp"

// Compiled with -mavx2 -mfma but -ffp-contract=off: every product and sum is
// issued in the same order as the scalar reference, so the elementwise kernels
// are bit-identical to it. Reductions (dot_conj, power_moments) differ only in
// summation order.

namespace cfmimo::simd {

namespace detail {
const KernelSet& avx2_kernel_set();
}

namespace {

inline __m256d odd_negate_mask() { return _mm256_set_pd(-0.0, 0.0, -0.0, 0.0); }

void ar1_update(double* f, const double* rho, const double* innovation, std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_loadu_pd(rho + i);
        const __m256d scale = _mm256_sqrt_pd(_mm256_sub_pd(one, _mm256_mul_pd(r, r)));
        const __m256d prev = _mm256_loadu_pd(f + i);
        const __m256d z = _mm256_loadu_pd(innovation + i);
        _mm256_storeu_pd(f + i, _mm256_add_pd(_mm256_mul_pd(r, prev), _mm256_mul_pd(scale, z)));
    }
    for (; i < n; ++i) {
        const double scale = std::sqrt(1.0 - rho[i] * rho[i]);
        f[i] = rho[i] * f[i] + scale * innovation[i];
    }
}

void wrap_distances(const double* xs, const double* ys, double px, double py, double side,
                    double* out, std::size_t n) {
    const __m256d vpx = _mm256_set1_pd(px);
    const __m256d vpy = _mm256_set1_pd(py);
    const __m256d vside = _mm256_set1_pd(side);
    const __m256d sign = _mm256_set1_pd(-0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d dx = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(xs + i), vpx));
        __m256d dy = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(ys + i), vpy));
        dx = _mm256_min_pd(dx, _mm256_sub_pd(vside, dx));
        dy = _mm256_min_pd(dy, _mm256_sub_pd(vside, dy));
        const __m256d sq = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
        _mm256_storeu_pd(out + i, _mm256_sqrt_pd(sq));
    }
    for (; i < n; ++i) {
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
    const __m256d neg_im = odd_negate_mask();
    for (std::size_t r = 0; r < n; ++r) {
        const double ar = v[2 * r];
        const double ai = v[2 * r + 1];
        const __m256d bar = _mm256_set1_pd(ar);
        const __m256d bai = _mm256_set1_pd(ai);
        double* row = a + 2 * r * n;
        std::size_t c = 0;
        for (; c + 2 <= n; c += 2) {
            const __m256d xc = _mm256_loadu_pd(v + 2 * c);
            const __m256d t1 = _mm256_xor_pd(_mm256_mul_pd(bar, xc), neg_im);
            const __m256d t2 = _mm256_mul_pd(bai, _mm256_permute_pd(xc, 0b0101));
            const __m256d cur = _mm256_loadu_pd(row + 2 * c);
            _mm256_storeu_pd(row + 2 * c, _mm256_add_pd(cur, _mm256_add_pd(t1, t2)));
        }
        for (; c < n; ++c) {
            const double cr = v[2 * c];
            const double ci = v[2 * c + 1];
            row[2 * c] += ar * cr + ai * ci;
            row[2 * c + 1] += ai * cr - ar * ci;
        }
    }
}

cplx dot_conj(const cplx* a, const cplx* b, std::size_t n) {
    const auto* pa = reinterpret_cast<const double*>(a);
    const auto* pb = reinterpret_cast<const double*>(b);
    const __m256d neg_im = odd_negate_mask();
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
        const __m256d t1 = _mm256_mul_pd(_mm256_movedup_pd(va), vb);
        const __m256d t2 = _mm256_mul_pd(_mm256_permute_pd(va, 0b1111), _mm256_permute_pd(vb, 0b0101));
        acc = _mm256_add_pd(acc, _mm256_add_pd(t1, _mm256_xor_pd(t2, neg_im)));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double re = lanes[0] + lanes[2];
    double im = lanes[1] + lanes[3];
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    return {re, im};
}

void power_moments(const cplx* z, const double* w, std::size_t q, cplx* out, std::size_t lags) {
    std::vector<double> acc(4 * lags, 0.0);
    const auto* pz = reinterpret_cast<const double*>(z);
    std::size_t i = 0;
    for (; i + 2 <= q; i += 2) {
        const __m256d vz = _mm256_loadu_pd(pz + 2 * i);
        const __m256d vz_swapped = _mm256_permute_pd(vz, 0b0101);
        const __m256d vw = _mm256_set_pd(w[i + 1], w[i + 1], w[i], w[i]);
        __m256d p = _mm256_set_pd(0.0, 1.0, 0.0, 1.0);
        for (std::size_t d = 0; d < lags; ++d) {
            double* slot = acc.data() + 4 * d;
            _mm256_storeu_pd(slot, _mm256_add_pd(_mm256_loadu_pd(slot), _mm256_mul_pd(vw, p)));
            const __m256d t1 = _mm256_mul_pd(_mm256_movedup_pd(p), vz);
            const __m256d t2 = _mm256_mul_pd(_mm256_permute_pd(p, 0b1111), vz_swapped);
            p = _mm256_addsub_pd(t1, t2);
        }
    }
    for (std::size_t d = 0; d < lags; ++d) {
        out[d] = cplx(acc[4 * d] + acc[4 * d + 2], acc[4 * d + 1] + acc[4 * d + 3]);
    }
    for (; i < q; ++i) {
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

namespace detail {
const KernelSet& avx2_kernel_set() {
    static const KernelSet set{"avx2", ar1_update, wrap_distances, herm_rank1_update, dot_conj,
                               power_moments};
    return set;
}
}  // namespace detail

}  // namespace cfmimo::simd
