#include "cfmimo/selftest.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "cfmimo/channel.hpp"
#include "cfmimo/geometry.hpp"
#include "cfmimo/pilot.hpp"
#include "cfmimo/rng.hpp"
#include "cfmimo/simd/kernels.hpp"

namespace cfmimo {

namespace {

bool check_wrap_distance() {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const Point a{rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)};
        const Point b{rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)};
        double best = 1e300;
        for (int dx = -1; dx <= 1; ++dx) {
            for (int dy = -1; dy <= 1; ++dy) {
                best = std::min(best, std::hypot(a.x - b.x - 100.0 * dx, a.y - b.y - 100.0 * dy));
            }
        }
        if (std::abs(best - wrap_distance(a, b, 100.0)) > 1e-9) return false;
    }
    return true;
}

bool check_covariance() {
    const auto cov = one_ring_covariance(2.5, 0.3, 10.0 * kPi / 180.0, 4, 0.5);
    for (int n = 0; n < 4; ++n) {
        if (cov.R(n, n) != cplx(2.5, 0.0)) return false;
    }
    return (cov.R - cov.R.adjoint()).norm() < 1e-12 && std::abs(cov.R.trace().real() - 10.0) < 1e-12;
}

bool check_scalar_mmse() {
    CMat R(1, 1);
    R(0, 0) = 3.0;
    CMat psi(1, 1);
    psi(0, 0) = 10.0 * 0.5 * 3.0 + 0.2;
    const auto f = mmse_filter(R, psi, 10, 0.5);
    const double expected_c = 3.0 - 10.0 * 0.5 * 9.0 / psi(0, 0).real();
    return std::abs(f.C(0, 0).real() - expected_c) < 1e-12;
}

bool check_kernels() {
    const simd::KernelSet* fast = simd::avx2_kernels();
    if (fast == nullptr) return true;
    const auto& ref = simd::scalar_kernels();
    Rng rng(5);
    std::vector<cplx> a(37), b(37);
    for (auto& x : a) x = rng.complex_normal();
    for (auto& x : b) x = rng.complex_normal();
    const cplx d1 = ref.dot_conj(a.data(), b.data(), a.size());
    const cplx d2 = fast->dot_conj(a.data(), b.data(), a.size());
    if (std::abs(d1 - d2) > 1e-12 * (1.0 + std::abs(d1))) return false;
    std::vector<double> f1(13), f2, rho(13), innov(13);
    for (std::size_t i = 0; i < f1.size(); ++i) {
        f1[i] = rng.normal();
        rho[i] = rng.uniform();
        innov[i] = rng.normal();
    }
    f2 = f1;
    ref.ar1_update(f1.data(), rho.data(), innov.data(), f1.size());
    fast->ar1_update(f2.data(), rho.data(), innov.data(), f2.size());
    return f1 == f2;
}

}  // namespace

bool run_selftest(std::ostream& out) {
    const std::vector<std::pair<std::string, std::function<bool()>>> checks{
        {"wrap-around distance", check_wrap_distance},
        {"one-ring covariance", check_covariance},
        {"scalar MMSE error", check_scalar_mmse},
        {std::string("kernels (") + simd::active_kernels().name + ")", check_kernels},
    };
    bool ok = true;
    for (const auto& [name, fn] : checks) {
        bool passed = false;
        try {
            passed = fn();
        } catch (const std::exception& e) {
            out << "  error: " << e.what() << '\n';
        }
        out << (passed ? "ok   " : "FAIL ") << name << '\n';
        ok = ok && passed;
    }
    return ok;
}

}  // namespace cfmimo
