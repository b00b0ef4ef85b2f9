#include <cstdlib>
#include <string_view>

#include "cfmimo/simd/kernels.hpp"

namespace cfmimo::simd {

#if defined(CFMIMO_HAVE_AVX2)
namespace detail {
const KernelSet& avx2_kernel_set();
}
#endif

const KernelSet* avx2_kernels() {
#if defined(CFMIMO_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    static const bool supported =
        __builtin_cpu_supports("avx2") != 0 && __builtin_cpu_supports("fma") != 0;
    return supported ? &detail::avx2_kernel_set() : nullptr;
#else
    return nullptr;
#endif
}

const KernelSet& active_kernels() {
    static const KernelSet& chosen = [] () -> const KernelSet& {
        const char* env = std::getenv("CFMIMO_SIMD");
        if (env != nullptr && std::string_view(env) == "scalar") return scalar_kernels();
        if (const KernelSet* fast = avx2_kernels()) return *fast;
        return scalar_kernels();
    }();
    return chosen;
}

}  // namespace cfmimo::simd
