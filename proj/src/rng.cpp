#include "cfmimo/rng.hpp"

namespace cfmimo {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t id) {
    return mix64(mix64(parent) ^ mix64(id ^ 0x6a09e667f3bcc909ULL));
}

std::uint64_t derive_seed(std::uint64_t parent, Stream stream) {
    return derive_seed(parent, static_cast<std::uint64_t>(stream));
}

std::uint64_t derive_seed(std::uint64_t parent, Stream stream, std::uint64_t index) {
    return derive_seed(derive_seed(parent, stream), index);
}

}  // namespace cfmimo
