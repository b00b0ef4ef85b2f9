#pragma once

#include <cstdint>
#include <random>

#include "cfmimo/types.hpp"

namespace cfmimo {

/// Stream identifiers used to split a setup seed into independent substreams.
enum class Stream : std::uint64_t {
    deployment = 1,
    ue_placement = 2,
    shadow_init = 3,
    shadow_evolve = 4,
    small_scale = 5,
};

/// SplitMix64 finalizer; a bijective mix of a 64-bit word.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based seed split: child seeds depend only on (parent, id), so adding
/// new children never perturbs existing ones.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t id);
std::uint64_t derive_seed(std::uint64_t parent, Stream stream);
std::uint64_t derive_seed(std::uint64_t parent, Stream stream, std::uint64_t index);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return unit_(engine_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }
    double normal() { return normal_(engine_); }
    double normal(double stddev) { return stddev * normal_(engine_); }
    /// Circularly-symmetric CN(0, 1) sample.
    cplx complex_normal() {
        constexpr double kHalfRoot = 0.70710678118654752440;
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {kHalfRoot * re, kHalfRoot * im};
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace cfmimo
