#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cfmimo {

/// Invalid configuration value; the message names the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(field) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A numerical routine could not produce a trustworthy result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure inside a simulation episode, carrying setup/step context.
class SimulationError : public std::runtime_error {
public:
    SimulationError(std::uint64_t setup_seed, int step, const std::string& what)
        : std::runtime_error("setup seed " + std::to_string(setup_seed) + ", step " +
                             std::to_string(step) + ": " + what),
          setup_seed_(setup_seed),
          step_(step) {}

    std::uint64_t setup_seed() const noexcept { return setup_seed_; }
    int step() const noexcept { return step_; }

private:
    std::uint64_t setup_seed_;
    int step_;
};

}  // namespace cfmimo
