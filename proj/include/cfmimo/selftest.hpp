#pragma once

#include <iosfwd>

namespace cfmimo {

/// Fast internal consistency checks (geometry, covariance, estimation,
/// kernels). Prints one line per check; returns true when all pass.
bool run_selftest(std::ostream& out);

}  // namespace cfmimo
