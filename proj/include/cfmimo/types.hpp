#pragma once

#include <complex>

#include <Eigen/Dense>

namespace cfmimo {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

constexpr double kPi = 3.14159265358979323846;
constexpr double kSpeedOfLight = 299792458.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double kmh_to_mps(double kmh) { return kmh / 3.6; }

}  // namespace cfmimo
