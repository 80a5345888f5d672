#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace netkf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

inline Mat symmetrize(const Mat& p) { return 0.5 * (p + p.transpose()); }

/// Induced 1-norm (maximum absolute column sum).
inline double one_norm(const Mat& m) {
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

/// Throws std::invalid_argument unless m is symmetric positive semidefinite
/// (minimum eigenvalue above -1e-10 relative to the largest magnitude).
void require_psd(const Mat& m, const std::string& what);

/// Nearest positive-semidefinite matrix (negative eigenvalues clamped to
/// zero). Returns the input unchanged, bit for bit, when it is already PSD.
/// Covariance hygiene for the delayed data update, whose subtraction is not
/// structurally PSD: overlapping delayed corrections can push an eigenvalue
/// negative, and the error would otherwise feed back through the stored
/// step history and grow.
Mat project_psd(const Mat& p);

/// SplitMix64 step; mutates the stream state and returns the next value.
/// Used to derive independent sub-seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace netkf
