#pragma once

#include <cstdint>

namespace netkf {

/// Dense-arithmetic cost accounting for estimator update paths.
///
/// Conventions: C = A*B with A m-by-n and B n-by-p counts 2mnp flops,
/// elementwise add/scale counts one flop per entry, and an n-by-n inversion
/// counts 2n^3 (LU factorization plus solves). Model evaluations (kinematics,
/// Jacobians) and validation checks are not counted; only the filter algebra
/// is, identically for every estimator, so normalized ratios are comparable.
class FlopCounter {
 public:
  void gemm(long m, long n, long p) { total_ += 2ll * m * n * p; }
  void elementwise(long m, long n) { total_ += static_cast<long long>(m) * n; }
  void inverse(long n) { total_ += 2ll * n * n * n; }

  void reset() { total_ = 0; }
  long long total() const { return total_; }

 private:
  long long total_ = 0;
};

}  // namespace netkf
