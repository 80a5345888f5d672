#pragma once

#include <deque>
#include <vector>

#include "netkf/poekf.hpp"

namespace netkf {

/// Delay-ignoring baseline: a standard EKF that fuses every arriving
/// measurement as if it had been taken at the current tick.
class NaiveEkf {
 public:
  NaiveEkf(ProcessModel proc, MeasurementModel meas, GaussianState init);

  void predict(const Vec& u_eff);
  FuseOutcome fuse(const MeasurementPacket& pkt);

  const GaussianState& state() const { return state_; }
  long tick() const { return state_.tick; }
  long stale_discards() const { return 0; }
  FlopCounter& flops() { return flops_; }
  const FlopCounter& flops() const { return flops_; }
  void set_condition_bound(double bound) { cond_bound_ = bound; }

 private:
  ProcessModel proc_;
  MeasurementModel meas_;
  GaussianState state_;
  FlopCounter flops_;
  double cond_bound_ = kDefaultConditionBound;
};

/// Buffered re-filtering baseline: keeps timestamped measurements in a
/// bounded buffer and, on each arrival, re-runs a standard EKF from an
/// anchor estimate to the present with every buffered measurement placed at
/// its origin tick. The anchor absorbs the oldest buffered ticks when the
/// buffer overflows (oldest-first eviction), so the estimate always equals
/// a straight EKF pass over the retained window.
class RefilterEstimator {
 public:
  RefilterEstimator(ProcessModel proc, MeasurementModel meas,
                    GaussianState init,
                    std::size_t buffer_capacity = kDefaultHistoryCapacity);

  void predict(const Vec& u_eff);
  FuseOutcome fuse(const MeasurementPacket& pkt);

  const GaussianState& state() const { return current_; }
  long tick() const { return current_.tick; }
  long anchor_tick() const { return anchor_.tick; }
  std::size_t buffered() const { return buffer_.size(); }
  long stale_discards() const { return stale_discards_; }
  FlopCounter& flops() { return flops_; }
  const FlopCounter& flops() const { return flops_; }
  void set_condition_bound(double bound) { cond_bound_ = bound; }

 private:
  struct BufferEntry {
    long origin_tick;
    Vec value;
  };

  GaussianState ekf_step_fuse(const GaussianState& priori, const Vec& z);
  void advance_anchor_one_tick();
  void rerun_from_anchor();

  ProcessModel proc_;
  MeasurementModel meas_;
  GaussianState anchor_;   // posteriori with all evicted measurements baked in
  GaussianState current_;  // posteriori at the present tick
  std::deque<Vec> inputs_;  // u_eff for ticks anchor .. current-1, in order
  std::vector<BufferEntry> buffer_;  // sorted by origin tick, insert-stable
  std::size_t capacity_;
  long stale_discards_ = 0;
  FlopCounter flops_;
  double cond_bound_ = kDefaultConditionBound;
};

/// Exact-optimality oracle for linear systems: the state is augmented with
/// the last `max_delay` states so a measurement delayed by m ticks becomes a
/// current measurement of the m-th augmented block. Only valid for linear
/// models; used as the lower bound in ordering experiments.
class AugmentedKf {
 public:
  AugmentedKf(LinearSystem sys, GaussianState init, long max_delay);

  void predict(const Vec& u_eff);
  FuseOutcome fuse(const MeasurementPacket& pkt);

  /// Marginal estimate of the present state (top block).
  GaussianState state() const;
  const GaussianState& full_state() const { return state_; }
  long tick() const { return state_.tick; }
  long max_delay() const { return max_delay_; }
  long stale_discards() const { return 0; }
  FlopCounter& flops() { return flops_; }
  const FlopCounter& flops() const { return flops_; }

 private:
  LinearSystem base_;
  LinearSystem aug_;  // stacked system matrices
  GaussianState state_;
  long max_delay_;
  long base_dim_;
  FlopCounter flops_;
  double cond_bound_ = kDefaultConditionBound;
};

}  // namespace netkf
