#pragma once

#include <cstddef>
#include <deque>

#include "netkf/common.hpp"

namespace netkf {

/// State estimate (mean, covariance) at a discrete tick.
struct GaussianState {
  Vec mean;
  Mat cov;
  long tick = 0;
};

/// One measurement as seen by the receiving side of the sensor channel.
/// origin_tick is when the sample was taken, arrival_tick when it reached
/// the estimator; `arrived` is the packet-arrival indicator (false means
/// the slot carried no data and the update must be a no-op).
struct MeasurementPacket {
  Vec value;
  long origin_tick = 0;
  long arrival_tick = 0;
  bool arrived = true;
};

/// One control input as applied at the actuator. applied_tick is the tick
/// whose state transition consumed the input (origin + delay + 1); a
/// non-arrived entry means the plant ran with zero input that step.
struct InputPacket {
  Vec value;
  long origin_tick = 0;
  long applied_tick = 0;
  bool arrived = true;
};

/// Per-tick filter bookkeeping consumed by the relevance-factor product and
/// by delayed updates: the transition used to leave this tick, the gain and
/// measurement matrix applied at this tick, and the priori estimate.
struct StepRecord {
  long tick = 0;
  Mat a_mat;            // state transition from this tick to the next
  Mat gain;             // gain applied at this tick; zero if nothing was fused
  Mat h_mat;            // measurement matrix used at this tick; identity placeholder if none
  GaussianState priori;
};

/// Default record/buffer depth shared by the step history, the
/// re-filtering baseline's measurement buffer, and scenario configs.
inline constexpr std::size_t kDefaultHistoryCapacity = 50;

/// Bounded, gap-free record buffer ordered by tick. The oldest record is
/// evicted once the capacity is exceeded; evictions are counted so callers
/// can report how much history was dropped.
class StepHistory {
 public:
  explicit StepHistory(std::size_t capacity = kDefaultHistoryCapacity);

  /// Appends a record; rec.tick must be exactly latest_tick() + 1 (any tick
  /// is accepted when empty). Evicts the oldest record beyond capacity.
  void push(StepRecord rec);

  /// Finalizes the transition matrix of an existing record.
  void set_transition(long tick, const Mat& a_mat);

  /// Stores the gain/measurement matrix actually applied at `tick`.
  /// Repeated calls overwrite: only the last applied gain is kept.
  void note_fusion(long tick, const Mat& gain, const Mat& h_mat);

  bool empty() const { return records_.empty(); }
  std::size_t depth() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  long evictions() const { return evictions_; }

  bool contains(long tick) const;
  const StepRecord& at(long tick) const;  // throws std::out_of_range
  long earliest_tick() const;
  long latest_tick() const;

 private:
  StepRecord& mutable_at(long tick);

  std::deque<StepRecord> records_;
  std::size_t capacity_;
  long evictions_ = 0;
};

}  // namespace netkf
