#pragma once

#include "netkf/linear_filter.hpp"
#include "netkf/models.hpp"

namespace netkf {

/// EKF-style time update: mean = f(x, u_eff, 0),
/// cov = A P A^T + W Q W^T with A, W evaluated at (x, u_eff, 0).
/// a_out receives the evaluated transition so callers can finalize the
/// step history entry for the tick being left.
GaussianState poekf_predict(const GaussianState& prev, const Vec& u_eff,
                            const ProcessModel& model, Mat* a_out = nullptr,
                            FlopCounter* flops = nullptr);

/// Builds the innovation inputs for an EKF-style update, linearizing the
/// measurement model at x_ref: residual = z - h(x_ref, 0) (through the
/// model's residual hook), H = dh/dx(x_ref), R_eff = V R V^T.
DelayedObservation ekf_observation(const MeasurementModel& model,
                                   const GaussianState& ref, const Vec& z,
                                   FlopCounter* flops = nullptr);

/// Delayed EKF data update. All delay-indexed quantities (residual, H, V)
/// are evaluated at the stored priori of the packet's origin tick; the
/// relevance factor uses the transitions recorded at prediction time.
GaussianState poekf_update(const GaussianState& priori_k,
                           const MeasurementPacket& pkt, StepHistory& history,
                           const MeasurementModel& model,
                           FuseOutcome* outcome_out = nullptr,
                           double cond_bound = kDefaultConditionBound,
                           FlopCounter* flops = nullptr);

/// Past-observation extended Kalman filter: the delayed-measurement filter
/// applied to a nonlinear system through linearization at stored estimates.
class Poekf {
 public:
  Poekf(ProcessModel proc, MeasurementModel meas, GaussianState init,
        std::size_t history_capacity = kDefaultHistoryCapacity);

  void predict(const Vec& u_eff);
  FuseOutcome fuse(const MeasurementPacket& pkt);

  const GaussianState& state() const { return state_; }
  const StepHistory& history() const { return history_; }
  long tick() const { return state_.tick; }
  long stale_discards() const { return stale_discards_; }
  FlopCounter& flops() { return flops_; }
  const FlopCounter& flops() const { return flops_; }
  void set_condition_bound(double bound) { cond_bound_ = bound; }

 private:
  ProcessModel proc_;
  MeasurementModel meas_;
  GaussianState state_;
  StepHistory history_;
  FlopCounter flops_;
  long stale_discards_ = 0;
  double cond_bound_ = kDefaultConditionBound;
};

}  // namespace netkf
