#pragma once

#include "netkf/common.hpp"
#include "netkf/errors.hpp"
#include "netkf/flops.hpp"
#include "netkf/state.hpp"

namespace netkf {

inline constexpr double kDefaultConditionBound = 1e12;

/// Time-invariant linear system x' = Ax + Bu + w, z = Hx + v,
/// w ~ N(0, Q), v ~ N(0, R).
struct LinearSystem {
  Mat a;
  Mat b;
  Mat h;
  Mat q;
  Mat r;
};

enum class FuseOutcome {
  fused,            // measurement incorporated
  ignored_lost,     // lost packet, posteriori = priori by convention
  discarded_stale,  // origin older than the retained history window
};

/// Time update: mean = A x + B u_eff, cov = A P A^T + Q, tick + 1.
/// u_eff is the acknowledged input (zero when the command was lost).
GaussianState predict_linear(const GaussianState& prev, const Mat& a_mat,
                             const Mat& b_mat, const Vec& u_eff,
                             const Mat& q_mat, FlopCounter* flops = nullptr);

/// Relevance factor F = prod_{j=1..m} A_{k-j} (I - K_{k-j} H_{k-j}), the
/// ordered product over the ticks between a delayed measurement's origin and
/// its arrival (j = 1 is the leftmost factor). Ticks without a fused
/// measurement carry K = 0 and contribute their transition alone. m = 0
/// yields the identity. Throws StaleMeasurementError when the history no
/// longer covers the origin tick.
Mat relevance_factor(const StepHistory& history, long delay_m,
                     FlopCounter* flops = nullptr);

/// Inverts an innovation covariance, guarding against ill-conditioning:
/// one-norm condition estimate above cond_bound raises NumericalError with
/// the given tick in the message.
Mat invert_innovation(const Mat& s_mat, long tick,
                      double cond_bound = kDefaultConditionBound,
                      FlopCounter* flops = nullptr);

/// Standard Kalman gain K* = P H^T [H P H^T + R]^-1 at the given priori.
Mat standard_gain(const GaussianState& priori, const Mat& h_mat,
                  const Mat& r_mat,
                  double cond_bound = kDefaultConditionBound,
                  FlopCounter* flops = nullptr);

/// Delayed-measurement gain K = F K*_i where K*_i is the standard gain at
/// the origin tick i.
Mat delayed_gain(const Mat& f_mat, const GaussianState& priori_i,
                 const Mat& h_i, const Mat& r_i,
                 double cond_bound = kDefaultConditionBound,
                 FlopCounter* flops = nullptr);

/// Textbook data update at the current tick: K = P H^T S^-1,
/// mean += K residual, cov = P - K H P, symmetrized. Shared by the
/// zero-delay fast path, the naive filter, and the re-filtering baseline so
/// their arithmetic (and flop accounting) is identical.
GaussianState standard_update(const GaussianState& priori, const Vec& residual,
                              const Mat& h_mat, const Mat& r_eff,
                              Mat* gain_out = nullptr,
                              double cond_bound = kDefaultConditionBound,
                              FlopCounter* flops = nullptr);

/// Innovation inputs evaluated at the origin-tick priori. The caller builds
/// these (linearly or via a nonlinear measurement model) so the delayed
/// update below stays model-agnostic.
struct DelayedObservation {
  long origin_tick = 0;
  Vec residual;  // z minus the predicted measurement at the origin priori
  Mat h_tilde;   // measurement matrix/Jacobian at the origin priori
  Mat r_eff;     // effective measurement noise covariance at the origin
};

/// Delayed data update: K = F K*_i, mean = x_k^- + K residual,
/// cov = P_k^- - K H_i P_i^- F^T, symmetrized. With zero delay this is
/// exactly standard_update. Throws StaleMeasurementError if the origin has
/// been evicted and std::logic_error if history and priori_k disagree on
/// the current tick.
GaussianState apply_delayed_update(const GaussianState& priori_k,
                                   const StepHistory& history,
                                   const DelayedObservation& obs,
                                   Mat* gain_out = nullptr,
                                   double cond_bound = kDefaultConditionBound,
                                   FlopCounter* flops = nullptr);

/// Full delayed update for a linear measurement z = Hx + v. Lost packets
/// (arrived = 0) are exact no-ops; stale packets are discarded and counted
/// through outcome_out; fused packets overwrite the gain recorded for the
/// current tick. Returns the posteriori state.
GaussianState update_delayed(const GaussianState& priori_k,
                             const MeasurementPacket& pkt,
                             StepHistory& history, const Mat& h_mat,
                             const Mat& r_mat,
                             FuseOutcome* outcome_out = nullptr,
                             double cond_bound = kDefaultConditionBound,
                             FlopCounter* flops = nullptr);

/// The optimal linear filter for delayed, lossy measurements. Keeps the
/// per-tick step history needed to form the relevance factor.
class DelayedKalmanFilter {
 public:
  DelayedKalmanFilter(LinearSystem sys, GaussianState init,
                      std::size_t history_capacity = kDefaultHistoryCapacity);

  void predict(const Vec& u_eff);
  FuseOutcome fuse(const MeasurementPacket& pkt);

  const GaussianState& state() const { return state_; }
  const StepHistory& history() const { return history_; }
  const LinearSystem& system() const { return sys_; }
  long tick() const { return state_.tick; }
  long stale_discards() const { return stale_discards_; }
  FlopCounter& flops() { return flops_; }
  const FlopCounter& flops() const { return flops_; }
  void set_condition_bound(double bound) { cond_bound_ = bound; }

 private:
  LinearSystem sys_;
  GaussianState state_;
  StepHistory history_;
  FlopCounter flops_;
  long stale_discards_ = 0;
  double cond_bound_ = kDefaultConditionBound;
};

}  // namespace netkf
