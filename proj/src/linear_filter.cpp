#include "netkf/linear_filter.hpp"

#include <sstream>
#include <utility>

namespace netkf {

namespace {

void check_dims(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

GaussianState predict_linear(const GaussianState& prev, const Mat& a_mat,
                             const Mat& b_mat, const Vec& u_eff,
                             const Mat& q_mat, FlopCounter* flops) {
  const long n = prev.mean.size();
  check_dims(a_mat.rows() == n && a_mat.cols() == n,
             "predict_linear: A must be n-by-n");
  check_dims(b_mat.rows() == n && b_mat.cols() == u_eff.size(),
             "predict_linear: B/u dimensions do not conform");
  check_dims(prev.cov.rows() == n && prev.cov.cols() == n,
             "predict_linear: covariance must be n-by-n");
  require_psd(q_mat, "predict_linear: Q");

  GaussianState next;
  next.mean = a_mat * prev.mean + b_mat * u_eff;
  next.cov = symmetrize(a_mat * prev.cov * a_mat.transpose() + q_mat);
  next.tick = prev.tick + 1;
  if (flops) {
    const long m = u_eff.size();
    flops->gemm(n, n, 1);          // A x
    flops->gemm(n, m, 1);          // B u
    flops->elementwise(n, 1);      // sum
    flops->gemm(n, n, n);          // A P
    flops->gemm(n, n, n);          // (A P) A^T
    flops->elementwise(n, n);      // + Q
    flops->elementwise(n, n);      // symmetrize
  }
  return next;
}

Mat relevance_factor(const StepHistory& history, long delay_m,
                     FlopCounter* flops) {
  if (history.empty()) {
    throw std::logic_error("relevance_factor: empty history");
  }
  if (delay_m < 0) {
    throw std::invalid_argument("relevance_factor: negative delay");
  }
  const long now = history.latest_tick();
  const long n = history.at(now).priori.mean.size();
  if (delay_m == 0) {
    return Mat::Identity(n, n);
  }
  if (now - delay_m < history.earliest_tick()) {
    std::ostringstream msg;
    msg << "relevance_factor: delay " << delay_m << " reaches back to tick "
        << now - delay_m << " but history starts at tick "
        << history.earliest_tick();
    throw StaleMeasurementError(msg.str());
  }

  Mat f_mat;
  for (long j = 1; j <= delay_m; ++j) {
    const StepRecord& rec = history.at(now - j);
    const long z = rec.gain.cols();
    Mat factor = rec.a_mat * (Mat::Identity(n, n) - rec.gain * rec.h_mat);
    if (flops) {
      flops->gemm(n, z, n);      // K H
      flops->elementwise(n, n);  // I - K H
      flops->gemm(n, n, n);      // A (I - K H)
    }
    if (j == 1) {
      f_mat = std::move(factor);
    } else {
      f_mat = f_mat * factor;
      if (flops) flops->gemm(n, n, n);
    }
  }
  return f_mat;
}

Mat invert_innovation(const Mat& s_mat, long tick, double cond_bound,
                      FlopCounter* flops) {
  const long z = s_mat.rows();
  check_dims(s_mat.cols() == z, "invert_innovation: S must be square");
  Mat s_inv = s_mat.inverse();
  if (flops) flops->inverse(z);
  const double cond = one_norm(s_mat) * one_norm(s_inv);
  if (!std::isfinite(cond) || cond > cond_bound) {
    std::ostringstream msg;
    msg << "innovation covariance ill-conditioned at tick " << tick
        << " (condition estimate " << cond << ", bound " << cond_bound << ")";
    throw NumericalError(msg.str());
  }
  return s_inv;
}

Mat standard_gain(const GaussianState& priori, const Mat& h_mat,
                  const Mat& r_mat, double cond_bound, FlopCounter* flops) {
  const long n = priori.cov.rows();
  const long z = h_mat.rows();
  check_dims(h_mat.cols() == n, "standard_gain: H/P dimensions do not conform");
  check_dims(r_mat.rows() == z && r_mat.cols() == z,
             "standard_gain: R must be z-by-z");
  const Mat pht = priori.cov * h_mat.transpose();
  const Mat s_mat = h_mat * pht + r_mat;
  if (flops) {
    flops->gemm(n, n, z);
    flops->gemm(z, n, z);
    flops->elementwise(z, z);
  }
  const Mat s_inv = invert_innovation(s_mat, priori.tick, cond_bound, flops);
  if (flops) flops->gemm(n, z, z);
  return pht * s_inv;
}

Mat delayed_gain(const Mat& f_mat, const GaussianState& priori_i,
                 const Mat& h_i, const Mat& r_i, double cond_bound,
                 FlopCounter* flops) {
  const long n = priori_i.cov.rows();
  check_dims(f_mat.rows() == n && f_mat.cols() == n,
             "delayed_gain: F must be n-by-n");
  const Mat k_star = standard_gain(priori_i, h_i, r_i, cond_bound, flops);
  if (flops) flops->gemm(n, n, k_star.cols());
  return f_mat * k_star;
}

GaussianState standard_update(const GaussianState& priori, const Vec& residual,
                              const Mat& h_mat, const Mat& r_eff,
                              Mat* gain_out, double cond_bound,
                              FlopCounter* flops) {
  const long n = priori.cov.rows();
  const long z = h_mat.rows();
  check_dims(residual.size() == z, "standard_update: residual/H mismatch");

  const Mat pht = priori.cov * h_mat.transpose();
  const Mat s_mat = h_mat * pht + r_eff;
  if (flops) {
    flops->gemm(n, n, z);
    flops->gemm(z, n, z);
    flops->elementwise(z, z);
  }
  const Mat s_inv = invert_innovation(s_mat, priori.tick, cond_bound, flops);
  const Mat gain = pht * s_inv;
  if (flops) flops->gemm(n, z, z);

  GaussianState post;
  post.tick = priori.tick;
  post.mean = priori.mean + gain * residual;
  // P symmetric, so H P = (P H^T)^T; reuse pht instead of a second product.
  post.cov = project_psd(symmetrize(priori.cov - gain * pht.transpose()));
  if (flops) {
    flops->gemm(n, z, 1);
    flops->elementwise(n, 1);
    flops->gemm(n, z, n);
    flops->elementwise(n, n);  // subtraction
    flops->elementwise(n, n);  // symmetrize
  }
  if (gain_out) *gain_out = gain;
  return post;
}

GaussianState apply_delayed_update(const GaussianState& priori_k,
                                   const StepHistory& history,
                                   const DelayedObservation& obs,
                                   Mat* gain_out, double cond_bound,
                                   FlopCounter* flops) {
  if (history.empty() || history.latest_tick() != priori_k.tick) {
    throw std::logic_error(
        "apply_delayed_update: history is not aligned with the current tick");
  }
  const long delay_m = priori_k.tick - obs.origin_tick;
  if (delay_m < 0) {
    throw std::invalid_argument(
        "apply_delayed_update: origin tick lies in the future");
  }
  if (delay_m == 0) {
    // F is the identity here, so the update is the textbook one; skipping
    // the product keeps the zero-delay cost equal to a standard filter's.
    return standard_update(priori_k, obs.residual, obs.h_tilde, obs.r_eff,
                           gain_out, cond_bound, flops);
  }
  if (!history.contains(obs.origin_tick)) {
    std::ostringstream msg;
    msg << "apply_delayed_update: origin tick " << obs.origin_tick
        << " predates retained history (earliest " << history.earliest_tick()
        << ")";
    throw StaleMeasurementError(msg.str());
  }

  const GaussianState& priori_i = history.at(obs.origin_tick).priori;
  const long n = priori_k.cov.rows();
  const long z = obs.h_tilde.rows();

  const Mat pht = priori_i.cov * obs.h_tilde.transpose();
  const Mat s_mat = obs.h_tilde * pht + obs.r_eff;
  if (flops) {
    flops->gemm(n, n, z);
    flops->gemm(z, n, z);
    flops->elementwise(z, z);
  }
  const Mat s_inv = invert_innovation(s_mat, priori_k.tick, cond_bound, flops);
  const Mat k_star = pht * s_inv;
  if (flops) flops->gemm(n, z, z);

  const Mat f_mat = relevance_factor(history, delay_m, flops);
  const Mat gain = f_mat * k_star;
  if (flops) flops->gemm(n, n, z);

  GaussianState post;
  post.tick = priori_k.tick;
  post.mean = priori_k.mean + gain * obs.residual;
  // H_i P_i^- = pht^T (P_i symmetric), so the correction term is
  // K (pht^T F^T).
  const Mat hpf = pht.transpose() * f_mat.transpose();
  post.cov = project_psd(symmetrize(priori_k.cov - gain * hpf));
  if (flops) {
    flops->gemm(n, z, 1);
    flops->elementwise(n, 1);
    flops->gemm(z, n, n);      // pht^T F^T
    flops->gemm(n, z, n);      // K (...)
    flops->elementwise(n, n);  // subtraction
    flops->elementwise(n, n);  // symmetrize
  }
  if (gain_out) *gain_out = gain;
  return post;
}

GaussianState update_delayed(const GaussianState& priori_k,
                             const MeasurementPacket& pkt,
                             StepHistory& history, const Mat& h_mat,
                             const Mat& r_mat, FuseOutcome* outcome_out,
                             double cond_bound, FlopCounter* flops) {
  if (pkt.arrival_tick != priori_k.tick) {
    std::ostringstream msg;
    msg << "update_delayed: packet arrival tick " << pkt.arrival_tick
        << " does not match the current tick " << priori_k.tick;
    throw std::logic_error(msg.str());
  }
  if (pkt.origin_tick > pkt.arrival_tick) {
    throw std::invalid_argument("update_delayed: negative packet delay");
  }
  if (!pkt.arrived) {
    // A lost packet carries no information: posteriori = priori exactly.
    if (outcome_out) *outcome_out = FuseOutcome::ignored_lost;
    return priori_k;
  }
  if (!history.contains(pkt.origin_tick)) {
    if (outcome_out) *outcome_out = FuseOutcome::discarded_stale;
    return priori_k;
  }

  DelayedObservation obs;
  obs.origin_tick = pkt.origin_tick;
  const Vec zhat = h_mat * history.at(pkt.origin_tick).priori.mean;
  obs.residual = pkt.value - zhat;
  if (flops) {
    flops->gemm(h_mat.rows(), h_mat.cols(), 1);
    flops->elementwise(h_mat.rows(), 1);
  }
  obs.h_tilde = h_mat;
  obs.r_eff = r_mat;

  Mat gain;
  GaussianState post =
      apply_delayed_update(priori_k, history, obs, &gain, cond_bound, flops);
  history.note_fusion(priori_k.tick, gain, h_mat);
  if (outcome_out) *outcome_out = FuseOutcome::fused;
  return post;
}

DelayedKalmanFilter::DelayedKalmanFilter(LinearSystem sys, GaussianState init,
                                         std::size_t history_capacity)
    : sys_(std::move(sys)), state_(std::move(init)), history_(history_capacity) {
  const long n = state_.mean.size();
  check_dims(sys_.a.rows() == n && sys_.a.cols() == n,
             "DelayedKalmanFilter: A must match the state dimension");
  check_dims(sys_.b.rows() == n, "DelayedKalmanFilter: B row count mismatch");
  check_dims(sys_.h.cols() == n, "DelayedKalmanFilter: H column count mismatch");
  const long z = sys_.h.rows();
  check_dims(sys_.r.rows() == z && sys_.r.cols() == z,
             "DelayedKalmanFilter: R must match the measurement dimension");
  require_psd(sys_.q, "DelayedKalmanFilter: Q");
  require_psd(state_.cov, "DelayedKalmanFilter: initial covariance");

  StepRecord rec;
  rec.tick = state_.tick;
  rec.a_mat = Mat::Identity(n, n);
  rec.gain = Mat::Zero(n, z);
  rec.h_mat = Mat::Identity(z, n);
  rec.priori = state_;
  history_.push(std::move(rec));
}

void DelayedKalmanFilter::predict(const Vec& u_eff) {
  history_.set_transition(state_.tick, sys_.a);
  state_ = predict_linear(state_, sys_.a, sys_.b, u_eff, sys_.q, &flops_);

  const long n = state_.mean.size();
  const long z = sys_.h.rows();
  StepRecord rec;
  rec.tick = state_.tick;
  rec.a_mat = Mat::Identity(n, n);
  rec.gain = Mat::Zero(n, z);
  rec.h_mat = Mat::Identity(z, n);
  rec.priori = state_;
  history_.push(std::move(rec));
}

FuseOutcome DelayedKalmanFilter::fuse(const MeasurementPacket& pkt) {
  FuseOutcome outcome = FuseOutcome::fused;
  state_ = update_delayed(state_, pkt, history_, sys_.h, sys_.r, &outcome,
                          cond_bound_, &flops_);
  if (outcome == FuseOutcome::discarded_stale) ++stale_discards_;
  return outcome;
}

}  // namespace netkf
