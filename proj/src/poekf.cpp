#include "netkf/poekf.hpp"

#include <sstream>
#include <utility>

namespace netkf {

GaussianState poekf_predict(const GaussianState& prev, const Vec& u_eff,
                            const ProcessModel& model, Mat* a_out,
                            FlopCounter* flops) {
  const long n = prev.mean.size();
  if (model.state_dim != n) {
    throw std::invalid_argument("poekf_predict: state dimension mismatch");
  }
  if (model.input_dim != u_eff.size()) {
    throw std::invalid_argument("poekf_predict: input dimension mismatch");
  }

  const Mat a_mat = model.jac_state(prev.mean, u_eff);
  const Mat w_mat = model.jac_noise(prev.mean, u_eff);
  const Mat q_mat = model.noise_cov(u_eff);
  const long q = w_mat.cols();

  GaussianState next;
  next.mean = model.f(prev.mean, u_eff, Vec::Zero(model.noise_dim));
  next.cov = symmetrize(a_mat * prev.cov * a_mat.transpose() +
                        w_mat * q_mat * w_mat.transpose());
  next.tick = prev.tick + 1;
  if (flops) {
    flops->gemm(n, n, n);      // A P
    flops->gemm(n, n, n);      // (A P) A^T
    flops->gemm(n, q, q);      // W Q
    flops->gemm(n, q, n);      // (W Q) W^T
    flops->elementwise(n, n);  // sum of the two terms
    flops->elementwise(n, n);  // symmetrize
  }
  if (a_out) *a_out = a_mat;
  return next;
}

DelayedObservation ekf_observation(const MeasurementModel& model,
                                   const GaussianState& ref, const Vec& z,
                                   FlopCounter* flops) {
  DelayedObservation obs;
  obs.origin_tick = ref.tick;
  const Vec zhat = model.h(ref.mean, Vec::Zero(model.noise_dim));
  obs.residual = measurement_residual(model, z, zhat);
  obs.h_tilde = model.jac_state(ref.mean);
  const Mat v_mat = model.jac_noise(ref.mean);
  obs.r_eff = v_mat * model.noise_cov * v_mat.transpose();
  if (flops) {
    const long z_dim = obs.h_tilde.rows();
    const long r_dim = v_mat.cols();
    flops->elementwise(z_dim, 1);    // z - zhat
    flops->gemm(z_dim, r_dim, r_dim);  // V R
    flops->gemm(z_dim, r_dim, z_dim);  // (V R) V^T
  }
  return obs;
}

GaussianState poekf_update(const GaussianState& priori_k,
                           const MeasurementPacket& pkt, StepHistory& history,
                           const MeasurementModel& model,
                           FuseOutcome* outcome_out, double cond_bound,
                           FlopCounter* flops) {
  if (pkt.arrival_tick != priori_k.tick) {
    std::ostringstream msg;
    msg << "poekf_update: packet arrival tick " << pkt.arrival_tick
        << " does not match the current tick " << priori_k.tick;
    throw std::logic_error(msg.str());
  }
  if (pkt.origin_tick > pkt.arrival_tick) {
    throw std::invalid_argument("poekf_update: negative packet delay");
  }
  if (!pkt.arrived) {
    if (outcome_out) *outcome_out = FuseOutcome::ignored_lost;
    return priori_k;
  }
  if (!history.contains(pkt.origin_tick)) {
    if (outcome_out) *outcome_out = FuseOutcome::discarded_stale;
    return priori_k;
  }

  const DelayedObservation obs = ekf_observation(
      model, history.at(pkt.origin_tick).priori, pkt.value, flops);
  Mat gain;
  GaussianState post =
      apply_delayed_update(priori_k, history, obs, &gain, cond_bound, flops);
  history.note_fusion(priori_k.tick, gain, obs.h_tilde);
  if (outcome_out) *outcome_out = FuseOutcome::fused;
  return post;
}

Poekf::Poekf(ProcessModel proc, MeasurementModel meas, GaussianState init,
             std::size_t history_capacity)
    : proc_(std::move(proc)),
      meas_(std::move(meas)),
      state_(std::move(init)),
      history_(history_capacity) {
  if (proc_.state_dim != state_.mean.size()) {
    throw std::invalid_argument("Poekf: state dimension mismatch");
  }
  require_psd(state_.cov, "Poekf: initial covariance");
  require_psd(meas_.noise_cov, "Poekf: measurement noise covariance");

  const long n = proc_.state_dim;
  const long z = meas_.meas_dim;
  StepRecord rec;
  rec.tick = state_.tick;
  rec.a_mat = Mat::Identity(n, n);
  rec.gain = Mat::Zero(n, z);
  rec.h_mat = Mat::Identity(z, n);
  rec.priori = state_;
  history_.push(std::move(rec));
}

void Poekf::predict(const Vec& u_eff) {
  Mat a_mat;
  GaussianState next = poekf_predict(state_, u_eff, proc_, &a_mat, &flops_);
  history_.set_transition(state_.tick, a_mat);
  state_ = std::move(next);

  const long n = proc_.state_dim;
  const long z = meas_.meas_dim;
  StepRecord rec;
  rec.tick = state_.tick;
  rec.a_mat = Mat::Identity(n, n);
  rec.gain = Mat::Zero(n, z);
  rec.h_mat = Mat::Identity(z, n);
  rec.priori = state_;
  history_.push(std::move(rec));
}

FuseOutcome Poekf::fuse(const MeasurementPacket& pkt) {
  FuseOutcome outcome = FuseOutcome::fused;
  state_ = poekf_update(state_, pkt, history_, meas_, &outcome, cond_bound_,
                        &flops_);
  if (outcome == FuseOutcome::discarded_stale) ++stale_discards_;
  return outcome;
}

}  // namespace netkf
