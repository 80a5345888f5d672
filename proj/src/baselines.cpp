#include "netkf/baselines.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

namespace netkf {

NaiveEkf::NaiveEkf(ProcessModel proc, MeasurementModel meas,
                   GaussianState init)
    : proc_(std::move(proc)), meas_(std::move(meas)), state_(std::move(init)) {
  if (proc_.state_dim != state_.mean.size()) {
    throw std::invalid_argument("NaiveEkf: state dimension mismatch");
  }
  require_psd(state_.cov, "NaiveEkf: initial covariance");
}

void NaiveEkf::predict(const Vec& u_eff) {
  state_ = poekf_predict(state_, u_eff, proc_, nullptr, &flops_);
}

FuseOutcome NaiveEkf::fuse(const MeasurementPacket& pkt) {
  if (pkt.arrival_tick != state_.tick) {
    std::ostringstream msg;
    msg << "NaiveEkf: packet arrival tick " << pkt.arrival_tick
        << " does not match the current tick " << state_.tick;
    throw std::logic_error(msg.str());
  }
  if (!pkt.arrived) return FuseOutcome::ignored_lost;
  // The delay is deliberately ignored: the innovation is formed at the
  // current estimate as if the measurement were fresh.
  const DelayedObservation obs =
      ekf_observation(meas_, state_, pkt.value, &flops_);
  state_ = standard_update(state_, obs.residual, obs.h_tilde, obs.r_eff,
                           nullptr, cond_bound_, &flops_);
  return FuseOutcome::fused;
}

RefilterEstimator::RefilterEstimator(ProcessModel proc, MeasurementModel meas,
                                     GaussianState init,
                                     std::size_t buffer_capacity)
    : proc_(std::move(proc)),
      meas_(std::move(meas)),
      anchor_(init),
      current_(std::move(init)),
      capacity_(buffer_capacity) {
  if (capacity_ == 0) {
    throw std::invalid_argument("RefilterEstimator: capacity must be positive");
  }
  if (proc_.state_dim != current_.mean.size()) {
    throw std::invalid_argument("RefilterEstimator: state dimension mismatch");
  }
  require_psd(current_.cov, "RefilterEstimator: initial covariance");
}

GaussianState RefilterEstimator::ekf_step_fuse(const GaussianState& priori,
                                               const Vec& z) {
  const DelayedObservation obs = ekf_observation(meas_, priori, z, &flops_);
  return standard_update(priori, obs.residual, obs.h_tilde, obs.r_eff, nullptr,
                         cond_bound_, &flops_);
}

void RefilterEstimator::advance_anchor_one_tick() {
  anchor_ = poekf_predict(anchor_, inputs_.front(), proc_, nullptr, &flops_);
  inputs_.pop_front();
  auto it = buffer_.begin();
  while (it != buffer_.end() && it->origin_tick == anchor_.tick) {
    anchor_ = ekf_step_fuse(anchor_, it->value);
    it = buffer_.erase(it);
  }
}

void RefilterEstimator::rerun_from_anchor() {
  GaussianState s = anchor_;
  auto next_meas = buffer_.begin();
  for (std::size_t step = 0; step < inputs_.size(); ++step) {
    s = poekf_predict(s, inputs_[step], proc_, nullptr, &flops_);
    while (next_meas != buffer_.end() && next_meas->origin_tick == s.tick) {
      s = ekf_step_fuse(s, next_meas->value);
      ++next_meas;
    }
  }
  current_ = std::move(s);
}

void RefilterEstimator::predict(const Vec& u_eff) {
  inputs_.push_back(u_eff);
  current_ = poekf_predict(current_, u_eff, proc_, nullptr, &flops_);
}

FuseOutcome RefilterEstimator::fuse(const MeasurementPacket& pkt) {
  if (pkt.arrival_tick != current_.tick) {
    std::ostringstream msg;
    msg << "RefilterEstimator: packet arrival tick " << pkt.arrival_tick
        << " does not match the current tick " << current_.tick;
    throw std::logic_error(msg.str());
  }
  if (pkt.origin_tick > pkt.arrival_tick) {
    throw std::invalid_argument("RefilterEstimator: negative packet delay");
  }
  if (!pkt.arrived) return FuseOutcome::ignored_lost;

  const long now = current_.tick;
  if (pkt.origin_tick <= anchor_.tick ||
      now - pkt.origin_tick > static_cast<long>(capacity_)) {
    ++stale_discards_;
    return FuseOutcome::discarded_stale;
  }

  // Insert after any entries with the same origin so equal-origin
  // measurements keep their arrival order in every re-run.
  auto pos = std::upper_bound(
      buffer_.begin(), buffer_.end(), pkt.origin_tick,
      [](long origin, const BufferEntry& e) { return origin < e.origin_tick; });
  const bool zero_delay = pkt.origin_tick == now;
  buffer_.insert(pos, BufferEntry{pkt.origin_tick, pkt.value});

  bool anchor_moved = false;
  while (buffer_.size() > capacity_) {
    advance_anchor_one_tick();
    anchor_moved = true;
  }

  if (zero_delay && !anchor_moved) {
    // A fresh measurement extends the existing pass by one textbook fuse;
    // identical to the full re-run because the prefix is unchanged.
    current_ = ekf_step_fuse(current_, pkt.value);
  } else {
    rerun_from_anchor();
  }
  return FuseOutcome::fused;
}

namespace {

LinearSystem build_augmented(const LinearSystem& base, long max_delay) {
  const long n = base.a.rows();
  const long blocks = max_delay + 1;
  const long big = blocks * n;

  LinearSystem aug;
  aug.a = Mat::Zero(big, big);
  aug.a.topLeftCorner(n, n) = base.a;
  for (long i = 1; i < blocks; ++i) {
    aug.a.block(i * n, (i - 1) * n, n, n) = Mat::Identity(n, n);
  }
  aug.b = Mat::Zero(big, base.b.cols());
  aug.b.topRows(n) = base.b;
  aug.q = Mat::Zero(big, big);
  aug.q.topLeftCorner(n, n) = base.q;
  aug.h = Mat();  // built per measurement, depends on the delay
  aug.r = base.r;
  return aug;
}

}  // namespace

AugmentedKf::AugmentedKf(LinearSystem sys, GaussianState init, long max_delay)
    : base_(std::move(sys)), max_delay_(max_delay) {
  if (max_delay_ < 0) {
    throw std::invalid_argument("AugmentedKf: max_delay must be nonnegative");
  }
  base_dim_ = base_.a.rows();
  if (init.mean.size() != base_dim_) {
    throw std::invalid_argument("AugmentedKf: init dimension mismatch");
  }
  require_psd(init.cov, "AugmentedKf: initial covariance");
  aug_ = build_augmented(base_, max_delay_);

  // Every stacked block starts as a copy of the same initial state, so all
  // block covariances (including cross terms) equal the initial covariance.
  const long blocks = max_delay_ + 1;
  state_.mean = init.mean.replicate(blocks, 1);
  state_.cov = Mat::Zero(blocks * base_dim_, blocks * base_dim_);
  for (long i = 0; i < blocks; ++i) {
    for (long j = 0; j < blocks; ++j) {
      state_.cov.block(i * base_dim_, j * base_dim_, base_dim_, base_dim_) =
          init.cov;
    }
  }
  state_.tick = init.tick;
}

void AugmentedKf::predict(const Vec& u_eff) {
  state_ = predict_linear(state_, aug_.a, aug_.b, u_eff, aug_.q, &flops_);
}

FuseOutcome AugmentedKf::fuse(const MeasurementPacket& pkt) {
  if (pkt.arrival_tick != state_.tick) {
    std::ostringstream msg;
    msg << "AugmentedKf: packet arrival tick " << pkt.arrival_tick
        << " does not match the current tick " << state_.tick;
    throw std::logic_error(msg.str());
  }
  if (!pkt.arrived) return FuseOutcome::ignored_lost;
  const long delay = pkt.arrival_tick - pkt.origin_tick;
  if (delay < 0 || delay > max_delay_) {
    std::ostringstream msg;
    msg << "AugmentedKf: delay " << delay << " outside [0, " << max_delay_
        << "]";
    throw std::logic_error(msg.str());
  }

  const long z = base_.h.rows();
  Mat h_bar = Mat::Zero(z, (max_delay_ + 1) * base_dim_);
  h_bar.block(0, delay * base_dim_, z, base_dim_) = base_.h;

  const Vec residual = pkt.value - h_bar * state_.mean;
  flops_.gemm(z, h_bar.cols(), 1);
  flops_.elementwise(z, 1);
  state_ = standard_update(state_, residual, h_bar, base_.r, nullptr,
                           cond_bound_, &flops_);
  return FuseOutcome::fused;
}

GaussianState AugmentedKf::state() const {
  GaussianState marginal;
  marginal.mean = state_.mean.head(base_dim_);
  marginal.cov = state_.cov.topLeftCorner(base_dim_, base_dim_);
  marginal.tick = state_.tick;
  return marginal;
}

}  // namespace netkf
