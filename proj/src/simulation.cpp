#include "netkf/simulation.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>

namespace netkf {

namespace {

template <typename Impl>
class EstimatorAdapter final : public Estimator {
 public:
  explicit EstimatorAdapter(Impl impl) : impl_(std::move(impl)) {}
  void predict(const Vec& u_eff) override { impl_.predict(u_eff); }
  FuseOutcome fuse(const MeasurementPacket& pkt) override {
    return impl_.fuse(pkt);
  }
  const GaussianState& state() const override { return impl_.state(); }
  long long flop_total() const override { return impl_.flops().total(); }
  long stale_discards() const override { return impl_.stale_discards(); }

 private:
  Impl impl_;
};

GaussianState initial_state() {
  GaussianState init;
  init.mean = Vec::Zero(3);
  init.cov = Mat::Identity(3, 3) * kInitCovDiag;
  init.tick = 0;
  return init;
}

/// Independent Gaussian stream: its own generator so draws never interleave
/// with other streams through a shared distribution cache.
struct GaussStream {
  explicit GaussStream(std::uint64_t seed) : rng(seed) {}
  double draw() { return dist(rng); }
  std::mt19937_64 rng;
  std::normal_distribution<double> dist{0.0, 1.0};
};

}  // namespace

std::unique_ptr<Estimator> make_estimator(const std::string& name,
                                          const ScenarioConfig& cfg) {
  const GaussianState init = initial_state();
  ProcessModel proc = robot_process_model(cfg.robot);
  MeasurementModel meas = robot_measurement_model();
  meas.noise_cov = cfg.meas_noise;

  if (name == "poekf") {
    return std::make_unique<EstimatorAdapter<Poekf>>(
        Poekf(std::move(proc), std::move(meas), init, cfg.history_capacity));
  }
  if (name == "ekf") {
    return std::make_unique<EstimatorAdapter<NaiveEkf>>(
        NaiveEkf(std::move(proc), std::move(meas), init));
  }
  if (name == "refilter") {
    return std::make_unique<EstimatorAdapter<RefilterEstimator>>(
        RefilterEstimator(std::move(proc), std::move(meas), init,
                          cfg.history_capacity));
  }
  throw std::invalid_argument("make_estimator: unsupported filter '" + name +
                              "'");
}

TrialResult run_trial(const ScenarioConfig& cfg, long trial_index) {
  validate_scenario(cfg);

  // Per-trial seed derivation: one stream per trial, split into the four
  // independent randomness sources.
  std::uint64_t stream =
      cfg.master_seed ^
      (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(trial_index) + 1));
  ChannelConfig ctrl_cfg = cfg.ctrl_channel;
  ctrl_cfg.seed = splitmix64(stream);
  ChannelConfig meas_cfg = cfg.meas_channel;
  meas_cfg.seed = splitmix64(stream);
  GaussStream wheel_noise(splitmix64(stream));
  GaussStream meas_noise(splitmix64(stream));

  Channel<WheelSpeeds> ctrl(ctrl_cfg);
  Channel<Vec> meas(meas_cfg);

  const std::size_t n_filters = cfg.filters.size();
  std::vector<std::unique_ptr<Estimator>> filters;
  filters.reserve(n_filters);
  for (const auto& name : cfg.filters) {
    filters.push_back(make_estimator(name, cfg));
  }

  TrialResult out;
  out.truth.reserve(cfg.length + 1);
  out.estimates.assign(n_filters, {});
  out.flops.assign(n_filters, 0);
  out.wall_seconds.assign(n_filters, 0.0);
  out.stale_discards.assign(n_filters, 0);

  RobotPose truth;  // the origin; estimators start at the same pose
  out.truth.push_back(pose_to_vec(truth));
  for (std::size_t f = 0; f < n_filters; ++f) {
    out.estimates[f].reserve(cfg.length + 1);
    out.estimates[f].push_back(filters[f]->state().mean);
  }

  using clock = std::chrono::steady_clock;
  auto timed = [&](std::size_t f, auto&& fn) {
    const auto t0 = clock::now();
    fn();
    out.wall_seconds[f] +=
        std::chrono::duration<double>(clock::now() - t0).count();
  };

  for (long t = 0; t < cfg.length; ++t) {
    // Controller: command for this tick enters the input channel.
    ctrl.send(profile_command(cfg, t), t);

    // Actuator: apply the freshest arriving command, or zero when nothing
    // arrives (no hold). poll() sorts by origin, so the freshest is last.
    const auto commands = ctrl.poll(t);
    WheelSpeeds applied;
    if (!commands.empty()) applied = commands.back().payload;

    // Plant: wheel-speed noise scales with the applied command.
    const Mat q = input_noise_cov(applied, cfg.robot.delta);
    const Eigen::Vector2d w(std::sqrt(q(0, 0)) * wheel_noise.draw(),
                            std::sqrt(q(1, 1)) * wheel_noise.draw());
    truth = step_kinematics(truth, applied, cfg.robot, w);

    // Sensor: full-state measurement of the new pose enters the channel.
    Vec v(3);
    v << std::sqrt(cfg.meas_noise(0, 0)) * meas_noise.draw(),
        std::sqrt(cfg.meas_noise(1, 1)) * meas_noise.draw(),
        std::sqrt(cfg.meas_noise(2, 2)) * meas_noise.draw();
    meas.send(full_state_measurement(truth, v), t + 1);

    // Estimators know the applied input (acknowledgment assumption): the
    // effective input is exactly what the plant consumed, zero when lost.
    Vec u_eff(2);
    u_eff << applied.omega_l, applied.omega_r;
    for (std::size_t f = 0; f < n_filters; ++f) {
      timed(f, [&] { filters[f]->predict(u_eff); });
    }

    // Fuse everything due this tick, in origin order.
    for (const auto& arrival : meas.poll(t + 1)) {
      MeasurementPacket pkt;
      pkt.value = arrival.payload;
      pkt.origin_tick = arrival.origin_tick;
      pkt.arrival_tick = t + 1;
      pkt.arrived = true;
      for (std::size_t f = 0; f < n_filters; ++f) {
        timed(f, [&] { filters[f]->fuse(pkt); });
      }
    }

    out.truth.push_back(pose_to_vec(truth));
    for (std::size_t f = 0; f < n_filters; ++f) {
      out.estimates[f].push_back(filters[f]->state().mean);
    }
  }

  for (std::size_t f = 0; f < n_filters; ++f) {
    out.flops[f] = filters[f]->flop_total();
    out.stale_discards[f] = filters[f]->stale_discards();
  }
  return out;
}

MonteCarloResult run_monte_carlo(const ScenarioConfig& cfg, int threads) {
  validate_scenario(cfg);
  const long runs = cfg.runs;

  std::vector<TrialResult> trials(runs);
  int workers = threads;
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
  }
  workers = static_cast<int>(
      std::min<long>(workers, runs));

  if (workers == 1) {
    for (long i = 0; i < runs; ++i) trials[i] = run_trial(cfg, i);
  } else {
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int wkr = 0; wkr < workers; ++wkr) {
      pool.emplace_back([&] {
        for (long i = next.fetch_add(1); i < runs; i = next.fetch_add(1)) {
          trials[i] = run_trial(cfg, i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  const std::size_t n_filters = cfg.filters.size();
  const long ticks = cfg.length + 1;

  MonteCarloResult mc;
  mc.filter_names = cfg.filters;
  mc.length = cfg.length;
  mc.rmse.assign(n_filters, {});
  mc.flop_totals.assign(n_filters, 0);
  mc.wall_totals.assign(n_filters, 0.0);
  mc.stale_totals.assign(n_filters, 0);
  for (auto& per_filter : mc.rmse) {
    for (auto& comp : per_filter) comp.assign(ticks, 0.0);
  }

  // Accumulate in trial order so the aggregate never depends on the worker
  // count or completion order.
  for (long i = 0; i < runs; ++i) {
    const TrialResult& tr = trials[i];
    for (std::size_t f = 0; f < n_filters; ++f) {
      for (long t = 0; t < ticks; ++t) {
        const Vec err = tr.estimates[f][t] - tr.truth[t];
        for (int c = 0; c < 3; ++c) {
          mc.rmse[f][c][t] += err(c) * err(c);
        }
      }
      mc.flop_totals[f] += tr.flops[f];
      mc.wall_totals[f] += tr.wall_seconds[f];
      mc.stale_totals[f] += tr.stale_discards[f];
    }
  }
  for (auto& per_filter : mc.rmse) {
    for (auto& comp : per_filter) {
      for (auto& val : comp) val = std::sqrt(val / static_cast<double>(runs));
    }
  }
  mc.sample_trial = std::move(trials[0]);
  return mc;
}

double steady_state_mean(const std::vector<double>& series) {
  if (series.empty()) {
    throw std::invalid_argument("steady_state_mean: empty series");
  }
  const std::size_t start = series.size() / 2;
  double sum = 0.0;
  for (std::size_t i = start; i < series.size(); ++i) sum += series[i];
  return sum / static_cast<double>(series.size() - start);
}

std::size_t filter_index(const MonteCarloResult& mc, const std::string& name) {
  for (std::size_t i = 0; i < mc.filter_names.size(); ++i) {
    if (mc.filter_names[i] == name) return i;
  }
  throw std::invalid_argument("filter '" + name + "' not in this run");
}

std::array<double, 3> steady_state_rmse(const MonteCarloResult& mc,
                                        const std::string& filter) {
  const std::size_t f = filter_index(mc, filter);
  return {steady_state_mean(mc.rmse[f][0]), steady_state_mean(mc.rmse[f][1]),
          steady_state_mean(mc.rmse[f][2])};
}

double normalized_flops(const MonteCarloResult& mc,
                        const std::string& filter) {
  const std::size_t f = filter_index(mc, filter);
  for (std::size_t i = 0; i < mc.filter_names.size(); ++i) {
    if (mc.filter_names[i] == "ekf") {
      return static_cast<double>(mc.flop_totals[f]) /
             static_cast<double>(mc.flop_totals[i]);
    }
  }
  return std::nan("");
}

}  // namespace netkf
