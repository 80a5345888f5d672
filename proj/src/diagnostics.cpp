#include "netkf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "netkf/channel.hpp"
#include "netkf/poekf.hpp"

namespace netkf {

namespace {

Mat random_mat(std::mt19937_64& rng, long rows, long cols, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) m(i, j) = scale * u(rng);
  }
  return m;
}

Mat random_spd(std::mt19937_64& rng, long n, double ridge) {
  const Mat g = random_mat(rng, n, n, 1.0);
  return Mat(g * g.transpose() + ridge * Mat::Identity(n, n));
}

Vec random_vec(std::mt19937_64& rng, long n, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(n);
  for (long i = 0; i < n; ++i) v(i) = scale * u(rng);
  return v;
}

struct GainInstance {
  DelayedKalmanFilter filter;
  long delay = 0;
};

/// Builds a filter whose history is populated by a short randomized trace
/// (random inputs, occasional random fusions) and leaves it right after a
/// prediction, so the current state is a priori estimate.
GainInstance make_gain_instance(std::mt19937_64& rng, long n, long delay) {
  LinearSystem sys;
  sys.a = random_mat(rng, n, n, 0.8);
  sys.b = random_mat(rng, n, 1, 1.0);
  sys.h = random_mat(rng, n, n, 1.0);
  sys.q = random_spd(rng, n, 0.1);
  sys.r = random_spd(rng, n, 0.1);

  GaussianState init;
  init.mean = random_vec(rng, n, 2.0);
  init.cov = random_spd(rng, n, 0.5);
  init.tick = 0;

  GainInstance inst{DelayedKalmanFilter(sys, init), delay};
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<long> delay_pick(0, 2);

  const long horizon = delay + 3;
  for (long t = 1; t <= horizon; ++t) {
    inst.filter.predict(random_vec(rng, 1, 1.0));
    if (t < horizon && coin(rng) < 0.6) {
      MeasurementPacket pkt;
      pkt.origin_tick = std::max<long>(0, t - delay_pick(rng));
      pkt.arrival_tick = t;
      pkt.value = random_vec(rng, n, 2.0);
      pkt.arrived = true;
      inst.filter.fuse(pkt);
    }
  }
  return inst;
}

/// Posteriori covariance trace as a function of an arbitrary gain K, per
/// the covariance expression the optimal gain minimizes:
/// tr(P_k^-) - 2 tr(K H L) + tr(K S K^T), L = P_i^- F^T, S = H P_i^- H^T + R.
double posteriori_trace(const Mat& p_k, const Mat& l_mat, const Mat& h_mat,
                        const Mat& s_mat, const Mat& k_mat) {
  const double t1 = p_k.trace();
  const double t2 = (k_mat * h_mat * l_mat).trace();
  const double t3 = (k_mat * s_mat * k_mat.transpose()).trace();
  return t1 - 2.0 * t2 + t3;
}

}  // namespace

std::vector<CheckResult> gain_optimality_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst_grad = 0.0;
  double worst_split = 0.0;
  std::string failure;

  for (int inst_idx = 0; inst_idx < 50; ++inst_idx) {
    const long n = (inst_idx % 2 == 0) ? 1 : 3;
    const long delay = inst_idx % 6;
    GainInstance inst = make_gain_instance(rng, n, delay);
    DelayedKalmanFilter& filter = inst.filter;
    const StepHistory& hist = filter.history();
    const LinearSystem& sys = filter.system();

    const long now = filter.tick();
    const long origin = now - delay;
    const GaussianState& priori_i = hist.at(origin).priori;
    const GaussianState& priori_k = filter.state();

    const Mat f_mat = relevance_factor(hist, delay);
    const Mat l_mat = priori_i.cov * f_mat.transpose();
    const Mat s_mat = sys.h * priori_i.cov * sys.h.transpose() + sys.r;

    // The gain that the update path actually applies.
    DelayedObservation obs;
    obs.origin_tick = origin;
    obs.residual = random_vec(rng, n, 1.0);
    obs.h_tilde = sys.h;
    obs.r_eff = sys.r;
    Mat applied_gain;
    apply_delayed_update(priori_k, hist, obs, &applied_gain);

    // Stationarity: central differences of the trace expression at the
    // applied gain. The expression is quadratic in K, so any residual
    // gradient is numerical noise.
    const double eps = 1e-5;
    for (long a = 0; a < applied_gain.rows(); ++a) {
      for (long b = 0; b < applied_gain.cols(); ++b) {
        Mat hi = applied_gain;
        Mat lo = applied_gain;
        hi(a, b) += eps;
        lo(a, b) -= eps;
        const double grad =
            (posteriori_trace(priori_k.cov, l_mat, sys.h, s_mat, hi) -
             posteriori_trace(priori_k.cov, l_mat, sys.h, s_mat, lo)) /
            (2.0 * eps);
        worst_grad = std::max(worst_grad, std::abs(grad));
      }
    }

    // Factorization: the applied gain splits into F times the standard
    // gain at the origin tick.
    const Mat split = f_mat * standard_gain(priori_i, sys.h, sys.r);
    const double split_err = (applied_gain - split).cwiseAbs().maxCoeff();
    worst_split = std::max(worst_split, split_err);

    // delayed_gain must agree with its own factorization by construction.
    const Mat direct = delayed_gain(f_mat, priori_i, sys.h, sys.r);
    const double direct_err = (direct - split).cwiseAbs().maxCoeff();
    worst_split = std::max(worst_split, direct_err);

    if (worst_grad >= 1e-6 && failure.empty()) {
      std::ostringstream msg;
      msg << "instance " << inst_idx << " (n=" << n << ", delay=" << delay
          << ")";
      failure = msg.str();
    }
  }

  std::vector<CheckResult> results;
  {
    std::ostringstream detail;
    detail << "max |d tr(P+)/dK| = " << worst_grad;
    if (!failure.empty()) detail << " at " << failure;
    results.push_back({"gain-stationarity over 50 random instances",
                       worst_grad < 1e-6, detail.str()});
  }
  {
    std::ostringstream detail;
    detail << "max |K - F K*| = " << worst_split;
    results.push_back({"gain-factorization over 50 random instances",
                       worst_split < 1e-12, detail.str()});
  }
  return results;
}

std::vector<CheckResult> linear_equivalence_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  std::string where;

  for (int inst_idx = 0; inst_idx < 10; ++inst_idx) {
    const long n = 1 + inst_idx % 4;
    LinearSystem sys;
    sys.a = random_mat(rng, n, n, 0.7);
    sys.b = random_mat(rng, n, 2, 1.0);
    sys.h = random_mat(rng, n, n, 1.0);
    sys.q = random_spd(rng, n, 0.05);
    sys.r = random_spd(rng, n, 0.1);

    GaussianState init;
    init.mean = random_vec(rng, n, 1.0);
    init.cov = random_spd(rng, n, 0.3);
    init.tick = 0;

    DelayedKalmanFilter linear(sys, init);
    Poekf nonlinear(linear_process_model(sys.a, sys.b, sys.q),
                    linear_measurement_model(sys.h, sys.r), init);

    ChannelConfig ch_cfg;
    ch_cfg.delay_min = 0;
    ch_cfg.delay_max = 5;
    ch_cfg.loss_prob = 0.15;
    ch_cfg.seed = rng();
    Channel<Vec> channel(ch_cfg);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Vec truth = init.mean;
    for (long t = 0; t < 60; ++t) {
      const Vec u = random_vec(rng, 2, 1.0);
      linear.predict(u);
      nonlinear.predict(u);
      Vec w(n);
      for (long i = 0; i < n; ++i) w(i) = 0.2 * gauss(rng);
      truth = sys.a * truth + sys.b * u + w;
      Vec v(n);
      for (long i = 0; i < n; ++i) v(i) = 0.3 * gauss(rng);
      channel.send(Vec(sys.h * truth + v), t + 1);

      for (const auto& arrival : channel.poll(t + 1)) {
        MeasurementPacket pkt;
        pkt.value = arrival.payload;
        pkt.origin_tick = arrival.origin_tick;
        pkt.arrival_tick = t + 1;
        pkt.arrived = true;
        linear.fuse(pkt);
        nonlinear.fuse(pkt);
      }

      const double mean_scale =
          std::max(1.0, linear.state().mean.cwiseAbs().maxCoeff());
      const double cov_scale =
          std::max(1.0, linear.state().cov.cwiseAbs().maxCoeff());
      const double diff = std::max(
          (linear.state().mean - nonlinear.state().mean).cwiseAbs().maxCoeff() /
              mean_scale,
          (linear.state().cov - nonlinear.state().cov).cwiseAbs().maxCoeff() /
              cov_scale);
      if (diff > worst) {
        worst = diff;
        std::ostringstream msg;
        msg << "instance " << inst_idx << " tick " << t + 1;
        where = msg.str();
      }
    }
  }

  std::ostringstream detail;
  detail << "max relative deviation = " << worst;
  if (!where.empty()) detail << " (" << where << ")";
  return {{"linear equivalence of the nonlinear filter (10 random traces)",
           worst < 1e-12, detail.str()}};
}

namespace {

OrderingResult run_linear_ordering(
    const std::string& name, const LinearSystem& sys,
    const std::function<Vec(long)>& input_at, long delay_min, long delay_max,
    double loss, long length, long runs, std::uint64_t seed) {
  const long n = sys.a.rows();
  GaussianState init;
  init.mean = Vec::Zero(n);
  init.cov = 0.01 * Mat::Identity(n, n);
  init.tick = 0;

  // Accumulated squared error per tick, per estimator.
  std::vector<double> se_aug(length + 1, 0.0);
  std::vector<double> se_del(length + 1, 0.0);
  std::vector<double> se_nai(length + 1, 0.0);

  for (long run = 0; run < runs; ++run) {
    std::uint64_t stream =
        seed ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(run) + 1));
    ChannelConfig ch_cfg;
    ch_cfg.delay_min = delay_min;
    ch_cfg.delay_max = delay_max;
    ch_cfg.loss_prob = loss;
    ch_cfg.seed = splitmix64(stream);
    Channel<Vec> channel(ch_cfg);
    std::mt19937_64 noise_rng(splitmix64(stream));
    std::normal_distribution<double> gauss(0.0, 1.0);

    AugmentedKf aug(sys, init, delay_max);
    Poekf delayed(linear_process_model(sys.a, sys.b, sys.q),
                  linear_measurement_model(sys.h, sys.r), init);
    NaiveEkf naive(linear_process_model(sys.a, sys.b, sys.q),
                   linear_measurement_model(sys.h, sys.r), init);

    const Eigen::LLT<Mat> q_chol(sys.q);
    const Eigen::LLT<Mat> r_chol(sys.r);
    Vec truth = init.mean;

    for (long t = 0; t < length; ++t) {
      const Vec u = input_at(t);
      aug.predict(u);
      delayed.predict(u);
      naive.predict(u);

      Vec w(n);
      for (long i = 0; i < n; ++i) w(i) = gauss(noise_rng);
      truth = sys.a * truth + sys.b * u + q_chol.matrixL() * w;

      Vec v(sys.h.rows());
      for (long i = 0; i < v.size(); ++i) v(i) = gauss(noise_rng);
      channel.send(Vec(sys.h * truth + r_chol.matrixL() * v), t + 1);

      for (const auto& arrival : channel.poll(t + 1)) {
        MeasurementPacket pkt;
        pkt.value = arrival.payload;
        pkt.origin_tick = arrival.origin_tick;
        pkt.arrival_tick = t + 1;
        pkt.arrived = true;
        aug.fuse(pkt);
        delayed.fuse(pkt);
        naive.fuse(pkt);
      }

      se_aug[t + 1] += (aug.state().mean - truth).squaredNorm();
      se_del[t + 1] += (delayed.state().mean - truth).squaredNorm();
      se_nai[t + 1] += (naive.state().mean - truth).squaredNorm();
    }
  }

  auto steady_total = [&](const std::vector<double>& se) {
    const std::size_t start = se.size() / 2;
    double sum = 0.0;
    for (std::size_t i = start; i < se.size(); ++i) sum += se[i];
    const double denom = static_cast<double>((se.size() - start) * runs * n);
    return std::sqrt(sum / denom);
  };

  OrderingResult out;
  out.name = name;
  out.augmented = steady_total(se_aug);
  out.delayed = steady_total(se_del);
  out.naive = steady_total(se_nai);
  return out;
}

}  // namespace

OrderingResult linear_ordering_scalar(std::uint64_t seed, long runs) {
  LinearSystem sys;
  sys.a = Mat::Constant(1, 1, 0.98);
  sys.b = Mat::Constant(1, 1, 0.5);
  sys.h = Mat::Identity(1, 1);
  sys.q = Mat::Constant(1, 1, 0.01);
  sys.r = Mat::Constant(1, 1, 0.25);
  auto input_at = [](long t) {
    Vec u(1);
    u << std::sin(0.05 * static_cast<double>(t));
    return u;
  };
  return run_linear_ordering("scalar", sys, input_at, 1, 4, 0.05, 300, runs,
                             seed);
}

OrderingResult linear_ordering_three_state(std::uint64_t seed, long runs) {
  const double c = std::cos(0.1);
  const double s = std::sin(0.1);
  LinearSystem sys;
  sys.a = Mat(3, 3);
  sys.a << 0.97 * c, -0.97 * s, 0.0,
           0.97 * s, 0.97 * c, 0.0,
           0.0, 0.0, 0.99;
  sys.b = Mat(3, 2);
  sys.b << 1.0, 0.0,
           0.0, 1.0,
           0.5, 0.5;
  sys.h = Mat::Identity(3, 3);
  sys.q = 0.01 * Mat::Identity(3, 3);
  sys.r = 0.25 * Mat::Identity(3, 3);
  auto input_at = [](long t) {
    Vec u(2);
    u << 0.3 * std::sin(0.07 * static_cast<double>(t)),
        0.3 * std::cos(0.05 * static_cast<double>(t));
    return u;
  };
  return run_linear_ordering("three-state", sys, input_at, 1, 5, 0.10, 300,
                             runs, seed);
}

}  // namespace netkf
