#include "netkf/robot.hpp"

#include <cmath>
#include <stdexcept>

namespace netkf {

void validate_params(const RobotParams& params) {
  if (!(params.wheel_radius > 0.0) || !(params.wheel_base > 0.0) ||
      !(params.ts > 0.0) || !(params.delta >= 0.0)) {
    throw std::invalid_argument(
        "robot params: wheel_radius, wheel_base, ts must be positive and "
        "delta nonnegative");
  }
}

RobotPose step_kinematics(const RobotPose& pose, const WheelSpeeds& u,
                          const RobotParams& params,
                          const Eigen::Vector2d& w) {
  validate_params(params);
  if (!std::isfinite(u.omega_l) || !std::isfinite(u.omega_r)) {
    throw std::invalid_argument("step_kinematics: wheel speeds must be finite");
  }
  const double wl = u.omega_l + w(0);
  const double wr = u.omega_r + w(1);
  const double r = params.wheel_radius;
  const double ts = params.ts;

  RobotPose next;
  next.x = pose.x + 0.5 * r * ts * (wl + wr) * std::cos(pose.theta);
  next.y = pose.y + 0.5 * r * ts * (wl + wr) * std::sin(pose.theta);
  next.theta =
      wrap_angle(pose.theta + (r / params.wheel_base) * ts * (wl - wr));
  return next;
}

Mat process_jacobian_state(const RobotPose& pose_est, const WheelSpeeds& u,
                           const RobotParams& params) {
  const double v_c = 0.5 * params.wheel_radius * (u.omega_l + u.omega_r);
  Mat a(3, 3);
  a << 1.0, 0.0, -params.ts * v_c * std::sin(pose_est.theta),
       0.0, 1.0, params.ts * v_c * std::cos(pose_est.theta),
       0.0, 0.0, 1.0;
  return a;
}

Mat process_jacobian_noise(const RobotPose& pose_est,
                           const RobotParams& params) {
  const double half_rts = 0.5 * params.wheel_radius * params.ts;
  const double turn = params.ts * params.wheel_radius / params.wheel_base;
  Mat w(3, 2);
  w << half_rts * std::cos(pose_est.theta), half_rts * std::cos(pose_est.theta),
       half_rts * std::sin(pose_est.theta), half_rts * std::sin(pose_est.theta),
       turn, -turn;
  return w;
}

Mat input_noise_cov(const WheelSpeeds& u, double delta) {
  if (delta < 0.0) {
    throw std::invalid_argument("input_noise_cov: delta must be nonnegative");
  }
  Mat q = Mat::Zero(2, 2);
  q(0, 0) = delta * u.omega_r * u.omega_r;
  q(1, 1) = delta * u.omega_l * u.omega_l;
  return q;
}

Mat measurement_noise_cov() {
  Mat r = Mat::Zero(3, 3);
  r(0, 0) = 0.01;
  r(1, 1) = 0.01;
  r(2, 2) = 0.018;
  return r;
}

Vec full_state_measurement(const RobotPose& pose_true, const Vec& v) {
  if (v.size() != 3) {
    throw std::invalid_argument("full_state_measurement: v must be length 3");
  }
  return pose_to_vec(pose_true) + v;
}

ProcessModel robot_process_model(const RobotParams& params) {
  validate_params(params);
  ProcessModel model;
  model.state_dim = 3;
  model.input_dim = 2;
  model.noise_dim = 2;
  model.f = [params](const Vec& x, const Vec& u, const Vec& w) -> Vec {
    const RobotPose next = step_kinematics(
        vec_to_pose(x), WheelSpeeds{u(0), u(1)}, params,
        Eigen::Vector2d(w(0), w(1)));
    return pose_to_vec(next);
  };
  model.jac_state = [params](const Vec& x, const Vec& u) {
    return process_jacobian_state(vec_to_pose(x), WheelSpeeds{u(0), u(1)},
                                  params);
  };
  model.jac_noise = [params](const Vec& x, const Vec&) {
    return process_jacobian_noise(vec_to_pose(x), params);
  };
  model.noise_cov = [params](const Vec& u) {
    return input_noise_cov(WheelSpeeds{u(0), u(1)}, params.delta);
  };
  return model;
}

MeasurementModel robot_measurement_model() {
  MeasurementModel model;
  model.meas_dim = 3;
  model.noise_dim = 3;
  model.h = [](const Vec& x, const Vec& v) -> Vec { return x + v; };
  model.jac_state = [](const Vec&) -> Mat { return Mat::Identity(3, 3); };
  model.jac_noise = [](const Vec&) -> Mat { return Mat::Identity(3, 3); };
  model.noise_cov = measurement_noise_cov();
  model.residual = [](const Vec& z, const Vec& zhat) -> Vec {
    Vec d = z - zhat;
    d(2) = wrap_angle(d(2));
    return d;
  };
  return model;
}

}  // namespace netkf
