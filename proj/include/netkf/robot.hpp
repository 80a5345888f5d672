#pragma once

#include "netkf/common.hpp"
#include "netkf/models.hpp"

namespace netkf {

/// Planar pose of the robot; theta is kept in (-pi, pi].
struct RobotPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// Physical and discretization parameters of the differential-drive robot.
struct RobotParams {
  double wheel_radius = 0.05;  // m
  double wheel_base = 0.30;    // m, distance between the wheels
  double ts = 0.1;             // s, sampling period
  double delta = 0.01;         // input-noise coefficient
};

/// Commanded rotational speeds of the left and right wheels, rad/s.
struct WheelSpeeds {
  double omega_l = 0.0;
  double omega_r = 0.0;
};

void validate_params(const RobotParams& params);

inline Vec pose_to_vec(const RobotPose& p) {
  Vec v(3);
  v << p.x, p.y, p.theta;
  return v;
}

inline RobotPose vec_to_pose(const Vec& v) {
  return RobotPose{v(0), v(1), v(2)};
}

/// One kinematic step with additive wheel-speed noise w = (w_l, w_r):
///   x += (R/2) Ts (wl + wr) cos(theta)
///   y += (R/2) Ts (wl + wr) sin(theta)
///   theta += (R/L) Ts (wl - wr), then wrapped to (-pi, pi]
/// where wl = omega_l + w_l and wr = omega_r + w_r.
RobotPose step_kinematics(const RobotPose& pose, const WheelSpeeds& u,
                          const RobotParams& params,
                          const Eigen::Vector2d& w = Eigen::Vector2d::Zero());

/// d(step)/d(pose) at the given linearization point:
/// [[1, 0, -Ts v_c sin(theta)], [0, 1, Ts v_c cos(theta)], [0, 0, 1]]
/// with v_c = (R/2)(omega_l + omega_r).
Mat process_jacobian_state(const RobotPose& pose_est, const WheelSpeeds& u,
                           const RobotParams& params);

/// d(step)/d(wheel noise): rows (Ts R/2 cos, Ts R/2 cos),
/// (Ts R/2 sin, Ts R/2 sin), (Ts R/L, -Ts R/L). The third row carries
/// opposite signs so it differentiates the (wl - wr) heading term.
Mat process_jacobian_noise(const RobotPose& pose_est,
                           const RobotParams& params);

/// Wheel-noise covariance diag(delta * omega_r^2, delta * omega_l^2).
/// The right-wheel speed sets the first diagonal entry; this pairing is
/// kept as modeled even though the noise vector order is (left, right).
Mat input_noise_cov(const WheelSpeeds& u, double delta);

/// Pose sensor noise covariance diag(0.01, 0.01, 0.018).
Mat measurement_noise_cov();

/// Full-state pose measurement z = pose + v (H = V = I).
Vec full_state_measurement(const RobotPose& pose_true, const Vec& v);

/// Wraps the kinematics into the nonlinear process contract. The input
/// vector is (omega_l, omega_r); the noise vector is (w_l, w_r).
ProcessModel robot_process_model(const RobotParams& params);

/// Full-state pose measurement as a model contract. The residual hook wraps
/// the heading component so innovations near +-pi stay small.
MeasurementModel robot_measurement_model();

}  // namespace netkf
