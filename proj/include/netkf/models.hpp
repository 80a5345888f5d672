#pragma once

#include <functional>

#include "netkf/common.hpp"

namespace netkf {

/// Nonlinear process model x' = f(x, u, w) with Jacobians taken at the
/// linearization point (x, u, 0) and an input-dependent noise covariance.
struct ProcessModel {
  int state_dim = 0;
  int input_dim = 0;
  int noise_dim = 0;
  std::function<Vec(const Vec& x, const Vec& u, const Vec& w)> f;
  std::function<Mat(const Vec& x, const Vec& u)> jac_state;  // df/dx
  std::function<Mat(const Vec& x, const Vec& u)> jac_noise;  // df/dw
  std::function<Mat(const Vec& u)> noise_cov;                // Q(u)
};

/// Measurement model z = h(x, v) with Jacobians taken at (x, 0).
/// `residual` customizes innovation computation (e.g. angle wrapping);
/// when unset the plain difference z - zhat is used.
struct MeasurementModel {
  int meas_dim = 0;
  int noise_dim = 0;
  std::function<Vec(const Vec& x, const Vec& v)> h;
  std::function<Mat(const Vec& x)> jac_state;  // dh/dx
  std::function<Mat(const Vec& x)> jac_noise;  // dh/dv
  Mat noise_cov;                               // R
  std::function<Vec(const Vec& z, const Vec& zhat)> residual;
};

Vec measurement_residual(const MeasurementModel& model, const Vec& z,
                         const Vec& zhat);

/// Wraps a linear system x' = Ax + Bu + w into the process contract.
ProcessModel linear_process_model(const Mat& a_mat, const Mat& b_mat,
                                  const Mat& q_mat);

/// Wraps z = Hx + v into the measurement contract.
MeasurementModel linear_measurement_model(const Mat& h_mat, const Mat& r_mat);

// Central finite-difference Jacobians, used to validate model contracts.
Mat fd_process_jac_state(const ProcessModel& model, const Vec& x, const Vec& u,
                         double eps = 1e-6);
Mat fd_process_jac_noise(const ProcessModel& model, const Vec& x, const Vec& u,
                         double eps = 1e-6);
Mat fd_measurement_jac_state(const MeasurementModel& model, const Vec& x,
                             double eps = 1e-6);
Mat fd_measurement_jac_noise(const MeasurementModel& model, const Vec& x,
                             double eps = 1e-6);

/// Norm-wise relative deviation ||a - b|| / max(1, ||b||).
double relative_deviation(const Mat& a, const Mat& b);

}  // namespace netkf
