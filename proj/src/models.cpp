#include "netkf/models.hpp"

#include <stdexcept>

namespace netkf {

Vec measurement_residual(const MeasurementModel& model, const Vec& z,
                         const Vec& zhat) {
  if (model.residual) {
    return model.residual(z, zhat);
  }
  return z - zhat;
}

ProcessModel linear_process_model(const Mat& a_mat, const Mat& b_mat,
                                  const Mat& q_mat) {
  if (a_mat.rows() != a_mat.cols()) {
    throw std::invalid_argument("linear_process_model: A must be square");
  }
  if (b_mat.rows() != a_mat.rows()) {
    throw std::invalid_argument("linear_process_model: B row count mismatch");
  }
  if (q_mat.rows() != a_mat.rows() || q_mat.cols() != a_mat.cols()) {
    throw std::invalid_argument("linear_process_model: Q shape mismatch");
  }
  ProcessModel model;
  model.state_dim = static_cast<int>(a_mat.rows());
  model.input_dim = static_cast<int>(b_mat.cols());
  model.noise_dim = static_cast<int>(a_mat.rows());
  model.f = [a_mat, b_mat](const Vec& x, const Vec& u, const Vec& w) -> Vec {
    return a_mat * x + b_mat * u + w;
  };
  model.jac_state = [a_mat](const Vec&, const Vec&) { return a_mat; };
  model.jac_noise = [n = a_mat.rows()](const Vec&, const Vec&) -> Mat {
    return Mat::Identity(n, n);
  };
  model.noise_cov = [q_mat](const Vec&) { return q_mat; };
  return model;
}

MeasurementModel linear_measurement_model(const Mat& h_mat, const Mat& r_mat) {
  if (r_mat.rows() != h_mat.rows() || r_mat.cols() != h_mat.rows()) {
    throw std::invalid_argument("linear_measurement_model: R shape mismatch");
  }
  MeasurementModel model;
  model.meas_dim = static_cast<int>(h_mat.rows());
  model.noise_dim = static_cast<int>(h_mat.rows());
  model.h = [h_mat](const Vec& x, const Vec& v) -> Vec { return h_mat * x + v; };
  model.jac_state = [h_mat](const Vec&) { return h_mat; };
  model.jac_noise = [m = h_mat.rows()](const Vec&) -> Mat {
    return Mat::Identity(m, m);
  };
  model.noise_cov = r_mat;
  return model;
}

namespace {

// Central differences: column j of the Jacobian is (f(p + eps e_j) -
// f(p - eps e_j)) / (2 eps) with the other arguments held fixed.
template <typename Fn>
Mat central_difference(const Fn& fn, const Vec& point, int out_dim,
                       double eps) {
  const int n = static_cast<int>(point.size());
  Mat jac(out_dim, n);
  Vec lo = point;
  Vec hi = point;
  for (int j = 0; j < n; ++j) {
    hi(j) += eps;
    lo(j) -= eps;
    jac.col(j) = (fn(hi) - fn(lo)) / (2.0 * eps);
    hi(j) = point(j);
    lo(j) = point(j);
  }
  return jac;
}

}  // namespace

Mat fd_process_jac_state(const ProcessModel& model, const Vec& x, const Vec& u,
                         double eps) {
  const Vec w0 = Vec::Zero(model.noise_dim);
  return central_difference(
      [&](const Vec& xp) { return model.f(xp, u, w0); }, x,
      model.state_dim, eps);
}

Mat fd_process_jac_noise(const ProcessModel& model, const Vec& x, const Vec& u,
                         double eps) {
  return central_difference(
      [&](const Vec& wp) { return model.f(x, u, wp); },
      Vec::Zero(model.noise_dim), model.state_dim, eps);
}

Mat fd_measurement_jac_state(const MeasurementModel& model, const Vec& x,
                             double eps) {
  const Vec v0 = Vec::Zero(model.noise_dim);
  return central_difference(
      [&](const Vec& xp) { return model.h(xp, v0); }, x, model.meas_dim, eps);
}

Mat fd_measurement_jac_noise(const MeasurementModel& model, const Vec& x,
                             double eps) {
  return central_difference(
      [&](const Vec& vp) { return model.h(x, vp); },
      Vec::Zero(model.noise_dim), model.meas_dim, eps);
}

double relative_deviation(const Mat& a, const Mat& b) {
  const double scale = std::max(1.0, b.norm());
  return (a - b).norm() / scale;
}

}  // namespace netkf
