#include "netkf/state.hpp"

#include <stdexcept>
#include <string>

namespace netkf {

void require_psd(const Mat& m, const std::string& what) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(what + ": matrix is not square");
  }
  if (!m.isApprox(m.transpose(), 1e-9)) {
    throw std::invalid_argument(what + ": matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw std::invalid_argument(what + ": matrix is not positive semidefinite");
  }
}

Mat project_psd(const Mat& p) {
  Eigen::SelfAdjointEigenSolver<Mat> es(p);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("project_psd: eigendecomposition failed");
  }
  if (es.eigenvalues().minCoeff() >= 0.0) return p;
  const Vec clamped = es.eigenvalues().cwiseMax(0.0);
  return symmetrize(es.eigenvectors() * clamped.asDiagonal() *
                    es.eigenvectors().transpose());
}

StepHistory::StepHistory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) {
    throw std::invalid_argument("StepHistory: capacity must be positive");
  }
}

void StepHistory::push(StepRecord rec) {
  if (!records_.empty() && rec.tick != latest_tick() + 1) {
    throw std::logic_error("StepHistory: out-of-order tick " +
                           std::to_string(rec.tick) + ", expected " +
                           std::to_string(latest_tick() + 1));
  }
  records_.push_back(std::move(rec));
  if (records_.size() > capacity_) {
    records_.pop_front();
    ++evictions_;
  }
}

bool StepHistory::contains(long tick) const {
  return !records_.empty() && tick >= earliest_tick() && tick <= latest_tick();
}

const StepRecord& StepHistory::at(long tick) const {
  if (!contains(tick)) {
    throw std::out_of_range("StepHistory: no record for tick " +
                            std::to_string(tick));
  }
  return records_[static_cast<std::size_t>(tick - earliest_tick())];
}

StepRecord& StepHistory::mutable_at(long tick) {
  return const_cast<StepRecord&>(static_cast<const StepHistory*>(this)->at(tick));
}

void StepHistory::set_transition(long tick, const Mat& a_mat) {
  mutable_at(tick).a_mat = a_mat;
}

void StepHistory::note_fusion(long tick, const Mat& gain, const Mat& h_mat) {
  StepRecord& rec = mutable_at(tick);
  rec.gain = gain;
  rec.h_mat = h_mat;
}

long StepHistory::earliest_tick() const {
  if (records_.empty()) throw std::out_of_range("StepHistory: empty");
  return records_.front().tick;
}

long StepHistory::latest_tick() const {
  if (records_.empty()) throw std::out_of_range("StepHistory: empty");
  return records_.back().tick;
}

}  // namespace netkf
