#pragma once

#include <stdexcept>
#include <string>

namespace netkf {

/// A measurement older than the retained step history; callers are expected
/// to discard the packet and count it rather than abort.
class StaleMeasurementError : public std::runtime_error {
 public:
  explicit StaleMeasurementError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Ill-conditioned or non-finite arithmetic in a filter update.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace netkf
