#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "cdasim/spectral_field.hpp"

namespace cdasim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a trajectory produces non-finite coefficients or leaves the
/// energy bound. Carries the label of the offending trajectory when known and
/// the field at the moment of detection.
class BlowUpError : public Error {
 public:
  explicit BlowUpError(const std::string& what, std::string label = {}, std::shared_ptr<const SpectralField> field = {},
                       double time = 0.0)
      : Error(what), label_(std::move(label)), field_(std::move(field)), time_(time) {}
  const std::string& label() const noexcept { return label_; }
  /// May be null.
  const std::shared_ptr<const SpectralField>& field() const noexcept { return field_; }
  double time() const noexcept { return time_; }

 private:
  std::string label_;
  std::shared_ptr<const SpectralField> field_;
  double time_ = 0.0;
};

/// Malformed files, configs and series.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Unknown keys and unparsable values in run configurations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cdasim
