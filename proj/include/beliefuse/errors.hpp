#pragma once

#include <stdexcept>
#include <string>

namespace beliefuse {

// Exit codes used by the command-line tool.
enum class ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDataError = 3,
  kModelMissing = 4,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModelMissing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A detector (or baseline) cannot be fitted from the labeled data it was given.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dempster's rule is undefined: the two sources are certain of contradictory
// hypotheses and the normalizer vanishes.
class TotalConflict : public std::runtime_error {
 public:
  explicit TotalConflict(double normalizer)
      : std::runtime_error("total conflict: Dempster normalizer is " +
                           std::to_string(normalizer)),
        normalizer_(normalizer) {}
  double normalizer() const noexcept { return normalizer_; }

 private:
  double normalizer_;
};

// Average precision is undefined for a class with no (non-difficult) ground truth.
class NoGroundTruth : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace beliefuse
