#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chf {

/// Malformed input data, broken invariant or violated precondition.
/// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& message)
      : std::runtime_error(message) {}
};

/// A training run produced a non-finite loss. Carries the position of the
/// offending step so a diverged run can be diagnosed. CLI exit code 3.
class TrainingDivergence : public std::runtime_error {
 public:
  TrainingDivergence(std::size_t epoch, std::size_t batch, double loss)
      : std::runtime_error("training diverged at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(batch) +
                           " (loss = " + std::to_string(loss) + ")"),
        epoch_(epoch),
        batch_(batch),
        loss_(loss) {}

  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t batch() const noexcept { return batch_; }
  double loss() const noexcept { return loss_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
  double loss_;
};

}  // namespace chf
