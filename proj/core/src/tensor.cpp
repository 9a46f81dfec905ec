#include "chf/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "chf/errors.hpp"

namespace chf {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  // A rank-0 tensor is the empty placeholder (e.g. the parameter slot of a
  // layer without parameters), not a scalar.
  if (shape.empty()) return 0;
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_product(shape_)) {
    throw ValidationError("tensor data length does not match shape");
  }
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
  if (shape_product(shape) != data_.size()) {
    throw ValidationError("reshape changes element count");
  }
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(double value) {
  std::fill(data_.begin(), data_.end(), value);
}

}  // namespace chf
