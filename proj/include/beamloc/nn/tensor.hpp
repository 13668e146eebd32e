// Dense row-major tensor and the parameter registry the optimizer and
// checkpoints iterate over.
#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "beamloc/common.hpp"

namespace beamloc::nn {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s)
      : shape(std::move(s)), data(count(shape), 0.0) {}

  static std::size_t count(const std::vector<std::size_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
  }

  std::size_t size() const { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }

  void require_shape(const std::vector<std::size_t>& s, const char* what) const {
    if (shape != s) throw InvalidArgument(std::string(what) + ": tensor shape mismatch");
  }
};

// Named handle onto one trainable array and its gradient buffer. The name
// doubles as the checkpoint key and carries the layer kind for the gradient
// checker ("conv3x3", "conv1d", "bn", "dense", ...).
struct ParamView {
  std::string name;
  std::vector<double>* value = nullptr;
  std::vector<double>* grad = nullptr;
};

// Non-trainable state persisted alongside parameters (batch-norm running
// statistics).
struct StateView {
  std::string name;
  std::vector<double>* value = nullptr;
};

}  // namespace beamloc::nn
