#include "tscgd/core.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

namespace tscgd {

LevelDims::LevelDims(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) {
    throw std::invalid_argument("LevelDims needs at least two entries (T >= 1)");
  }
  for (int d : dims_) {
    if (d < 1) throw std::invalid_argument(fmt::format("LevelDims entry {} is not positive", d));
  }
  if (dims_.back() != 1) {
    throw std::invalid_argument(
        fmt::format("LevelDims must end in d_0 = 1, got {}", dims_.back()));
  }
}

int LevelDims::dim(int j) const {
  if (j < 0 || j > levels()) {
    throw std::out_of_range(fmt::format("level {} outside 0..{}", j, levels()));
  }
  return dims_[static_cast<std::size_t>(levels() - j)];
}

Vector chain_product(std::span<const Jacobian> jacobians) {
  if (jacobians.empty()) throw DimensionError("chain_product needs at least one Jacobian");
  const std::size_t T = jacobians.size();
  const Jacobian& last = jacobians[T - 1];
  if (last.cols() != 1) {
    throw DimensionError(fmt::format("chain_product: J_1 must have one column (d_0 = 1), got {}x{}",
                                     last.rows(), last.cols()));
  }
  // jacobians[i] is J_{T-i}; walk from J_1 outwards.
  Vector acc = last.col(0);
  for (std::size_t i = T - 1; i-- > 0;) {
    const Jacobian& J = jacobians[i];
    if (J.cols() != acc.size()) {
      const std::size_t level = T - i;
      throw DimensionError(fmt::format(
          "chain_product: J_{} is {}x{} but J_{} has {} rows", level, J.rows(), J.cols(),
          level - 1, acc.size()));
    }
    acc = J * acc;
  }
  return acc;
}

Vector convex_update(const Vector& previous, const Vector& sample, double beta) {
  if (previous.size() != sample.size()) {
    throw DimensionError(fmt::format("convex_update: previous has dim {}, sample has dim {}",
                                     previous.size(), sample.size()));
  }
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw std::invalid_argument(fmt::format("convex_update: beta = {} outside (0, 1]", beta));
  }
  if (beta == 1.0) return sample;
  return (1.0 - beta) * previous + beta * sample;
}

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace tscgd
