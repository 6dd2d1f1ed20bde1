#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tscgd/errors.hpp"

namespace tscgd {

/// Dense real vector (x, trackers y^(j), sampled values).
using Vector = Eigen::VectorXd;

/// Sampled Jacobian in gradient layout: d_j rows by d_{j-1} columns, so that
/// entry (m, i) is the derivative of output i with respect to input m.
using Jacobian = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Level dimensions (d_T, d_{T-1}, ..., d_1, d_0) of a T-level composition.
/// d_0 is always 1 because the composed objective is real valued.
class LevelDims {
 public:
  explicit LevelDims(std::vector<int> dims);
  LevelDims(std::initializer_list<int> dims) : LevelDims(std::vector<int>(dims)) {}

  /// Number of levels T.
  int levels() const noexcept { return static_cast<int>(dims_.size()) - 1; }

  /// d_j for j in 0..T. Level j maps R^{d_j} into R^{d_{j-1}}.
  int dim(int j) const;

  /// Dimension of the decision variable x, d_T.
  int decision_dim() const noexcept { return dims_.front(); }

  const std::vector<int>& raw() const noexcept { return dims_; }

  friend bool operator==(const LevelDims&, const LevelDims&) = default;

 private:
  std::vector<int> dims_;
};

/// Product J_T * J_{T-1} * ... * J_1 of sampled Jacobians, evaluated right to
/// left as repeated matrix-vector products. The last factor must be a column
/// (d_0 = 1). Throws DimensionError naming the first mismatched adjacent pair.
Vector chain_product(std::span<const Jacobian> jacobians);

/// (1 - beta) * previous + beta * sample, with beta in (0, 1].
Vector convex_update(const Vector& previous, const Vector& sample, double beta);

/// True when every entry is finite.
bool all_finite(const Vector& v);

}  // namespace tscgd
