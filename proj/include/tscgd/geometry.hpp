#pragma once

#include <string>
#include <variant>

#include "tscgd/core.hpp"

namespace tscgd {

struct WholeSpace {};

struct Box {
  Vector lower;
  Vector upper;
};

struct Ball {
  Vector center;
  double radius = 1.0;
};

/// Closed convex feasible set X.
class ConvexSet {
 public:
  ConvexSet() = default;  // whole space
  ConvexSet(WholeSpace s) : set_(s) {}
  ConvexSet(Box box);
  ConvexSet(Ball ball);

  static ConvexSet whole_space() { return ConvexSet(); }
  static ConvexSet box(Vector lower, Vector upper) { return ConvexSet(Box{std::move(lower), std::move(upper)}); }
  static ConvexSet ball(Vector center, double radius) { return ConvexSet(Ball{std::move(center), radius}); }

  const std::variant<WholeSpace, Box, Ball>& variant() const noexcept { return set_; }
  bool is_whole_space() const noexcept { return std::holds_alternative<WholeSpace>(set_); }

  /// Membership with slack `tol`.
  bool contains(const Vector& point, double tol = 1e-12) const;

  /// Short description, e.g. "rn", "box", "ball(r=2)".
  std::string describe() const;

 private:
  std::variant<WholeSpace, Box, Ball> set_;
};

/// Euclidean projection argmin_{z in X} ||point - z||.
Vector project(const ConvexSet& set, const Vector& point);

}  // namespace tscgd
