#include "tscgd/geometry.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace tscgd {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_dim(const Vector& point, Eigen::Index dim) {
  if (point.size() != dim) {
    throw DimensionError(
        fmt::format("point has dim {} but the feasible set has dim {}", point.size(), dim));
  }
}

}  // namespace

ConvexSet::ConvexSet(Box box) {
  if (box.lower.size() != box.upper.size()) {
    throw DimensionError("box bounds have different dimensions");
  }
  for (Eigen::Index i = 0; i < box.lower.size(); ++i) {
    if (!(box.lower[i] <= box.upper[i])) {
      throw std::invalid_argument(fmt::format("box lower[{}] = {} exceeds upper[{}] = {}", i,
                                              box.lower[i], i, box.upper[i]));
    }
  }
  set_ = std::move(box);
}

ConvexSet::ConvexSet(Ball ball) {
  if (!(ball.radius > 0.0) || !std::isfinite(ball.radius)) {
    throw std::invalid_argument(fmt::format("ball radius must be positive, got {}", ball.radius));
  }
  set_ = std::move(ball);
}

bool ConvexSet::contains(const Vector& point, double tol) const {
  return std::visit(Overloaded{
                        [](const WholeSpace&) { return true; },
                        [&](const Box& b) {
                          require_dim(point, b.lower.size());
                          return ((point - b.lower).array() >= -tol).all() &&
                                 ((b.upper - point).array() >= -tol).all();
                        },
                        [&](const Ball& b) {
                          require_dim(point, b.center.size());
                          return (point - b.center).norm() <= b.radius + tol;
                        },
                    },
                    set_);
}

std::string ConvexSet::describe() const {
  return std::visit(Overloaded{
                        [](const WholeSpace&) { return std::string("rn"); },
                        [](const Box& b) { return fmt::format("box(dim={})", b.lower.size()); },
                        [](const Ball& b) { return fmt::format("ball(r={})", b.radius); },
                    },
                    set_);
}

Vector project(const ConvexSet& set, const Vector& point) {
  return std::visit(Overloaded{
                        [&](const WholeSpace&) -> Vector { return point; },
                        [&](const Box& b) -> Vector {
                          require_dim(point, b.lower.size());
                          return point.cwiseMax(b.lower).cwiseMin(b.upper);
                        },
                        [&](const Ball& b) -> Vector {
                          require_dim(point, b.center.size());
                          const Vector offset = point - b.center;
                          const double dist = offset.norm();
                          // Points within rounding of the sphere count as feasible so
                          // that projection is exactly idempotent.
                          if (dist <= b.radius * (1.0 + 8.0 * kEps)) return point;
                          return b.center + offset * (b.radius / dist);
                        },
                    },
                    set.variant());
}

}  // namespace tscgd
