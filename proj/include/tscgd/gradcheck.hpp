#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tscgd/oracle.hpp"
#include "tscgd/problems.hpp"

namespace tscgd {

inline constexpr double kGradcheckTolerance = 1e-4;

/// Outcome of comparing one sampled Jacobian against central differences of
/// the same frozen sampled map.
struct JacobianCheck {
  /// max |J - J_fd| / max(1, max |J|); empty when the point was excluded.
  std::optional<double> rel_error;
  std::string skip_reason;
};

/// Central differences with h_i = rel_step * max(1, |point_i|).
Jacobian finite_difference_jacobian(const Component& component, const Vector& point,
                                    const Draw& omega, double rel_step = 1e-6);

JacobianCheck check_jacobian(const Component& component, const Vector& point, const Draw& omega,
                             double rel_step = 1e-6);

struct GradcheckOptions {
  int points = 20;
  std::uint64_t seed = 0;
  double tolerance = kGradcheckTolerance;
  double rel_step = 1e-6;
};

struct LevelReport {
  int level = 0;
  double max_rel_error = 0.0;
  int checked = 0;
  int skipped = 0;
};

struct GradcheckReport {
  /// Ordered [T, ..., 1].
  std::vector<LevelReport> levels;
  std::vector<std::string> warnings;
  double max_rel_error = 0.0;
  double tolerance = kGradcheckTolerance;

  bool passed() const { return max_rel_error <= tolerance; }
};

/// Checks every level of a component-built problem at `points` probe points
/// per level. Points where a component reports a kink are skipped with a warning.
GradcheckReport gradcheck(const Problem& problem, const GradcheckOptions& options);

}  // namespace tscgd
