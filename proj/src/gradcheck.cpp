#include "tscgd/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "tscgd/errors.hpp"

namespace tscgd {

Jacobian finite_difference_jacobian(const Component& component, const Vector& point,
                                    const Draw& omega, double rel_step) {
  if (!(rel_step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  Jacobian fd(component.in_dim(), component.out_dim());
  Vector probe = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(point[i]));
    probe[i] = point[i] + h;
    const Vector up = component.value(probe, omega);
    probe[i] = point[i] - h;
    const Vector down = component.value(probe, omega);
    probe[i] = point[i];
    fd.row(i) = ((up - down) / (2.0 * h)).transpose();
  }
  return fd;
}

JacobianCheck check_jacobian(const Component& component, const Vector& point, const Draw& omega,
                             double rel_step) {
  if (point.size() != component.in_dim()) {
    throw DimensionError(fmt::format("gradcheck point has dim {}, component expects {}",
                                     point.size(), component.in_dim()));
  }
  double widest = 0.0;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    widest = std::max(widest, rel_step * std::max(1.0, std::abs(point[i])));
  }
  if (auto reason = component.fd_exclusion(point, omega, widest)) {
    return {std::nullopt, *reason};
  }
  const Jacobian analytic = component.jacobian(point, omega);
  const Jacobian fd = finite_difference_jacobian(component, point, omega, rel_step);
  const double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
  return {(analytic - fd).cwiseAbs().maxCoeff() / scale, {}};
}

GradcheckReport gradcheck(const Problem& problem, const GradcheckOptions& options) {
  if (options.points < 1) throw std::invalid_argument("gradcheck needs at least one point");
  const std::unique_ptr<SampleOracle> oracle = problem.make_oracle(options.seed);
  const auto* components = dynamic_cast<const ComponentOracle*>(oracle.get());
  if (!components) {
    throw UnsupportedError(fmt::format("problem '{}' does not expose its components", problem.name));
  }
  GradcheckReport report;
  report.tolerance = options.tolerance;
  const int T = problem.dims.levels();
  for (int level = T; level >= 1; --level) {
    const Component& c = components->component(level);
    LevelReport lr;
    lr.level = level;
    Rng rng(options.seed, kAuxStreamBase + 16 + static_cast<std::uint64_t>(level));
    for (int p = 0; p < options.points; ++p) {
      const Vector point = c.probe_point(rng);
      const Draw omega = c.draw(rng);
      const JacobianCheck check = check_jacobian(c, point, omega, options.rel_step);
      if (!check.rel_error) {
        ++lr.skipped;
        report.warnings.push_back(
            fmt::format("level {} point {} skipped: {}", level, p, check.skip_reason));
        continue;
      }
      ++lr.checked;
      lr.max_rel_error = std::max(lr.max_rel_error, *check.rel_error);
    }
    report.max_rel_error = std::max(report.max_rel_error, lr.max_rel_error);
    report.levels.push_back(lr);
  }
  return report;
}

}  // namespace tscgd
