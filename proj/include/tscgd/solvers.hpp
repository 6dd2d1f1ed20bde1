#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tscgd/core.hpp"
#include "tscgd/geometry.hpp"
#include "tscgd/oracle.hpp"
#include "tscgd/problems.hpp"
#include "tscgd/schedule.hpp"

namespace tscgd {

/// Iterate x_k with trackers [y^(T-1)_k, ..., y^(1)_k].
struct SolverState {
  std::uint64_t k = 1;
  Vector x;
  std::vector<Vector> trackers;

  /// y^(level) for level in 1..T-1.
  const Vector& tracker(int level) const;
  int levels() const noexcept { return static_cast<int>(trackers.size()) + 1; }
};

/// Basic T-SCGD or the accelerated variant; smooth_inner selects the branch
/// that also extrapolates the innermost level.
struct AlgorithmKind {
  enum class Variant { tscgd, atscgd };

  Variant variant = Variant::tscgd;
  bool smooth_inner = false;

  static AlgorithmKind tscgd() { return {Variant::tscgd, false}; }
  static AlgorithmKind atscgd(bool smooth_inner) { return {Variant::atscgd, smooth_inner}; }
  std::string name() const;
};

/// Which iterations a run records.
class RecordGrid {
 public:
  /// 1, 1 + stride, 1 + 2 stride, ...
  static RecordGrid every(std::uint64_t stride);
  /// Roughly `points_per_decade` log-spaced indices per decade.
  static RecordGrid logarithmic(int points_per_decade);

  /// Sorted distinct indices in [1, iterations + 1]; always holds 1 and iterations + 1.
  std::vector<std::uint64_t> indices(std::uint64_t iterations) const;

  std::string describe() const;

 private:
  RecordGrid(bool log, std::uint64_t stride, int per_decade)
      : log_(log), stride_(stride), per_decade_(per_decade) {}

  bool log_;
  std::uint64_t stride_;
  int per_decade_;
};

/// One recorded point of a trajectory. Fields that cannot be computed for a
/// problem hold NaN (distance, objective) or are empty (tracking).
struct RunEntry {
  std::uint64_t k = 0;
  double distance = 0.0;
  double objective = 0.0;
  /// Tracking errors ordered [level T-1, ..., level 1].
  std::vector<double> tracking;
  std::optional<Vector> x;
};

struct RunRecord {
  std::vector<RunEntry> entries;
  Vector final_x;
  /// Mean of the last ceil(n/2) iterates x_2, ..., x_{n+1}.
  Vector averaged_x;
  std::uint64_t steps = 0;
};

/// A step produced a non-finite iterate. Carries the iteration index and, when
/// raised by run(), the record collected so far.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::uint64_t k, const std::string& what);

  std::uint64_t iteration() const noexcept { return k_; }
  const RunRecord* partial() const noexcept { return partial_.get(); }
  void attach(RunRecord record) { partial_ = std::make_shared<RunRecord>(std::move(record)); }

 private:
  std::uint64_t k_;
  std::shared_ptr<RunRecord> partial_;
};

/// (1 - 1/beta) * older + newer / beta. Rejects beta <= 0.
Vector extrapolate(const Vector& older, const Vector& newer, double beta);

SolverState tscgd_step(const SolverState& state, SampleOracle& oracle, const StepSizes& steps,
                       const ConvexSet& set);
SolverState tscgd_step(const SolverState& state, SampleOracle& oracle,
                       const StepSchedule& schedule, const ConvexSet& set);

SolverState atscgd_step(const SolverState& state, SampleOracle& oracle, const StepSizes& steps,
                        const ConvexSet& set, bool smooth_inner);
SolverState atscgd_step(const SolverState& state, SampleOracle& oracle,
                        const StepSchedule& schedule, const ConvexSet& set, bool smooth_inner);

SolverState step(const AlgorithmKind& kind, const SolverState& state, SampleOracle& oracle,
                 const StepSizes& steps, const ConvexSet& set);

enum class TrackerInit {
  /// y^(T-1) = f^(T)_omega(x_1), then each lower tracker from one fresh sample
  /// of the next level at the tracker above it.
  warm,
  zeros,
};

/// Initial state at x_1 = Pi_X(x0) (x0 = 0 by default).
SolverState initial_state(SampleOracle& oracle, const ConvexSet& set, TrackerInit init,
                          const std::optional<Vector>& x0 = std::nullopt);

struct RunOptions {
  std::uint64_t iterations = 1000;
  std::uint64_t seed = 0;
  RecordGrid grid = RecordGrid::every(1);
  TrackerInit init = TrackerInit::warm;
  std::optional<Vector> x0;
  /// Overrides the problem's reference for distance recording.
  std::optional<Vector> reference;
  bool keep_iterates = false;
};

/// Runs `iterations` steps from a fresh oracle seeded with `options.seed`.
/// Deterministic in (kind, problem, schedule, options).
RunRecord run(const AlgorithmKind& kind, const Problem& problem, const StepSchedule& schedule,
              const RunOptions& options);

}  // namespace tscgd
