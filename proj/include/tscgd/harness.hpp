#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "tscgd/solvers.hpp"

namespace tscgd {

/// Mean of the last ceil(n/2) entries among trajectory[0..n).
Vector averaged_iterate(std::span<const Vector> trajectory, std::size_t n);

/// Sampled-data problems need at least this many iterations for a reference.
inline constexpr std::uint64_t kMinSampledReferenceBudget = 10'000;

/// Stored minimiser when the problem has one; otherwise the averaged iterate
/// of a `budget`-iteration run seeded with `seed`.
Vector reference_solution(const Problem& problem, const AlgorithmKind& kind,
                          const StepSchedule& schedule, std::uint64_t budget, std::uint64_t seed);

/// Across-replication statistics at every recorded iteration.
struct Curve {
  std::vector<std::uint64_t> k;
  std::vector<double> mean_dist;
  std::vector<double> std_dist;
  std::vector<double> mean_objective;
  /// Per point, mean tracking errors ordered [level T-1, ..., level 1]; empty
  /// when the problem is not analytic.
  std::vector<std::vector<double>> mean_tracking;
  std::size_t replications = 0;
  std::vector<std::uint64_t> excluded_seeds;
};

struct ReplicateOptions {
  std::uint64_t iterations = 1000;
  std::size_t replications = 1;
  std::uint64_t base_seed = 0;
  RecordGrid grid = RecordGrid::every(1);
  TrackerInit init = TrackerInit::warm;
  /// Distances are measured to this point, else to the problem's reference.
  std::optional<Vector> reference;
  /// Worker threads; 0 means hardware concurrency.
  unsigned threads = 0;
};

/// More than this fraction of replications diverged.
inline constexpr double kMaxExcludedFraction = 0.2;

class ReplicationAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs replications with seeds base_seed + r, r = 0..R-1.
Curve replicate(const Problem& problem, const AlgorithmKind& kind, const StepSchedule& schedule,
                const ReplicateOptions& options);

/// Same with an explicit seed list. Statistics are reduced in ascending seed
/// order, so the result does not depend on the order of `seeds` or on thread
/// scheduling.
Curve replicate_seeds(const Problem& problem, const AlgorithmKind& kind,
                      const StepSchedule& schedule, std::span<const std::uint64_t> seeds,
                      const ReplicateOptions& options);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::uint64_t k_min = 0;
  std::uint64_t k_max = 0;
  double residual_rms = 0.0;
  std::size_t points = 0;
};

inline constexpr double kDefaultWindowFraction = 0.8;

/// Least squares of log(value) on log(k) over points with
/// k >= k_max * (1 - window_fraction).
RateFit fit_rate(std::span<const std::uint64_t> k, std::span<const double> values,
                 double window_fraction = kDefaultWindowFraction);

/// [||y^(T-1) - f^(T)(x)||, ||y^(T-2) - f^(T-1)(y^(T-1))||, ..., ||y^(1) - f^(2)(y^(2))||]
/// using the oracle's analytic components.
std::vector<double> tracking_errors(const SolverState& state, const SampleOracle& oracle);

/// CSV with header k,mean_dist,std_dist,mean_objective,track_err_1..track_err_{T-1};
/// track_err_j is the level-j tracker. Unavailable values are left blank.
void write_curve_csv(std::ostream& out, const Curve& curve, int levels);

}  // namespace tscgd
