#include "tscgd/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "tscgd/harness.hpp"

namespace tscgd {

const Vector& SolverState::tracker(int level) const {
  const int T = levels();
  if (level < 1 || level > T - 1) {
    throw std::out_of_range(fmt::format("tracker level {} outside 1..{}", level, T - 1));
  }
  return trackers[static_cast<std::size_t>(T - 1 - level)];
}

std::string AlgorithmKind::name() const {
  if (variant == Variant::tscgd) return "tscgd";
  return smooth_inner ? "atscgd(smooth)" : "atscgd";
}

DivergenceError::DivergenceError(std::uint64_t k, const std::string& what)
    : std::runtime_error(what), k_(k) {}

// ---------------------------------------------------------------------------

RecordGrid RecordGrid::every(std::uint64_t stride) {
  if (stride == 0) throw std::invalid_argument("record stride must be >= 1");
  return RecordGrid(false, stride, 0);
}

RecordGrid RecordGrid::logarithmic(int points_per_decade) {
  if (points_per_decade < 1) throw std::invalid_argument("points per decade must be >= 1");
  return RecordGrid(true, 0, points_per_decade);
}

std::vector<std::uint64_t> RecordGrid::indices(std::uint64_t iterations) const {
  const std::uint64_t last = iterations + 1;
  std::vector<std::uint64_t> out;
  if (!log_) {
    for (std::uint64_t k = 1; k <= last; k += stride_) out.push_back(k);
  } else {
    for (int i = 0;; ++i) {
      const double k = std::round(std::pow(10.0, static_cast<double>(i) / per_decade_));
      if (k > static_cast<double>(last)) break;
      const auto idx = static_cast<std::uint64_t>(k);
      if (out.empty() || out.back() != idx) out.push_back(idx);
    }
  }
  if (out.back() != last) out.push_back(last);
  return out;
}

std::string RecordGrid::describe() const {
  if (log_) return fmt::format("log({} per decade)", per_decade_);
  return fmt::format("every {}", stride_);
}

// ---------------------------------------------------------------------------

Vector extrapolate(const Vector& older, const Vector& newer, double beta) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument(fmt::format("extrapolation needs beta > 0, got {}", beta));
  }
  if (older.size() != newer.size()) {
    throw DimensionError(fmt::format("extrapolate: dims {} and {} differ", older.size(), newer.size()));
  }
  if (beta == 1.0) return newer;
  return (1.0 - 1.0 / beta) * older + newer / beta;
}

namespace {

void check_steps(const SolverState& state, const StepSizes& steps) {
  if (steps.betas.size() != state.trackers.size()) {
    throw DimensionError(fmt::format("got {} beta stepsizes for {} trackers", steps.betas.size(),
                                     state.trackers.size()));
  }
  if (!(steps.alpha >= 0.0)) throw std::invalid_argument("alpha stepsize must be >= 0");
  for (double b : steps.betas) {
    if (!(b >= 0.0) || !std::isfinite(b)) {
      throw std::invalid_argument(fmt::format("beta stepsize {} is not a finite value >= 0", b));
    }
  }
}

// Weighted average that tolerates beta = 0 (tracker frozen) and, for
// unclamped schedules, beta > 1 (an affine rather than convex combination).
Vector blend(const Vector& previous, const Vector& sample, double beta) {
  if (beta == 0.0 || beta > 1.0) {
    if (previous.size() != sample.size()) {
      throw DimensionError("tracker and sample dimensions differ");
    }
    if (beta == 0.0) return previous;
    return (1.0 - beta) * previous + beta * sample;
  }
  return convex_update(previous, sample, beta);
}

void guard_finite(const SolverState& next, std::uint64_t k) {
  bool ok = all_finite(next.x);
  for (const Vector& y : next.trackers) ok = ok && all_finite(y);
  if (!ok) {
    throw DivergenceError(k, fmt::format("non-finite iterate produced at iteration {}", k));
  }
}

Vector main_update(const SolverState& state, SampleOracle& oracle, double alpha,
                   const ConvexSet& set) {
  const GradientSample sample = oracle.query_gradients(state.x, state.trackers);
  const Vector direction = chain_product(sample.jacobians);
  return project(set, state.x - alpha * direction);
}

}  // namespace

SolverState tscgd_step(const SolverState& state, SampleOracle& oracle, const StepSizes& steps,
                       const ConvexSet& set) {
  check_steps(state, steps);
  const int T = oracle.levels();
  SolverState next;
  next.k = state.k + 1;
  next.x = main_update(state, oracle, steps.alpha, set);
  next.trackers.resize(state.trackers.size());
  if (T >= 2) {
    // Level T-1 samples f^(T) at the current iterate x_k.
    const ValueSample top = oracle.query_value(T, state.x);
    next.trackers[0] = blend(state.trackers[0], top.value, steps.betas[0]);
    for (std::size_t i = 1; i < state.trackers.size(); ++i) {
      const int level = T - 1 - static_cast<int>(i);
      const ValueSample s = oracle.query_value(level + 1, next.trackers[i - 1]);
      next.trackers[i] = blend(state.trackers[i], s.value, steps.betas[i]);
    }
  }
  guard_finite(next, state.k);
  return next;
}

SolverState tscgd_step(const SolverState& state, SampleOracle& oracle,
                       const StepSchedule& schedule, const ConvexSet& set) {
  return tscgd_step(state, oracle, schedule.at(state.k), set);
}

SolverState atscgd_step(const SolverState& state, SampleOracle& oracle, const StepSizes& steps,
                        const ConvexSet& set, bool smooth_inner) {
  const int T = oracle.levels();
  if (T < 2) throw std::invalid_argument("the accelerated method needs T >= 2");
  check_steps(state, steps);
  SolverState next;
  next.k = state.k + 1;
  next.x = main_update(state, oracle, steps.alpha, set);
  next.trackers.resize(state.trackers.size());

  const Vector top_point =
      smooth_inner ? extrapolate(state.x, next.x, steps.betas[0]) : next.x;
  const ValueSample top = oracle.query_value(T, top_point);
  next.trackers[0] = blend(state.trackers[0], top.value, steps.betas[0]);

  for (std::size_t i = 1; i < state.trackers.size(); ++i) {
    const int level = T - 1 - static_cast<int>(i);
    const Vector point = extrapolate(state.trackers[i - 1], next.trackers[i - 1], steps.betas[i]);
    const ValueSample s = oracle.query_value(level + 1, point);
    next.trackers[i] = blend(state.trackers[i], s.value, steps.betas[i]);
  }
  guard_finite(next, state.k);
  return next;
}

SolverState atscgd_step(const SolverState& state, SampleOracle& oracle,
                        const StepSchedule& schedule, const ConvexSet& set, bool smooth_inner) {
  return atscgd_step(state, oracle, schedule.at(state.k), set, smooth_inner);
}

SolverState step(const AlgorithmKind& kind, const SolverState& state, SampleOracle& oracle,
                 const StepSizes& steps, const ConvexSet& set) {
  if (kind.variant == AlgorithmKind::Variant::tscgd) return tscgd_step(state, oracle, steps, set);
  return atscgd_step(state, oracle, steps, set, kind.smooth_inner);
}

SolverState initial_state(SampleOracle& oracle, const ConvexSet& set, TrackerInit init,
                          const std::optional<Vector>& x0) {
  const LevelDims& dims = oracle.dims();
  const int T = dims.levels();
  SolverState state;
  state.k = 1;
  if (x0) {
    if (x0->size() != dims.decision_dim()) {
      throw DimensionError(fmt::format("initial point has dim {}, expected {}", x0->size(),
                                       dims.decision_dim()));
    }
    state.x = project(set, *x0);
  } else {
    state.x = project(set, Vector::Zero(dims.decision_dim()));
  }
  for (int j = T - 1; j >= 1; --j) {
    if (init == TrackerInit::zeros) {
      state.trackers.push_back(Vector::Zero(dims.dim(j)));
    } else {
      const Vector& above = state.trackers.empty() ? state.x : state.trackers.back();
      state.trackers.push_back(oracle.query_value(j + 1, above).value);
    }
  }
  return state;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double objective_estimate(const Problem& problem, const SampleOracle& oracle,
                          const SolverState& state) {
  if (problem.objective) return problem.objective(state.x);
  if (!oracle.has_true_value(1)) return kNaN;
  const Vector& point = state.trackers.empty() ? state.x : state.trackers.back();
  return oracle.true_value(1, point)[0];
}

}  // namespace

RunRecord run(const AlgorithmKind& kind, const Problem& problem, const StepSchedule& schedule,
              const RunOptions& options) {
  if (options.iterations < 1) throw std::invalid_argument("run needs at least one iteration");
  if (schedule.levels() != problem.dims.levels()) {
    throw std::invalid_argument(fmt::format("schedule is for T = {} but the problem has T = {}",
                                            schedule.levels(), problem.dims.levels()));
  }
  if (kind.variant == AlgorithmKind::Variant::atscgd && problem.dims.levels() < 2) {
    throw std::invalid_argument("the accelerated method needs T >= 2");
  }
  const std::optional<Vector>& reference = options.reference ? options.reference : problem.reference;
  if (reference && reference->size() != problem.dims.decision_dim()) {
    throw DimensionError("reference point has the wrong dimension");
  }

  std::unique_ptr<SampleOracle> oracle = problem.make_oracle(options.seed);
  const bool analytic = oracle->analytic();
  const std::vector<std::uint64_t> grid = options.grid.indices(options.iterations);

  RunRecord record;
  record.entries.reserve(grid.size());
  auto grid_it = grid.begin();

  auto maybe_record = [&](const SolverState& s) {
    if (grid_it == grid.end() || *grid_it != s.k) return;
    ++grid_it;
    RunEntry entry;
    entry.k = s.k;
    entry.distance = reference ? (s.x - *reference).norm() : kNaN;
    entry.objective = objective_estimate(problem, *oracle, s);
    if (analytic) entry.tracking = tracking_errors(s, *oracle);
    if (options.keep_iterates) entry.x = s.x;
    record.entries.push_back(std::move(entry));
  };

  SolverState state = initial_state(*oracle, problem.feasible_set, options.init, options.x0);
  maybe_record(state);

  const std::uint64_t n = options.iterations;
  const std::uint64_t averaged = (n + 1) / 2;
  Vector running_sum = Vector::Zero(state.x.size());
  try {
    for (std::uint64_t s = 1; s <= n; ++s) {
      state = step(kind, state, *oracle, schedule.at(state.k), problem.feasible_set);
      record.steps = s;
      if (s > n - averaged) running_sum += state.x;
      maybe_record(state);
    }
  } catch (DivergenceError& e) {
    record.final_x = state.x;
    e.attach(std::move(record));
    throw;
  }
  record.final_x = state.x;
  record.averaged_x = running_sum / static_cast<double>(averaged);
  return record;
}

}  // namespace tscgd
