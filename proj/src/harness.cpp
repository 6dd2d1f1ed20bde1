#include "tscgd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include <fmt/format.h>

namespace tscgd {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Vector averaged_iterate(std::span<const Vector> trajectory, std::size_t n) {
  if (n == 0) throw std::invalid_argument("cannot average an empty trajectory");
  if (n > trajectory.size()) {
    throw std::out_of_range(
        fmt::format("asked to average {} iterates but only {} exist", n, trajectory.size()));
  }
  const std::size_t count = (n + 1) / 2;
  Vector sum = Vector::Zero(trajectory[0].size());
  for (std::size_t i = n - count; i < n; ++i) sum += trajectory[i];
  return sum / static_cast<double>(count);
}

Vector reference_solution(const Problem& problem, const AlgorithmKind& kind,
                          const StepSchedule& schedule, std::uint64_t budget, std::uint64_t seed) {
  if (problem.reference) return *problem.reference;
  if (budget < kMinSampledReferenceBudget) {
    throw std::invalid_argument(fmt::format(
        "reference budget {} is below the minimum of {} iterations", budget,
        kMinSampledReferenceBudget));
  }
  RunOptions options;
  options.iterations = budget;
  options.seed = seed;
  options.grid = RecordGrid::every(budget + 1);
  return run(kind, problem, schedule, options).averaged_x;
}

std::vector<double> tracking_errors(const SolverState& state, const SampleOracle& oracle) {
  const int T = oracle.levels();
  std::vector<double> out;
  out.reserve(state.trackers.size());
  const Vector* above = &state.x;
  for (std::size_t i = 0; i < state.trackers.size(); ++i) {
    const int level = T - 1 - static_cast<int>(i);
    out.push_back((state.trackers[i] - oracle.true_value(level + 1, *above)).norm());
    above = &state.trackers[i];
  }
  return out;
}

// ---------------------------------------------------------------------------

Curve replicate(const Problem& problem, const AlgorithmKind& kind, const StepSchedule& schedule,
                const ReplicateOptions& options) {
  std::vector<std::uint64_t> seeds(options.replications);
  for (std::size_t r = 0; r < seeds.size(); ++r) seeds[r] = options.base_seed + r;
  return replicate_seeds(problem, kind, schedule, seeds, options);
}

Curve replicate_seeds(const Problem& problem, const AlgorithmKind& kind,
                      const StepSchedule& schedule, std::span<const std::uint64_t> seeds_in,
                      const ReplicateOptions& options) {
  if (seeds_in.empty()) throw std::invalid_argument("at least one replication is required");
  std::vector<std::uint64_t> seeds(seeds_in.begin(), seeds_in.end());
  std::sort(seeds.begin(), seeds.end());
  if (std::adjacent_find(seeds.begin(), seeds.end()) != seeds.end()) {
    throw std::invalid_argument("replication seeds must be distinct");
  }

  const std::size_t R = seeds.size();
  std::vector<std::optional<RunRecord>> records(R);
  std::vector<std::exception_ptr> failures(R);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < R; r = next++) {
      RunOptions ro;
      ro.iterations = options.iterations;
      ro.seed = seeds[r];
      ro.grid = options.grid;
      ro.init = options.init;
      ro.reference = options.reference;
      try {
        records[r] = run(kind, problem, schedule, ro);
      } catch (const DivergenceError&) {
        // excluded below
      } catch (...) {
        failures[r] = std::current_exception();
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(R));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  Curve curve;
  curve.replications = R;
  std::vector<const RunRecord*> kept;
  for (std::size_t r = 0; r < R; ++r) {
    if (records[r]) {
      kept.push_back(&*records[r]);
    } else {
      curve.excluded_seeds.push_back(seeds[r]);
    }
  }
  if (static_cast<double>(curve.excluded_seeds.size()) > kMaxExcludedFraction * static_cast<double>(R)) {
    throw ReplicationAbort(fmt::format("{} of {} replications diverged (limit {:.0f}%)",
                                       curve.excluded_seeds.size(), R, 100 * kMaxExcludedFraction));
  }
  if (kept.empty()) throw ReplicationAbort("every replication diverged");

  const std::size_t points = kept.front()->entries.size();
  const double m = static_cast<double>(kept.size());
  for (std::size_t i = 0; i < points; ++i) {
    curve.k.push_back(kept.front()->entries[i].k);
    double sum = 0.0, obj = 0.0;
    for (const RunRecord* rec : kept) {
      sum += rec->entries[i].distance;
      obj += rec->entries[i].objective;
    }
    const double mean = sum / m;
    double sq = 0.0;
    for (const RunRecord* rec : kept) {
      const double dlt = rec->entries[i].distance - mean;
      sq += dlt * dlt;
    }
    curve.mean_dist.push_back(mean);
    curve.std_dist.push_back(kept.size() > 1 ? std::sqrt(sq / (m - 1.0)) : 0.0);
    curve.mean_objective.push_back(obj / m);

    const std::size_t levels = kept.front()->entries[i].tracking.size();
    std::vector<double> tracking(levels, 0.0);
    for (const RunRecord* rec : kept) {
      for (std::size_t l = 0; l < levels; ++l) tracking[l] += rec->entries[i].tracking[l];
    }
    for (double& t : tracking) t /= m;
    curve.mean_tracking.push_back(std::move(tracking));
  }
  return curve;
}

// ---------------------------------------------------------------------------

RateFit fit_rate(std::span<const std::uint64_t> k, std::span<const double> values,
                 double window_fraction) {
  if (k.size() != values.size()) {
    throw std::invalid_argument("fit_rate: k and values differ in length");
  }
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw std::invalid_argument(
        fmt::format("window fraction {} outside (0, 1]", window_fraction));
  }
  if (k.empty()) throw std::invalid_argument("fit_rate: empty curve");
  const std::uint64_t k_max = *std::max_element(k.begin(), k.end());
  const double cutoff = static_cast<double>(k_max) * (1.0 - window_fraction);

  std::vector<double> lx, ly;
  RateFit fit;
  fit.k_min = k_max;
  fit.k_max = 0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] == 0 || static_cast<double>(k[i]) < cutoff) continue;
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw std::invalid_argument(
          fmt::format("fit_rate: value {} at k = {} is not positive and finite", values[i], k[i]));
    }
    lx.push_back(std::log(static_cast<double>(k[i])));
    ly.push_back(std::log(values[i]));
    fit.k_min = std::min(fit.k_min, k[i]);
    fit.k_max = std::max(fit.k_max, k[i]);
  }
  if (lx.size() < 5) {
    throw std::invalid_argument(
        fmt::format("fit_rate: only {} points in the window, need at least 5", lx.size()));
  }
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: all k in the window are equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    rss += r * r;
  }
  fit.residual_rms = std::sqrt(rss / n);
  fit.points = lx.size();
  return fit;
}

// ---------------------------------------------------------------------------

namespace {
std::string cell(double v) {
  if (!std::isfinite(v)) return {};
  return fmt::format("{:.17g}", v);
}
}  // namespace

void write_curve_csv(std::ostream& out, const Curve& curve, int levels) {
  out << "k,mean_dist,std_dist,mean_objective";
  for (int j = 1; j <= levels - 1; ++j) out << ",track_err_" << j;
  out << '\n';
  for (std::size_t i = 0; i < curve.k.size(); ++i) {
    out << curve.k[i] << ',' << cell(curve.mean_dist[i]) << ',' << cell(curve.std_dist[i]) << ','
        << cell(curve.mean_objective[i]);
    const auto& tr = i < curve.mean_tracking.size() ? curve.mean_tracking[i] : std::vector<double>{};
    for (int j = 1; j <= levels - 1; ++j) {
      // tracking is ordered [T-1, ..., 1]
      const std::size_t idx = static_cast<std::size_t>(levels - 1 - j);
      out << ',';
      if (idx < tr.size()) out << cell(tr[idx]);
    }
    out << '\n';
  }
}

}  // namespace tscgd
