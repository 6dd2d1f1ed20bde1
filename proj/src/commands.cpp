#include "tscgd/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tscgd/errors.hpp"
#include "tscgd/gradcheck.hpp"
#include "tscgd/harness.hpp"

namespace tscgd {

namespace {

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
    if (c == '"') c = '\'';
  }
  return s;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message,
                  const std::string& key = {}) {
  err << "error kind=" << kind;
  if (!key.empty()) err << " key=" << key;
  err << " message=\"" << one_line(message) << "\"\n";
}

std::string num(double v) { return std::isfinite(v) ? fmt::format("{:.17g}", v) : "nan"; }

void write_meta(std::ostream& meta, const RunConfig& config, const Problem& problem,
                const StepSchedule& schedule, const AlgorithmKind& kind, const Curve& curve,
                const std::optional<RateFit>& fit, const std::string& fit_error) {
  const nlohmann::json resolved = config.to_json();
  meta << "config=" << resolved.dump() << '\n';
  for (const auto& [key, value] : resolved.items()) meta << "config." << key << '=' << value.dump() << '\n';
  meta << "problem_name=" << problem.name << '\n';
  meta << "algorithm=" << kind.name() << '\n';
  meta << "schedule=" << schedule.name() << '\n';
  meta << "exponent_a=" << schedule.a().str() << '\n';
  for (int j = schedule.levels() - 1; j >= 1; --j) {
    meta << "exponent_b_" << j << '=' << schedule.b_of(j).str() << '\n';
  }
  meta << "alpha_multiplier=" << num(schedule.alpha_multiplier()) << '\n';
  for (int j = schedule.levels() - 1; j >= 1; --j) {
    meta << "beta_multiplier_" << j << '='
         << num(schedule.beta_multipliers()[static_cast<std::size_t>(schedule.levels() - 1 - j)]) << '\n';
  }
  meta << "clamp_beta=" << (schedule.clamp_beta() ? "true" : "false") << '\n';
  meta << "grid=" << build_grid(config).describe() << '\n';
  std::string seeds;
  for (std::size_t r = 0; r < config.reps; ++r) seeds += (r ? "," : "") + std::to_string(config.seed + r);
  meta << "replication_seeds=" << seeds << '\n';
  meta << "reference_seed=" << resolved_reference_seed(config) << '\n';
  meta << "replications=" << curve.replications << '\n';
  std::string excluded;
  for (std::size_t i = 0; i < curve.excluded_seeds.size(); ++i) {
    excluded += (i ? "," : "") + std::to_string(curve.excluded_seeds[i]);
  }
  meta << "excluded_seeds=" << excluded << '\n';
  meta << "samples_per_query=1\n";
  for (const auto& [key, value] : problem.notes) meta << "note." << key << '=' << value << '\n';
  if (fit) {
    meta << "slope=" << num(fit->slope) << '\n';
    meta << "slope_squared_distance=" << num(2.0 * fit->slope) << '\n';
    meta << "intercept=" << num(fit->intercept) << '\n';
    meta << "fit_k_min=" << fit->k_min << '\n';
    meta << "fit_k_max=" << fit->k_max << '\n';
    meta << "fit_points=" << fit->points << '\n';
    meta << "fit_residual_rms=" << num(fit->residual_rms) << '\n';
  } else {
    meta << "slope=nan\n";
    meta << "fit_error=" << one_line(fit_error) << '\n';
  }
  meta << "final_mean_dist=" << num(curve.mean_dist.empty() ? NAN : curve.mean_dist.back()) << '\n';
}

}  // namespace

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const Problem problem = build_problem(config);
    const AlgorithmKind kind = build_algorithm(config);
    const StepSchedule schedule = build_schedule(config, problem);

    if (problem.sampled_data && !problem.reference &&
        config.reference_budget < kMinSampledReferenceBudget) {
      throw ConfigError("reference_budget",
                        fmt::format("reference_budget must be at least {} for sampled-data problems",
                                    kMinSampledReferenceBudget));
    }
    const Vector reference = reference_solution(problem, kind, schedule, config.reference_budget,
                                                resolved_reference_seed(config));

    ReplicateOptions ro;
    ro.iterations = config.iters;
    ro.replications = config.reps;
    ro.base_seed = config.seed;
    ro.grid = build_grid(config);
    ro.init = build_init(config);
    ro.reference = reference;
    ro.threads = config.threads;
    const Curve curve = replicate(problem, kind, schedule, ro);

    std::optional<RateFit> fit;
    std::string fit_error;
    try {
      fit = fit_rate(curve.k, curve.mean_dist, config.window_fraction);
    } catch (const std::invalid_argument& e) {
      fit_error = e.what();
    }

    const std::filesystem::path dir(config.out);
    std::filesystem::create_directories(dir);
    {
      std::ofstream csv(dir / "curve.csv", std::ios::binary);
      write_curve_csv(csv, curve, problem.dims.levels());
      if (!csv) throw std::runtime_error(fmt::format("cannot write {}", (dir / "curve.csv").string()));
    }
    {
      std::ofstream meta(dir / "meta.txt", std::ios::binary);
      write_meta(meta, config, problem, schedule, kind, curve, fit, fit_error);
      if (!meta) throw std::runtime_error(fmt::format("cannot write {}", (dir / "meta.txt").string()));
    }

    out << "slope=" << (fit ? num(fit->slope) : "nan") << '\n';
    out << "final_mean_dist=" << num(curve.mean_dist.back()) << '\n';
    if (!curve.excluded_seeds.empty()) {
      out << "excluded_replications=" << curve.excluded_seeds.size() << '\n';
    }
    if (!fit) err << "warning kind=fit message=\"" << one_line(fit_error) << "\"\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    report_error(err, "config", e.what(), e.key());
    return kExitConfig;
  } catch (const ReplicationAbort& e) {
    report_error(err, "divergence", e.what());
    return kExitDivergence;
  } catch (const DivergenceError& e) {
    report_error(err, "divergence", e.what());
    return kExitDivergence;
  } catch (const std::exception& e) {
    report_error(err, "runtime", e.what());
    return kExitFailure;
  }
}

int cmd_presets(int max_levels, std::ostream& out, std::ostream& err) {
  if (max_levels < 1 || max_levels > 6) {
    report_error(err, "config", fmt::format("max-T must lie in 1..6, got {}", max_levels), "max-T");
    return kExitConfig;
  }
  auto decimal = [](const Rational& r) { return fmt::format("{} ({:.6g})", r.str(), r.value()); };
  for (auto name : kPresetNames) {
    const int first = name == "basic" ? 1 : 2;
    for (int T = first; T <= max_levels; ++T) {
      const StepSchedule s = preset_by_name(name, T, 1.0);
      std::string bs;
      for (int j = T - 1; j >= 1; --j) bs += (j == T - 1 ? "" : ", ") + decimal(s.b_of(j));
      std::string mults;
      for (std::size_t i = 0; i < s.beta_multipliers().size(); ++i) {
        mults += (i ? ", " : "") + fmt::format("{:g}", s.beta_multipliers()[i]);
      }
      const bool sc = name == "sc" || name == "sc-smooth";
      out << "preset=" << name << " T=" << T << " a=" << decimal(s.a()) << " b=[" << bs << "]"
          << " alpha_multiplier=" << (sc ? std::string("1/lambda") : fmt::format("{:g}", s.alpha_multiplier()))
          << " beta_multipliers=[" << mults << "]\n";
    }
  }
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const Problem problem = build_problem(config);
    GradcheckOptions options;
    options.points = config.points;
    options.seed = config.seed;
    const GradcheckReport report = gradcheck(problem, options);
    for (const auto& w : report.warnings) err << "warning kind=gradcheck message=\"" << one_line(w) << "\"\n";
    for (const auto& l : report.levels) {
      out << "level=" << l.level << " checked=" << l.checked << " skipped=" << l.skipped
          << " max_rel_error=" << fmt::format("{:.3e}", l.max_rel_error) << '\n';
    }
    out << "max_rel_error=" << fmt::format("{:.3e}", report.max_rel_error)
        << " tolerance=" << fmt::format("{:g}", report.tolerance)
        << " status=" << (report.passed() ? "PASS" : "FAIL") << '\n';
    if (!report.passed()) {
      report_error(err, "gradcheck",
                   fmt::format("max relative error {:.3e} exceeds {:g}", report.max_rel_error,
                               report.tolerance));
      return kExitGradcheck;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    report_error(err, "config", e.what(), e.key());
    return kExitConfig;
  } catch (const std::exception& e) {
    report_error(err, "runtime", e.what());
    return kExitFailure;
  }
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"stochastic compositional gradient methods"};
  app.require_subcommand(1);

  std::string run_config;
  std::optional<std::uint64_t> seed, iters;
  std::optional<std::size_t> reps;
  std::optional<std::string> out_dir;
  std::optional<double> rate;
  auto* run = app.add_subcommand("run", "replicate a configured experiment");
  run->add_option("--config", run_config, "JSON config file")->required();
  run->add_option("--seed", seed, "base seed");
  run->add_option("--reps", reps, "replications");
  run->add_option("--iters", iters, "iterations per replication");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--rate", rate, "rate-fit window fraction in (0, 1]");

  int max_levels = 6;
  auto* presets = app.add_subcommand("presets", "print stepsize exponents");
  presets->add_option("--max-T", max_levels, "largest T");

  std::string gc_config;
  std::optional<int> points;
  std::optional<std::uint64_t> gc_seed;
  auto* grad = app.add_subcommand("gradcheck", "compare sampled Jacobians with finite differences");
  grad->add_option("--config", gc_config, "JSON config file")->required();
  grad->add_option("--points", points, "probe points per level");
  grad->add_option("--seed", gc_seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return kExitConfig;
  }

  try {
    if (*run) {
      RunConfig c = load_config(run_config);
      if (seed) c.seed = *seed;
      if (reps) c.reps = *reps;
      if (iters) c.iters = *iters;
      if (out_dir) c.out = *out_dir;
      if (rate) c.window_fraction = *rate;
      if (c.reps < 1) throw ConfigError("reps", "key 'reps': must be >= 1");
      if (c.iters < 1) throw ConfigError("iters", "key 'iters': must be >= 1");
      c.validate();
      return cmd_run(c, out, err);
    }
    if (*presets) return cmd_presets(max_levels, out, err);
    RunConfig c = load_config(gc_config);
    if (points) {
      if (*points < 1) throw ConfigError("points", "key 'points': must be >= 1");
      c.points = *points;
    }
    if (gc_seed) c.seed = *gc_seed;
    return cmd_gradcheck(c, out, err);
  } catch (const ConfigError& e) {
    report_error(err, "config", e.what(), e.key());
    return kExitConfig;
  } catch (const std::exception& e) {
    report_error(err, "runtime", e.what());
    return kExitFailure;
  }
}

}  // namespace tscgd
