#include "tscgd/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "tscgd/errors.hpp"

namespace tscgd {

using nlohmann::json;

namespace {

constexpr std::uint64_t kReferenceSeedOffset = 0x9E3779B97F4A7C15ull;

const std::set<std::string> kKnownKeys = {
    "problem",   "T",          "d",
    "sigma",     "matrix",     "ramp_min",
    "b",         "lambda",
    "p",         "epsilon",    "setup",
    "beta_star_seed", "noise_std", "set",
    "lower",     "upper",      "center",
    "radius",
    "algorithm", "smooth",     "preset",
    "exponent_a", "exponent_b", "alpha_multiplier",
    "beta_multipliers", "sc_lambda", "alpha_scale",
    "clamp_beta", "iters",     "reps",
    "seed",      "stride",     "points_per_decade",
    "out",       "reference_budget", "reference_seed",
    "window_fraction", "init", "threads",
    "points"};

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ConfigError(key, fmt::format("key '{}': {}", key, what));
}

template <class T>
T get(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    bad(key, e.what());
  }
}

double get_number(const json& j, const std::string& key) {
  if (!j.at(key).is_number()) bad(key, "expected a number");
  return j.at(key).get<double>();
}

std::uint64_t get_count(const json& j, const std::string& key, std::uint64_t min) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    bad(key, "expected a non-negative integer");
  }
  const auto n = v.get<std::uint64_t>();
  if (n < min) bad(key, fmt::format("must be >= {}", min));
  return n;
}

Rational get_rational(const json& v, const std::string& key) {
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  if (v.is_number()) return Rational::approximate(v.get<double>());
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return Rational(std::stoll(s));
      return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::exception&) {
      bad(key, fmt::format("cannot read '{}' as a rational", s));
    }
  }
  bad(key, "expected a number or a string like \"3/4\"");
}

Vector get_vector(const json& v, const std::string& key) {
  if (!v.is_array()) bad(key, "expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) bad(key, "expected an array of numbers");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

// Scalar broadcasts to every coordinate.
Vector get_point(const json& v, const std::string& key, int d) {
  if (v.is_number()) return Vector::Constant(d, v.get<double>());
  Vector p = get_vector(v, key);
  if (p.size() != d) bad(key, fmt::format("expected {} entries, got {}", d, p.size()));
  return p;
}

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw ConfigError("config", "config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kKnownKeys.count(key)) bad(key, "unknown key");
  }
  if (!j.contains("problem")) throw ConfigError("problem", "missing required key 'problem'");

  RunConfig c;
  c.problem = get<std::string>(j, "problem");
  if (j.contains("T")) c.levels = static_cast<int>(get_count(j, "T", 1));
  if (j.contains("d")) c.d = static_cast<int>(get_count(j, "d", 1));
  if (j.contains("sigma")) c.sigma = get_number(j, "sigma");
  if (j.contains("matrix")) {
    const json& m = j.at("matrix");
    if (m.is_string()) {
      c.matrix = m.get<std::string>();
    } else if (m.is_array()) {
      const std::size_t rows = m.size();
      if (rows == 0 || !m[0].is_array()) bad("matrix", "expected a non-empty array of rows");
      Eigen::MatrixXd A(rows, m[0].size());
      for (std::size_t r = 0; r < rows; ++r) {
        const Vector row = get_vector(m[r], "matrix");
        if (row.size() != A.cols()) bad("matrix", "rows have different lengths");
        A.row(static_cast<Eigen::Index>(r)) = row.transpose();
      }
      c.A = A;
      c.matrix = "explicit";
    } else {
      bad("matrix", "expected \"ramp\", \"identity\" or an array of rows");
    }
  }
  if (j.contains("ramp_min")) c.ramp_min = get_number(j, "ramp_min");
  if (j.contains("b")) {
    const json& b = j.at("b");
    if (b.is_number()) {
      c.b = Vector::Constant(1, b.get<double>());  // broadcast in build_problem
    } else {
      c.b = get_vector(b, "b");
    }
  }
  if (j.contains("lambda")) c.risk.lambda = get_number(j, "lambda");
  if (j.contains("p")) c.risk.p = static_cast<int>(get_count(j, "p", 1));
  if (j.contains("epsilon")) c.risk.epsilon = get_number(j, "epsilon");
  if (j.contains("setup")) c.risk.setup = static_cast<int>(get_count(j, "setup", 1));
  if (j.contains("beta_star_seed")) c.risk.beta_star_seed = get_count(j, "beta_star_seed", 0);
  if (j.contains("noise_std")) c.risk.noise_std = get_number(j, "noise_std");
  if (j.contains("set")) c.set = j.at("set");
  // Flat form: "set": "box" or "ball" with the bounds as sibling keys.
  for (const char* key : {"lower", "upper", "center", "radius"}) {
    if (!j.contains(key)) continue;
    if (!c.set.is_string() || c.set.get<std::string>() == "rn") {
      bad(key, "only valid next to \"set\": \"box\" or \"ball\"");
    }
  }
  if (c.set.is_string() && c.set.get<std::string>() != "rn") {
    json obj{{"type", c.set.get<std::string>()}};
    for (const char* key : {"lower", "upper", "center", "radius"}) {
      if (j.contains(key)) obj[key] = j.at(key);
    }
    c.set = obj;
  }

  if (j.contains("algorithm")) c.algorithm = get<std::string>(j, "algorithm");
  if (j.contains("smooth")) c.smooth = get<bool>(j, "smooth");
  if (j.contains("preset")) c.preset = get<std::string>(j, "preset");
  if (j.contains("exponent_a")) c.exponent_a = get_rational(j.at("exponent_a"), "exponent_a");
  if (j.contains("exponent_b")) {
    const json& v = j.at("exponent_b");
    if (!v.is_array()) bad("exponent_b", "expected an array ordered [b_{T-1}, ..., b_1]");
    for (const json& e : v) c.exponent_b.push_back(get_rational(e, "exponent_b"));
  }
  if (j.contains("alpha_multiplier")) c.alpha_multiplier = get_number(j, "alpha_multiplier");
  if (j.contains("beta_multipliers")) {
    const Vector m = get_vector(j.at("beta_multipliers"), "beta_multipliers");
    c.beta_multipliers.assign(m.data(), m.data() + m.size());
  }
  if (j.contains("sc_lambda")) c.sc_lambda = get_number(j, "sc_lambda");
  if (j.contains("alpha_scale")) c.alpha_scale = get_number(j, "alpha_scale");
  if (j.contains("clamp_beta")) c.clamp_beta = get<bool>(j, "clamp_beta");

  if (j.contains("iters")) c.iters = get_count(j, "iters", 1);
  if (j.contains("reps")) c.reps = get_count(j, "reps", 1);
  if (j.contains("seed")) c.seed = get_count(j, "seed", 0);
  if (j.contains("stride")) {
    const json& s = j.at("stride");
    if (s.is_string()) {
      if (s.get<std::string>() != "log") bad("stride", "expected \"log\" or a positive integer");
      c.stride = 0;
    } else {
      c.stride = get_count(j, "stride", 1);
    }
  }
  if (j.contains("points_per_decade")) {
    c.points_per_decade = static_cast<int>(get_count(j, "points_per_decade", 1));
  }
  if (j.contains("out")) c.out = get<std::string>(j, "out");
  if (j.contains("reference_budget")) c.reference_budget = get_count(j, "reference_budget", 1);
  if (j.contains("reference_seed")) c.reference_seed = get_count(j, "reference_seed", 0);
  if (j.contains("window_fraction")) c.window_fraction = get_number(j, "window_fraction");
  if (j.contains("init")) c.init = get<std::string>(j, "init");
  if (j.contains("threads")) c.threads = static_cast<unsigned>(get_count(j, "threads", 0));
  if (j.contains("points")) c.points = static_cast<int>(get_count(j, "points", 1));

  if (c.d == 0) c.d = c.problem == "risk-regression" ? 50 : 20;
  if (c.preset.empty()) {
    if (c.algorithm == "tscgd") {
      c.preset = "basic";
    } else {
      c.preset = c.smooth.value_or(true) ? "accel-smooth" : "accel";
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", fmt::format("cannot open config file '{}'", path));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void RunConfig::validate() const {
  if (problem != "quad-chain" && problem != "risk-regression") {
    bad("problem", fmt::format("unknown problem '{}' (expected quad-chain or risk-regression)", problem));
  }
  if (problem == "quad-chain" && levels != 2 && levels != 3) bad("T", "quad-chain supports T = 2 or 3");
  if (problem == "risk-regression" && levels != 3) bad("T", "risk-regression has T = 3");
  if (!(sigma >= 0.0)) bad("sigma", "must be >= 0");
  if (matrix != "ramp" && matrix != "identity" && matrix != "explicit") {
    bad("matrix", fmt::format("unknown matrix '{}'", matrix));
  }
  if (ramp_min && !(*ramp_min > 0.0)) bad("ramp_min", "must be > 0");
  if (algorithm != "tscgd" && algorithm != "atscgd") {
    bad("algorithm", fmt::format("unknown algorithm '{}' (expected tscgd or atscgd)", algorithm));
  }
  if (preset == "custom") {
    if (!exponent_a) bad("exponent_a", "required for the custom preset");
    if (exponent_b.size() != static_cast<std::size_t>(levels - 1)) {
      bad("exponent_b", fmt::format("expected {} exponents", levels - 1));
    }
    if (!beta_multipliers.empty() && beta_multipliers.size() != exponent_b.size()) {
      bad("beta_multipliers", "must match exponent_b in length");
    }
  } else {
    bool known = false;
    for (auto name : kPresetNames) known = known || name == preset;
    if (!known) bad("preset", fmt::format("unknown preset '{}'", preset));
    if (algorithm == "tscgd" && preset != "basic") {
      bad("preset", "tscgd runs with the basic preset or a custom one");
    }
  }
  if (!(alpha_scale > 0.0)) bad("alpha_scale", "must be > 0");
  if (sc_lambda && !(*sc_lambda > 0.0)) bad("sc_lambda", "must be > 0");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) bad("window_fraction", "must lie in (0, 1]");
  if (init != "warm" && init != "zeros") bad("init", "expected warm or zeros");
  if (problem == "risk-regression") {
    try {
      RiskAverseConfig r = risk;
      r.d = d;
      r.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("problem", fmt::format("risk-regression: {}", e.what()));
    }
  }
  if (set.is_string()) {
    const auto s = set.get<std::string>();
    if (s != "rn") bad("set", "expected \"rn\" or an object with type box/ball");
  } else if (!set.is_object() || !set.contains("type")) {
    bad("set", "expected \"rn\" or an object with type box/ball");
  }
}

json RunConfig::to_json() const {
  json j;
  j["problem"] = problem;
  j["T"] = levels;
  j["d"] = d;
  if (problem == "quad-chain") {
    j["sigma"] = sigma;
    j["matrix"] = matrix;
    if (ramp_min) j["ramp_min"] = *ramp_min;
    if (A) {
      json rows = json::array();
      for (Eigen::Index r = 0; r < A->rows(); ++r) rows.push_back(vec_json(A->row(r).transpose()));
      j["matrix"] = rows;
    }
    if (b) j["b"] = vec_json(*b);
  } else {
    j["lambda"] = risk.lambda;
    j["p"] = risk.p;
    j["epsilon"] = risk.epsilon;
    j["setup"] = risk.setup;
    j["beta_star_seed"] = risk.beta_star_seed;
    j["noise_std"] = risk.noise_std;
  }
  j["set"] = set;
  j["algorithm"] = algorithm;
  if (smooth) j["smooth"] = *smooth;
  j["preset"] = preset;
  if (exponent_a) j["exponent_a"] = exponent_a->str();
  if (!exponent_b.empty()) {
    json bs = json::array();
    for (const auto& r : exponent_b) bs.push_back(r.str());
    j["exponent_b"] = bs;
  }
  if (preset == "custom") {
    j["alpha_multiplier"] = alpha_multiplier;
    if (!beta_multipliers.empty()) j["beta_multipliers"] = beta_multipliers;
  }
  if (sc_lambda) j["sc_lambda"] = *sc_lambda;
  j["alpha_scale"] = alpha_scale;
  j["clamp_beta"] = clamp_beta;
  j["iters"] = iters;
  j["reps"] = reps;
  j["seed"] = seed;
  if (stride == 0) {
    j["stride"] = "log";
  } else {
    j["stride"] = stride;
  }
  j["points_per_decade"] = points_per_decade;
  j["out"] = out;
  j["reference_budget"] = reference_budget;
  j["reference_seed"] = resolved_reference_seed(*this);
  j["window_fraction"] = window_fraction;
  j["init"] = init;
  j["threads"] = threads;
  j["points"] = points;
  return j;
}

// ---------------------------------------------------------------------------

namespace {

ConvexSet build_set(const json& set, int d) {
  if (set.is_string()) return ConvexSet::whole_space();
  const std::string type = set.at("type").is_string() ? set.at("type").get<std::string>() : "";
  try {
    if (type == "rn") return ConvexSet::whole_space();
    if (type == "box") {
      if (!set.contains("lower") || !set.contains("upper")) bad("set", "box needs lower and upper");
      return ConvexSet::box(get_point(set.at("lower"), "set", d), get_point(set.at("upper"), "set", d));
    }
    if (type == "ball") {
      if (!set.contains("radius") || !set.at("radius").is_number()) bad("set", "ball needs a radius");
      const Vector center = set.contains("center") ? get_point(set.at("center"), "set", d)
                                                   : Vector::Zero(d);
      return ConvexSet::ball(center, set.at("radius").get<double>());
    }
  } catch (const std::invalid_argument& e) {
    bad("set", e.what());
  }
  bad("set", fmt::format("unknown set type '{}'", type));
}

}  // namespace

Problem build_problem(const RunConfig& c) {
  try {
    if (c.problem == "risk-regression") {
      RiskAverseConfig r = c.risk;
      r.d = c.d;
      Problem p = risk_averse_regression(r);
      p.feasible_set = build_set(c.set, c.d);
      return p;
    }
    Eigen::MatrixXd A;
    if (c.matrix == "explicit") {
      A = *c.A;
    } else if (c.matrix == "identity") {
      A = Eigen::MatrixXd::Identity(c.d, c.d);
    } else {
      const double lo = c.ramp_min.value_or(1.0 / c.d);
      Vector diag(c.d);
      for (int i = 0; i < c.d; ++i) {
        diag[i] = c.d == 1 ? 1.0 : lo + (1.0 - lo) * i / (c.d - 1);
      }
      A = diag.asDiagonal();
    }
    Vector b;
    if (!c.b) {
      b = Vector::Ones(A.rows());
    } else if (c.b->size() == 1 && A.rows() != 1) {
      b = Vector::Constant(A.rows(), (*c.b)[0]);
    } else {
      b = *c.b;
    }
    return quadratic_chain(c.levels, A, b, c.sigma, build_set(c.set, static_cast<int>(A.cols())));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("problem", fmt::format("cannot build problem: {}", e.what()));
  }
}

AlgorithmKind build_algorithm(const RunConfig& c) {
  if (c.algorithm == "tscgd") return AlgorithmKind::tscgd();
  const bool smooth = c.smooth.value_or(c.preset == "custom" ? true : preset_is_smooth(c.preset));
  return AlgorithmKind::atscgd(smooth);
}

StepSchedule build_schedule(const RunConfig& c, const Problem& problem) {
  try {
    if (c.preset == "custom") {
      std::vector<double> mult = c.beta_multipliers;
      if (mult.empty()) mult.assign(c.exponent_b.size(), 1.0);
      return StepSchedule(c.levels, *c.exponent_a, c.exponent_b, c.alpha_multiplier, mult,
                          c.clamp_beta, "custom")
          .scaled(c.alpha_scale);
    }
    std::optional<double> lambda = c.sc_lambda ? c.sc_lambda : problem.strong_convexity;
    if ((c.preset == "sc" || c.preset == "sc-smooth") && !lambda) {
      bad("sc_lambda", fmt::format("preset '{}' needs a strong-convexity parameter", c.preset));
    }
    return preset_by_name(c.preset, c.levels, lambda).with_clamp(c.clamp_beta).scaled(c.alpha_scale);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("preset", e.what());
  }
}

RecordGrid build_grid(const RunConfig& c) {
  return c.stride == 0 ? RecordGrid::logarithmic(c.points_per_decade) : RecordGrid::every(c.stride);
}

TrackerInit build_init(const RunConfig& c) {
  return c.init == "zeros" ? TrackerInit::zeros : TrackerInit::warm;
}

std::uint64_t resolved_reference_seed(const RunConfig& c) {
  return c.reference_seed.value_or(c.seed + kReferenceSeedOffset);
}

}  // namespace tscgd
