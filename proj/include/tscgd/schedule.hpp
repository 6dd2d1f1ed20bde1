#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tscgd {

/// Exact rational number, kept normalised (den > 0, gcd(num, den) = 1).
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  /// Best rational approximation with denominator <= max_den (continued fractions).
  static Rational approximate(double value, std::int64_t max_den = 1'000'000);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  friend bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(const Rational& a, const Rational& b) {
    return a.num_ * b.den_ < b.num_ * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Stepsizes for one iteration: alpha_k and [beta_{T-1,k}, ..., beta_{1,k}].
struct StepSizes {
  double alpha = 0.0;
  std::vector<double> betas;
};

/// Polynomially decaying stepsizes
///   alpha_k    = alpha_multiplier * k^{-a}
///   beta_{j,k} = min(1, beta_multiplier_j * k^{-b_j})   (clamped by default)
/// Exponent and multiplier lists are ordered from level T-1 down to level 1.
class StepSchedule {
 public:
  StepSchedule(int levels, Rational a, std::vector<Rational> b, double alpha_multiplier,
               std::vector<double> beta_multipliers, bool clamp_beta = true,
               std::string name = "custom");

  int levels() const noexcept { return levels_; }
  const Rational& a() const noexcept { return a_; }
  const std::vector<Rational>& b() const noexcept { return b_; }
  /// b_j for tracker level j in 1..T-1.
  const Rational& b_of(int level) const;
  double alpha_multiplier() const noexcept { return alpha_multiplier_; }
  const std::vector<double>& beta_multipliers() const noexcept { return beta_multipliers_; }
  bool clamp_beta() const noexcept { return clamp_beta_; }
  const std::string& name() const noexcept { return name_; }

  double alpha(std::uint64_t k) const;
  double beta(int level, std::uint64_t k) const;
  StepSizes at(std::uint64_t k) const;

  /// a > b_{T-1} > ... > b_1 > 0, compared exactly.
  bool timescale_separated() const;

  /// Copy with every alpha multiplied by `factor` (and the same for betas).
  StepSchedule scaled(double alpha_factor, double beta_factor = 1.0) const;
  StepSchedule with_clamp(bool clamp) const;

 private:
  int levels_;
  Rational a_;
  std::vector<Rational> b_;
  double alpha_multiplier_;
  std::vector<double> beta_multipliers_;
  bool clamp_beta_;
  std::string name_;
};

/// a = 1 - 1/2^T, b_j = 1 - 1/2^j, unit multipliers.
StepSchedule preset_basic(int levels);

/// Non-smooth inner level: a = (4+T)/(8+T), b_j = (j+3)/(8+T), multiplier 1
/// on level T-1 and 2 below. Smooth inner level: a = (3+T)/(7+T),
/// b_j = (j+3)/(7+T), multiplier 2 on every level.
StepSchedule preset_accelerated(int levels, bool smooth_inner);

/// alpha_k = k^{-1} / lambda. Smooth: b_j = (3+j)/(3+T), multiplier 2
/// everywhere. Non-smooth: b_j = (3+j)/(4+T), multiplier 1 on level T-1 and 2
/// below.
StepSchedule preset_strongly_convex(int levels, bool smooth_inner, double lambda);

/// Preset names understood by the CLI.
inline constexpr std::string_view kPresetNames[] = {"basic", "accel", "accel-smooth", "sc",
                                                    "sc-smooth"};

/// Looks up `basic`, `accel`, `accel-smooth`, `sc`, `sc-smooth`. The strongly
/// convex presets need `lambda`.
StepSchedule preset_by_name(std::string_view name, int levels,
                            std::optional<double> lambda = std::nullopt);

/// Whether the named preset exploits a smooth innermost level.
bool preset_is_smooth(std::string_view name);

}  // namespace tscgd
