#include "tscgd/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace tscgd {

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

Rational Rational::approximate(double value, std::int64_t max_den) {
  if (!std::isfinite(value)) throw std::invalid_argument("cannot approximate a non-finite value");
  // Convergents h/k of the continued fraction of `value`.
  std::int64_t h_prev = 1, h = static_cast<std::int64_t>(std::floor(value));
  std::int64_t k_prev = 0, k = 1;
  double frac = value - std::floor(value);
  while (frac > 1e-12) {
    const double inv = 1.0 / frac;
    const auto term = static_cast<std::int64_t>(std::floor(inv));
    const std::int64_t k_next = term * k + k_prev;
    if (k_next > max_den) break;
    const std::int64_t h_next = term * h + h_prev;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
    frac = inv - static_cast<double>(term);
  }
  return Rational(h, k);
}

std::string Rational::str() const {
  if (den_ == 1) return fmt::format("{}", num_);
  return fmt::format("{}/{}", num_, den_);
}

// ---------------------------------------------------------------------------

StepSchedule::StepSchedule(int levels, Rational a, std::vector<Rational> b,
                           double alpha_multiplier, std::vector<double> beta_multipliers,
                           bool clamp_beta, std::string name)
    : levels_(levels),
      a_(a),
      b_(std::move(b)),
      alpha_multiplier_(alpha_multiplier),
      beta_multipliers_(std::move(beta_multipliers)),
      clamp_beta_(clamp_beta),
      name_(std::move(name)) {
  if (levels_ < 1) throw std::invalid_argument("schedule needs T >= 1");
  const auto trackers = static_cast<std::size_t>(levels_ - 1);
  if (b_.size() != trackers || beta_multipliers_.size() != trackers) {
    throw std::invalid_argument(fmt::format(
        "schedule for T = {} needs {} beta exponents and multipliers, got {} and {}", levels_,
        trackers, b_.size(), beta_multipliers_.size()));
  }
  if (a_ < Rational(0) || a_ > Rational(1)) {
    throw std::invalid_argument(fmt::format("alpha exponent a = {} outside [0, 1]", a_.str()));
  }
  for (const Rational& e : b_) {
    if (e < Rational(0) || e > Rational(1)) {
      throw std::invalid_argument(fmt::format("beta exponent {} outside [0, 1]", e.str()));
    }
  }
  if (!(alpha_multiplier_ > 0.0) || !std::isfinite(alpha_multiplier_)) {
    throw std::invalid_argument(
        fmt::format("alpha multiplier must be positive, got {}", alpha_multiplier_));
  }
  for (double m : beta_multipliers_) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw std::invalid_argument(fmt::format("beta multiplier must be positive, got {}", m));
    }
  }
}

const Rational& StepSchedule::b_of(int level) const {
  if (level < 1 || level > levels_ - 1) {
    throw std::out_of_range(fmt::format("tracker level {} outside 1..{}", level, levels_ - 1));
  }
  return b_[static_cast<std::size_t>(levels_ - 1 - level)];
}

double StepSchedule::alpha(std::uint64_t k) const {
  if (k == 0) throw std::invalid_argument("iteration index starts at k = 1");
  return alpha_multiplier_ * std::pow(static_cast<double>(k), -a_.value());
}

double StepSchedule::beta(int level, std::uint64_t k) const {
  const Rational& exponent = b_of(level);
  if (k == 0) throw std::invalid_argument("iteration index starts at k = 1");
  const double raw = beta_multipliers_[static_cast<std::size_t>(levels_ - 1 - level)] *
                     std::pow(static_cast<double>(k), -exponent.value());
  return clamp_beta_ ? std::min(1.0, raw) : raw;
}

StepSizes StepSchedule::at(std::uint64_t k) const {
  StepSizes out{alpha(k), {}};
  out.betas.reserve(b_.size());
  for (int j = levels_ - 1; j >= 1; --j) out.betas.push_back(beta(j, k));
  return out;
}

bool StepSchedule::timescale_separated() const {
  Rational upper = a_;
  for (const Rational& e : b_) {
    if (!(e < upper)) return false;
    upper = e;
  }
  return upper > Rational(0) || b_.empty();
}

StepSchedule StepSchedule::scaled(double alpha_factor, double beta_factor) const {
  std::vector<double> betas = beta_multipliers_;
  for (double& m : betas) m *= beta_factor;
  return StepSchedule(levels_, a_, b_, alpha_multiplier_ * alpha_factor, std::move(betas),
                      clamp_beta_, name_);
}

StepSchedule StepSchedule::with_clamp(bool clamp) const {
  return StepSchedule(levels_, a_, b_, alpha_multiplier_, beta_multipliers_, clamp, name_);
}

// ---------------------------------------------------------------------------

StepSchedule preset_basic(int levels) {
  if (levels < 1) throw std::invalid_argument("preset_basic needs T >= 1");
  if (levels > 40) throw std::invalid_argument("preset_basic supports T <= 40");
  auto one_minus_half_pow = [](int j) {
    const std::int64_t p = std::int64_t{1} << j;
    return Rational(p - 1, p);
  };
  std::vector<Rational> b;
  for (int j = levels - 1; j >= 1; --j) b.push_back(one_minus_half_pow(j));
  return StepSchedule(levels, one_minus_half_pow(levels), std::move(b), 1.0,
                      std::vector<double>(static_cast<std::size_t>(levels - 1), 1.0), true,
                      "basic");
}

StepSchedule preset_accelerated(int levels, bool smooth_inner) {
  if (levels < 2) throw std::invalid_argument("accelerated presets need T >= 2");
  const std::int64_t T = levels;
  const std::int64_t den = smooth_inner ? 7 + T : 8 + T;
  std::vector<Rational> b;
  std::vector<double> mult;
  for (int j = levels - 1; j >= 1; --j) {
    b.emplace_back(j + 3, den);
    mult.push_back(!smooth_inner && j == levels - 1 ? 1.0 : 2.0);
  }
  return StepSchedule(levels, Rational(den - 4, den), std::move(b), 1.0, std::move(mult), true,
                      smooth_inner ? "accel-smooth" : "accel");
}

StepSchedule preset_strongly_convex(int levels, bool smooth_inner, double lambda) {
  if (levels < 2) throw std::invalid_argument("strongly convex presets need T >= 2");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument(fmt::format("strong convexity lambda must be > 0, got {}", lambda));
  }
  const std::int64_t T = levels;
  const std::int64_t den = smooth_inner ? 3 + T : 4 + T;
  std::vector<Rational> b;
  std::vector<double> mult;
  for (int j = levels - 1; j >= 1; --j) {
    b.emplace_back(3 + j, den);
    mult.push_back(!smooth_inner && j == levels - 1 ? 1.0 : 2.0);
  }
  return StepSchedule(levels, Rational(1), std::move(b), 1.0 / lambda, std::move(mult), true,
                      smooth_inner ? "sc-smooth" : "sc");
}

StepSchedule preset_by_name(std::string_view name, int levels, std::optional<double> lambda) {
  if (name == "basic") return preset_basic(levels);
  if (name == "accel") return preset_accelerated(levels, false);
  if (name == "accel-smooth") return preset_accelerated(levels, true);
  if (name == "sc" || name == "sc-smooth") {
    if (!lambda) {
      throw std::invalid_argument(
          fmt::format("preset '{}' needs a strong convexity parameter lambda", name));
    }
    return preset_strongly_convex(levels, name == "sc-smooth", *lambda);
  }
  throw std::invalid_argument(fmt::format("unknown preset '{}'", name));
}

bool preset_is_smooth(std::string_view name) {
  return name == "accel-smooth" || name == "sc-smooth";
}

}  // namespace tscgd
