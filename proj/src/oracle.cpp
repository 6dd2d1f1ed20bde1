#include "tscgd/oracle.hpp"

#include <random>

#include <fmt/format.h>

namespace tscgd {

void fill_standard_normal(Rng& rng, std::span<double> out) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out) v = normal(rng);
}

// ---------------------------------------------------------------------------

Component::Component(int in_dim, int out_dim) : in_dim_(in_dim), out_dim_(out_dim) {
  if (in_dim < 1 || out_dim < 1) {
    throw std::invalid_argument(
        fmt::format("component dimensions must be positive, got {} -> {}", in_dim, out_dim));
  }
}

Draw Component::draw(Rng& /*rng*/) const { return {}; }

Vector Component::mean_value(const Vector& /*point*/) const {
  throw UnsupportedError("component has no closed-form expected value");
}

Vector Component::probe_point(Rng& rng) const {
  Vector p(in_dim_);
  fill_standard_normal(rng, {p.data(), static_cast<std::size_t>(p.size())});
  return p;
}

std::optional<std::string> Component::fd_exclusion(const Vector& /*point*/,
                                                   const Draw& /*omega*/,
                                                   double /*h*/) const {
  return std::nullopt;
}

// ---------------------------------------------------------------------------

AffineMap::AffineMap(Eigen::MatrixXd matrix, Vector offset)
    : Component(static_cast<int>(matrix.cols()), static_cast<int>(matrix.rows())),
      matrix_(std::move(matrix)),
      jacobian_(matrix_.transpose()),
      offset_(std::move(offset)) {
  if (offset_.size() != matrix_.rows()) {
    throw DimensionError(fmt::format("AffineMap offset has dim {}, matrix has {} rows",
                                     offset_.size(), matrix_.rows()));
  }
}

AffineMap::AffineMap(Eigen::MatrixXd matrix)
    : AffineMap(matrix, Vector::Zero(matrix.rows())) {}

Vector AffineMap::value(const Vector& point, const Draw& /*omega*/) const {
  return mean_value(point);
}

Jacobian AffineMap::jacobian(const Vector& /*point*/, const Draw& /*omega*/) const {
  return jacobian_;
}

Vector AffineMap::mean_value(const Vector& point) const {
  return matrix_ * point + offset_;
}

// ---------------------------------------------------------------------------

HalfSquaredNorm::HalfSquaredNorm(int dim) : Component(dim, 1) {}

Vector HalfSquaredNorm::value(const Vector& point, const Draw& /*omega*/) const {
  return mean_value(point);
}

Jacobian HalfSquaredNorm::jacobian(const Vector& point, const Draw& /*omega*/) const {
  return point;
}

Vector HalfSquaredNorm::mean_value(const Vector& point) const {
  return Vector::Constant(1, 0.5 * point.squaredNorm());
}

// ---------------------------------------------------------------------------

GaussianNoise::GaussianNoise(std::shared_ptr<const Component> inner, double sigma)
    : Component(inner->in_dim(), inner->out_dim()),
      inner_(std::move(inner)),
      sigma_(sigma),
      noise_size_(static_cast<std::size_t>(out_dim()) * (1 + in_dim())) {
  if (!(sigma >= 0.0)) {
    throw std::invalid_argument(fmt::format("noise sigma must be >= 0, got {}", sigma));
  }
}

Draw GaussianNoise::draw(Rng& rng) const {
  Draw inner = inner_->draw(rng);
  if (sigma_ == 0.0) return inner;
  Draw out;
  out.data.resize(noise_size_ + inner.data.size());
  fill_standard_normal(rng, {out.data.data(), noise_size_});
  for (std::size_t i = 0; i < noise_size_; ++i) out.data[i] *= sigma_;
  std::copy(inner.data.begin(), inner.data.end(), out.data.begin() + noise_size_);
  return out;
}

Draw GaussianNoise::inner_draw(const Draw& omega) const {
  if (sigma_ == 0.0) return omega;
  return Draw{std::vector<double>(omega.data.begin() + noise_size_, omega.data.end())};
}

Vector GaussianNoise::value(const Vector& point, const Draw& omega) const {
  if (sigma_ == 0.0) return inner_->value(point, omega);
  const Eigen::Index out = out_dim();
  const Eigen::Index in = in_dim();
  Eigen::Map<const Vector> xi(omega.data.data(), out);
  Eigen::Map<const Jacobian> noise_jac(omega.data.data() + out, in, out);
  return inner_->value(point, inner_draw(omega)) + xi + noise_jac.transpose() * point;
}

Jacobian GaussianNoise::jacobian(const Vector& point, const Draw& omega) const {
  if (sigma_ == 0.0) return inner_->jacobian(point, omega);
  Eigen::Map<const Jacobian> noise_jac(omega.data.data() + out_dim(), in_dim(), out_dim());
  return inner_->jacobian(point, inner_draw(omega)) + noise_jac;
}

std::optional<std::string> GaussianNoise::fd_exclusion(const Vector& point, const Draw& omega,
                                                       double h) const {
  return inner_->fd_exclusion(point, inner_draw(omega), h);
}

// ---------------------------------------------------------------------------

SampleOracle::SampleOracle(LevelDims dims, std::uint64_t base_seed)
    : dims_(std::move(dims)), base_seed_(base_seed) {}

void SampleOracle::check_level(int level) const {
  if (level < 1 || level > levels()) {
    throw std::out_of_range(fmt::format("level {} outside 1..{}", level, levels()));
  }
}

GradientSample SampleOracle::query_gradients(const Vector& x, std::span<const Vector> trackers) {
  const int T = levels();
  if (x.size() != dims_.dim(T)) {
    throw DimensionError(
        fmt::format("query_gradients: x has dim {}, expected {}", x.size(), dims_.dim(T)));
  }
  if (trackers.size() != static_cast<std::size_t>(T - 1)) {
    throw DimensionError(fmt::format("query_gradients: got {} trackers, expected {}",
                                     trackers.size(), T - 1));
  }
  for (int j = T - 1; j >= 1; --j) {
    const Vector& y = trackers[static_cast<std::size_t>(T - 1 - j)];
    if (y.size() != dims_.dim(j)) {
      throw DimensionError(fmt::format("query_gradients: y^({}) has dim {}, expected {}", j,
                                       y.size(), dims_.dim(j)));
    }
  }
  Rng rng = next_stream();
  return GradientSample{sample_gradients(x, trackers, rng)};
}

ValueSample SampleOracle::query_value(int level, const Vector& point) {
  check_level(level);
  if (point.size() != dims_.dim(level)) {
    throw DimensionError(fmt::format("query_value: level {} point has dim {}, expected {}", level,
                                     point.size(), dims_.dim(level)));
  }
  Rng rng = next_stream();
  return ValueSample{level, sample_value(level, point, rng)};
}

Vector SampleOracle::true_value(int level, const Vector& point) const {
  check_level(level);
  if (!has_true_value(level)) {
    throw UnsupportedError(fmt::format("level {} has no analytic expected value", level));
  }
  if (point.size() != dims_.dim(level)) {
    throw DimensionError(fmt::format("true_value: level {} point has dim {}, expected {}", level,
                                     point.size(), dims_.dim(level)));
  }
  return expected_value(level, point);
}

bool SampleOracle::analytic() const {
  for (int j = 1; j <= levels(); ++j) {
    if (!has_true_value(j)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

LevelDims dims_of(const std::vector<std::shared_ptr<const Component>>& components) {
  if (components.empty()) throw std::invalid_argument("oracle needs at least one component");
  std::vector<int> dims;
  dims.reserve(components.size() + 1);
  for (std::size_t i = 0; i < components.size(); ++i) {
    const Component& c = *components[i];
    if (i > 0 && components[i - 1]->out_dim() != c.in_dim()) {
      throw DimensionError(fmt::format("component for level {} outputs dim {} but level {} takes {}",
                                       components.size() - i + 1, components[i - 1]->out_dim(),
                                       components.size() - i, c.in_dim()));
    }
    dims.push_back(c.in_dim());
  }
  dims.push_back(components.back()->out_dim());
  return LevelDims(std::move(dims));
}

ComponentOracle::ComponentOracle(std::vector<std::shared_ptr<const Component>> components,
                                 std::uint64_t base_seed)
    : SampleOracle(dims_of(components), base_seed), components_(std::move(components)) {}

const Component& ComponentOracle::component(int level) const {
  if (level < 1 || level > levels()) {
    throw std::out_of_range(fmt::format("level {} outside 1..{}", level, levels()));
  }
  return *components_[static_cast<std::size_t>(levels() - level)];
}

bool ComponentOracle::has_true_value(int level) const { return component(level).has_mean(); }

std::vector<Jacobian> ComponentOracle::sample_gradients(const Vector& x,
                                                        std::span<const Vector> trackers,
                                                        Rng& rng) const {
  std::vector<Jacobian> out;
  out.reserve(components_.size());
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const Component& c = *components_[i];
    const Vector& point = (i == 0) ? x : trackers[i - 1];
    const Draw omega = c.draw(rng);
    out.push_back(c.jacobian(point, omega));
  }
  return out;
}

Vector ComponentOracle::sample_value(int level, const Vector& point, Rng& rng) const {
  const Component& c = component(level);
  const Draw omega = c.draw(rng);
  return c.value(point, omega);
}

Vector ComponentOracle::expected_value(int level, const Vector& point) const {
  return component(level).mean_value(point);
}

std::unique_ptr<ComponentOracle> linear_chain(const std::vector<Jacobian>& jacobians,
                                              std::uint64_t base_seed) {
  std::vector<std::shared_ptr<const Component>> components;
  components.reserve(jacobians.size());
  for (const Jacobian& J : jacobians) {
    components.push_back(std::make_shared<AffineMap>(Eigen::MatrixXd(J.transpose())));
  }
  return std::make_unique<ComponentOracle>(std::move(components), base_seed);
}

}  // namespace tscgd
