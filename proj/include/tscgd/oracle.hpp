#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tscgd/core.hpp"
#include "tscgd/rng.hpp"

namespace tscgd {

/// One realisation omega_j of a level's randomness, flattened. Each component
/// decides the layout of its own draws.
struct Draw {
  std::vector<double> data;
};

/// One level f^(j): R^{d_j} -> R^{d_{j-1}} of a composition, given as a random
/// map f_omega together with its gradient-layout Jacobian.
class Component {
 public:
  Component(int in_dim, int out_dim);
  virtual ~Component() = default;

  int in_dim() const noexcept { return in_dim_; }
  int out_dim() const noexcept { return out_dim_; }

  /// Draws omega. Deterministic components return an empty draw.
  virtual Draw draw(Rng& rng) const;
  virtual Vector value(const Vector& point, const Draw& omega) const = 0;
  virtual Jacobian jacobian(const Vector& point, const Draw& omega) const = 0;

  /// Whether the expected-value map f^(j) = E[f_omega] is available in closed form.
  virtual bool has_mean() const { return false; }
  virtual Vector mean_value(const Vector& point) const;

  /// Random point inside the component's natural domain, used by gradient checks.
  virtual Vector probe_point(Rng& rng) const;

  /// Reason a finite-difference check at `point` with step `h` would straddle a
  /// kink of f_omega, if any.
  virtual std::optional<std::string> fd_exclusion(const Vector& point, const Draw& omega,
                                                  double h) const;

 private:
  int in_dim_;
  int out_dim_;
};

/// v -> M v + c. The Jacobian is M transposed.
class AffineMap final : public Component {
 public:
  AffineMap(Eigen::MatrixXd matrix, Vector offset);
  explicit AffineMap(Eigen::MatrixXd matrix);

  Vector value(const Vector& point, const Draw& omega) const override;
  Jacobian jacobian(const Vector& point, const Draw& omega) const override;
  bool has_mean() const override { return true; }
  Vector mean_value(const Vector& point) const override;

 private:
  Eigen::MatrixXd matrix_;
  Jacobian jacobian_;
  Vector offset_;
};

/// u -> 0.5 * ||u||^2.
class HalfSquaredNorm final : public Component {
 public:
  explicit HalfSquaredNorm(int dim);

  Vector value(const Vector& point, const Draw& omega) const override;
  Jacobian jacobian(const Vector& point, const Draw& omega) const override;
  bool has_mean() const override { return true; }
  Vector mean_value(const Vector& point) const override;
};

/// Adds zero-mean Gaussian noise to a wrapped component. The sampled map is
///   f_omega(v) = f(v) + xi + Xi^T v,   xi ~ N(0, s^2 I),  Xi_{mi} ~ N(0, s^2),
/// so the sampled Jacobian f'(v) + Xi is the exact derivative of the sampled
/// value map and both are unbiased.
class GaussianNoise final : public Component {
 public:
  GaussianNoise(std::shared_ptr<const Component> inner, double sigma);

  Draw draw(Rng& rng) const override;
  Vector value(const Vector& point, const Draw& omega) const override;
  Jacobian jacobian(const Vector& point, const Draw& omega) const override;
  bool has_mean() const override { return inner_->has_mean(); }
  Vector mean_value(const Vector& point) const override { return inner_->mean_value(point); }
  Vector probe_point(Rng& rng) const override { return inner_->probe_point(rng); }
  std::optional<std::string> fd_exclusion(const Vector& point, const Draw& omega,
                                          double h) const override;

  double sigma() const noexcept { return sigma_; }

 private:
  Draw inner_draw(const Draw& omega) const;

  std::shared_ptr<const Component> inner_;
  double sigma_;
  std::size_t noise_size_;
};

struct GradientSample {
  /// [J_T, J_{T-1}, ..., J_1] along one sample path.
  std::vector<Jacobian> jacobians;
};

struct ValueSample {
  int level = 0;
  Vector value;
};

/// The sample oracle. Each query derives its own Philox substream from
/// (base_seed, query counter), so queries are replayable and samples at
/// different counter values are independent.
class SampleOracle {
 public:
  SampleOracle(LevelDims dims, std::uint64_t base_seed);
  virtual ~SampleOracle() = default;

  const LevelDims& dims() const noexcept { return dims_; }
  int levels() const noexcept { return dims_.levels(); }
  std::uint64_t base_seed() const noexcept { return base_seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Sampled Jacobians at (x, y^(T-1), ..., y^(1)), all from one fresh path.
  GradientSample query_gradients(const Vector& x, std::span<const Vector> trackers);

  /// Sampled f^(level)(point).
  ValueSample query_value(int level, const Vector& point);

  /// Expected-value f^(level)(point); consumes no randomness.
  Vector true_value(int level, const Vector& point) const;

  virtual bool has_true_value(int level) const = 0;
  /// True when every level exposes its expected value.
  bool analytic() const;

 protected:
  virtual std::vector<Jacobian> sample_gradients(const Vector& x,
                                                 std::span<const Vector> trackers,
                                                 Rng& rng) const = 0;
  virtual Vector sample_value(int level, const Vector& point, Rng& rng) const = 0;
  virtual Vector expected_value(int level, const Vector& point) const = 0;

 private:
  Rng next_stream() { return Rng(base_seed_, counter_++); }
  void check_level(int level) const;

  LevelDims dims_;
  std::uint64_t base_seed_;
  std::uint64_t counter_ = 0;
};

/// Oracle assembled from one Component per level. Levels draw independently.
class ComponentOracle final : public SampleOracle {
 public:
  /// `components` is ordered [f^(T), ..., f^(1)].
  ComponentOracle(std::vector<std::shared_ptr<const Component>> components,
                  std::uint64_t base_seed);

  const Component& component(int level) const;
  bool has_true_value(int level) const override;

 protected:
  std::vector<Jacobian> sample_gradients(const Vector& x, std::span<const Vector> trackers,
                                         Rng& rng) const override;
  Vector sample_value(int level, const Vector& point, Rng& rng) const override;
  Vector expected_value(int level, const Vector& point) const override;

 private:
  std::vector<std::shared_ptr<const Component>> components_;
};

/// Deterministic linear chain whose sampled Jacobians are exactly the given
/// [J_T, ..., J_1]; level j maps v -> J_j^T v.
std::unique_ptr<ComponentOracle> linear_chain(const std::vector<Jacobian>& jacobians,
                                              std::uint64_t base_seed = 0);

/// Builds LevelDims from an ordered [f^(T), ..., f^(1)] component list.
LevelDims dims_of(const std::vector<std::shared_ptr<const Component>>& components);

/// Fills `out` with standard normals drawn from `rng`.
void fill_standard_normal(Rng& rng, std::span<double> out);

}  // namespace tscgd
