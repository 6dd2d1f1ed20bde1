#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tscgd/core.hpp"
#include "tscgd/geometry.hpp"
#include "tscgd/oracle.hpp"

namespace tscgd {

/// A benchmark instance of min_{x in X} f^(1)(f^(2)(...f^(T)(x)...)).
struct Problem {
  std::string name;
  LevelDims dims;
  /// Builds a fresh oracle whose randomness is keyed by `seed`.
  std::function<std::unique_ptr<SampleOracle>(std::uint64_t seed)> make_oracle;
  ConvexSet feasible_set;
  /// Known minimiser, when the problem has one in closed form.
  std::optional<Vector> reference;
  /// Exact F(x); empty for sampled-data problems.
  std::function<double(const Vector&)> objective;
  /// Parameter of optimal strong convexity, if known.
  std::optional<double> strong_convexity;
  /// Data are streamed samples; references come from long runs.
  bool sampled_data = false;
  /// Modelling choices worth reporting alongside results (key, value).
  std::vector<std::pair<std::string, std::string>> notes;
};

/// F(x) = 0.5 ||A x - b||^2 written as a T-level composition:
///   T = 3: f3(x) = A x,      f2(v) = v - b,  f1(u) = 0.5 ||u||^2
///   T = 2: f2(x) = A x - b,  f1(u) = 0.5 ||u||^2
/// With noise_sigma > 0 every level is wrapped in GaussianNoise.
/// The reference is the least-squares solution (projected onto X by a
/// converged projected-gradient solve when X is not the whole space), and
/// strong_convexity is the smallest eigenvalue of A^T A.
Problem quadratic_chain(int levels, const Eigen::MatrixXd& A, const Vector& b, double noise_sigma,
                        ConvexSet set = {});

/// Covariance designs for regression covariates:
///   1: identity
///   2: unit diagonal, 0.5 off-diagonal
///   3: Sigma_jk = 0.5 exp(-|j - k| / d) for all j, k (diagonal 0.5 as well)
Eigen::MatrixXd covariate_covariance(int setup, int d);

/// Gaussian covariate sampler N(0, Sigma) with a precomputed Cholesky factor.
class CovariateSampler {
 public:
  CovariateSampler(int setup, int d);

  int setup() const noexcept { return setup_; }
  int dim() const noexcept { return static_cast<int>(covariance_.rows()); }
  const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }

  Vector draw(Rng& rng) const;
  /// Writes one draw into out[0..d).
  void draw_into(Rng& rng, double* out) const;

 private:
  int setup_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd factor_;
};

/// CovariateSampler bundled with its own random stream.
class SeededCovariateSampler {
 public:
  SeededCovariateSampler(int setup, int d, std::uint64_t seed);

  const CovariateSampler& sampler() const noexcept { return sampler_; }
  Vector next() { return sampler_.draw(rng_); }

 private:
  CovariateSampler sampler_;
  Rng rng_;
};

SeededCovariateSampler covariate_setup(int setup, int d, std::uint64_t seed);

struct RiskAverseConfig {
  int d = 50;
  /// Weight of the deviation term.
  double lambda = 1.0;
  /// Deviation order; only p = 2 is supported.
  int p = 2;
  /// Smoothing floor inside the square root of f1.
  double epsilon = 1e-8;
  int setup = 1;
  std::uint64_t beta_star_seed = 0;
  /// Standard deviation of the regression noise.
  double noise_std = 1.0;

  void validate() const;
};

/// Linear model Y = X^T beta* + noise that risk components draw (x, y) from.
/// A draw is laid out as [x_1, ..., x_d, y].
struct RegressionModel {
  CovariateSampler covariates;
  Vector beta_star;
  double noise_std = 1.0;

  Draw sample(Rng& rng) const;
};

/// U(beta, omega) = -(y - x^T beta)^2 for a draw omega = (x, y).
double risk_utility(const Vector& beta, const Draw& omega);
/// grad_beta U = 2 (y - x^T beta) x.
Vector risk_utility_gradient(const Vector& beta, const Draw& omega);

/// f3_omega(beta) = (U(beta, omega), beta).
class RiskUtilityLift final : public Component {
 public:
  explicit RiskUtilityLift(std::shared_ptr<const RegressionModel> model);
  Draw draw(Rng& rng) const override;
  Vector value(const Vector& beta, const Draw& omega) const override;
  Jacobian jacobian(const Vector& beta, const Draw& omega) const override;

 private:
  std::shared_ptr<const RegressionModel> model_;
};

/// f2_omega(z, beta) = (z, (z - U(beta, omega))_+^2).
class RiskDeviation final : public Component {
 public:
  explicit RiskDeviation(std::shared_ptr<const RegressionModel> model);
  Draw draw(Rng& rng) const override;
  Vector value(const Vector& point, const Draw& omega) const override;
  Jacobian jacobian(const Vector& point, const Draw& omega) const override;
  std::optional<std::string> fd_exclusion(const Vector& point, const Draw& omega,
                                          double h) const override;

 private:
  std::shared_ptr<const RegressionModel> model_;
};

/// f1(y1, y2) = -y1 + lambda * sqrt(y2 + epsilon), deterministic.
class RiskMeanDeviationOuter final : public Component {
 public:
  RiskMeanDeviationOuter(double lambda, double epsilon);
  Vector value(const Vector& point, const Draw& omega) const override;
  Jacobian jacobian(const Vector& point, const Draw& omega) const override;
  bool has_mean() const override { return true; }
  Vector mean_value(const Vector& point) const override;
  Vector probe_point(Rng& rng) const override;
  std::optional<std::string> fd_exclusion(const Vector& point, const Draw& omega,
                                          double h) const override;

 private:
  double lambda_;
  double epsilon_;
};

/// Three-level risk-averse regression minimising -rho(U), where
/// rho = E[U] - lambda * E[(E[U] - U)_+^2]^{1/2}. dims = (d, 1+d, 2, 1).
/// Every oracle query draws fresh (x, y) pairs, independently per level.
Problem risk_averse_regression(const RiskAverseConfig& config);

/// F(x) for problems with an analytic objective.
double exact_objective(const Problem& problem, const Vector& x);

}  // namespace tscgd
