#include "tscgd/problems.hpp"

#include <cmath>

#include <fmt/format.h>

namespace tscgd {

namespace {

std::shared_ptr<const Component> with_noise(std::shared_ptr<const Component> c, double sigma) {
  if (sigma == 0.0) return c;
  return std::make_shared<GaussianNoise>(std::move(c), sigma);
}

// Constrained least squares by projected gradient with step 1/L; the
// objective is strongly convex here, so this converges linearly.
Vector constrained_least_squares(const Eigen::MatrixXd& A, const Vector& b, const ConvexSet& set,
                                 const Vector& start) {
  const Eigen::MatrixXd gram = A.transpose() * A;
  const Vector rhs = A.transpose() * b;
  const double lipschitz = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues().maxCoeff();
  Vector x = project(set, start);
  for (int it = 0; it < 2'000'000; ++it) {
    const Vector next = project(set, x - (gram * x - rhs) / lipschitz);
    const double change = (next - x).norm();
    x = next;
    if (change <= 1e-15 * (1.0 + x.norm())) break;
  }
  return x;
}

}  // namespace

Problem quadratic_chain(int levels, const Eigen::MatrixXd& A, const Vector& b, double noise_sigma,
                        ConvexSet set) {
  if (levels != 2 && levels != 3) {
    throw std::invalid_argument(fmt::format("quadratic_chain supports T = 2 or 3, got {}", levels));
  }
  if (A.rows() < 1 || A.cols() < 1) throw std::invalid_argument("quadratic_chain: empty A");
  if (b.size() != A.rows()) {
    throw DimensionError(
        fmt::format("quadratic_chain: b has dim {}, A has {} rows", b.size(), A.rows()));
  }
  if (!(noise_sigma >= 0.0)) {
    throw std::invalid_argument(fmt::format("noise sigma must be >= 0, got {}", noise_sigma));
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < A.cols()) {
    throw std::invalid_argument(fmt::format(
        "quadratic_chain: A has rank {} < {} columns, minimiser is not unique", qr.rank(), A.cols()));
  }
  const auto m = static_cast<int>(A.rows());
  const auto d = static_cast<int>(A.cols());

  Vector reference = qr.solve(b);
  if (!set.contains(reference, 0.0)) reference = constrained_least_squares(A, b, set, reference);

  std::vector<std::shared_ptr<const Component>> components;
  if (levels == 3) {
    components = {std::make_shared<AffineMap>(A),
                  std::make_shared<AffineMap>(Eigen::MatrixXd::Identity(m, m), -b),
                  std::make_shared<HalfSquaredNorm>(m)};
  } else {
    components = {std::make_shared<AffineMap>(A, -b), std::make_shared<HalfSquaredNorm>(m)};
  }
  for (auto& c : components) c = with_noise(std::move(c), noise_sigma);

  const Eigen::MatrixXd gram = A.transpose() * A;
  const double lambda =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues().minCoeff();

  Problem problem{
      .name = fmt::format("quad-chain(T={}, d={}, sigma={})", levels, d, noise_sigma),
      .dims = dims_of(components),
      .make_oracle = [components](std::uint64_t seed) -> std::unique_ptr<SampleOracle> {
        return std::make_unique<ComponentOracle>(components, seed);
      },
      .feasible_set = std::move(set),
      .reference = std::move(reference),
      .objective = [A, b](const Vector& x) { return 0.5 * (A * x - b).squaredNorm(); },
      .strong_convexity = lambda,
      .notes = {},
  };
  problem.notes.emplace_back("noise_model", noise_sigma > 0.0
                                                ? fmt::format("additive Gaussian sigma={} on values "
                                                              "and Jacobian entries",
                                                              noise_sigma)
                                                : std::string("none"));
  return problem;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd covariate_covariance(int setup, int d) {
  if (d < 1) throw std::invalid_argument(fmt::format("covariate dimension must be >= 1, got {}", d));
  Eigen::MatrixXd cov(d, d);
  switch (setup) {
    case 1:
      cov.setIdentity();
      break;
    case 2:
      cov.setConstant(0.5);
      cov.diagonal().setOnes();
      break;
    case 3:
      for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) {
          cov(j, k) = 0.5 * std::exp(-std::abs(j - k) / static_cast<double>(d));
        }
      }
      break;
    default:
      throw std::invalid_argument(fmt::format("covariate setup must be 1, 2 or 3, got {}", setup));
  }
  return cov;
}

CovariateSampler::CovariateSampler(int setup, int d)
    : setup_(setup), covariance_(covariate_covariance(setup, d)) {
  const Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        fmt::format("covariance of setup {} (d = {}) is not positive definite", setup, d));
  }
  factor_ = llt.matrixL();
}

void CovariateSampler::draw_into(Rng& rng, double* out) const {
  const Eigen::Index d = covariance_.rows();
  Vector z(d);
  fill_standard_normal(rng, {z.data(), static_cast<std::size_t>(d)});
  Eigen::Map<Vector> target(out, d);
  if (setup_ == 1) {
    target = z;
  } else {
    target.noalias() = factor_.triangularView<Eigen::Lower>() * z;
  }
}

Vector CovariateSampler::draw(Rng& rng) const {
  Vector out(dim());
  draw_into(rng, out.data());
  return out;
}

SeededCovariateSampler::SeededCovariateSampler(int setup, int d, std::uint64_t seed)
    : sampler_(setup, d), rng_(seed, kAuxStreamBase) {}

SeededCovariateSampler covariate_setup(int setup, int d, std::uint64_t seed) {
  return SeededCovariateSampler(setup, d, seed);
}

// ---------------------------------------------------------------------------

void RiskAverseConfig::validate() const {
  if (d < 1) throw std::invalid_argument(fmt::format("risk regression needs d >= 1, got {}", d));
  if (!(lambda >= 0.0)) throw std::invalid_argument(fmt::format("lambda must be >= 0, got {}", lambda));
  if (p != 2) throw std::invalid_argument(fmt::format("only p = 2 is supported, got {}", p));
  if (!(epsilon > 0.0)) throw std::invalid_argument(fmt::format("epsilon must be > 0, got {}", epsilon));
  if (setup < 1 || setup > 3) {
    throw std::invalid_argument(fmt::format("setup must be 1, 2 or 3, got {}", setup));
  }
  if (!(noise_std >= 0.0)) {
    throw std::invalid_argument(fmt::format("noise_std must be >= 0, got {}", noise_std));
  }
}

Draw RegressionModel::sample(Rng& rng) const {
  const int d = covariates.dim();
  Draw omega;
  omega.data.resize(static_cast<std::size_t>(d) + 1);
  covariates.draw_into(rng, omega.data.data());
  double noise = 0.0;
  fill_standard_normal(rng, {&noise, 1});
  Eigen::Map<const Vector> x(omega.data.data(), d);
  omega.data[static_cast<std::size_t>(d)] = x.dot(beta_star) + noise_std * noise;
  return omega;
}

namespace {

struct Observation {
  Eigen::Map<const Vector> x;
  double y;
};

Observation observation(const Draw& omega, Eigen::Index d) {
  if (static_cast<Eigen::Index>(omega.data.size()) != d + 1) {
    throw DimensionError(
        fmt::format("regression draw has {} entries, expected {}", omega.data.size(), d + 1));
  }
  return {Eigen::Map<const Vector>(omega.data.data(), d), omega.data.back()};
}

}  // namespace

double risk_utility(const Vector& beta, const Draw& omega) {
  const Observation obs = observation(omega, beta.size());
  const double residual = obs.y - obs.x.dot(beta);
  return -residual * residual;
}

Vector risk_utility_gradient(const Vector& beta, const Draw& omega) {
  const Observation obs = observation(omega, beta.size());
  return 2.0 * (obs.y - obs.x.dot(beta)) * obs.x;
}

RiskUtilityLift::RiskUtilityLift(std::shared_ptr<const RegressionModel> model)
    : Component(model->covariates.dim(), model->covariates.dim() + 1), model_(std::move(model)) {}

Draw RiskUtilityLift::draw(Rng& rng) const { return model_->sample(rng); }

Vector RiskUtilityLift::value(const Vector& beta, const Draw& omega) const {
  Vector out(beta.size() + 1);
  out[0] = risk_utility(beta, omega);
  out.tail(beta.size()) = beta;
  return out;
}

Jacobian RiskUtilityLift::jacobian(const Vector& beta, const Draw& omega) const {
  const Eigen::Index d = beta.size();
  Jacobian J = Jacobian::Zero(d, d + 1);
  J.col(0) = risk_utility_gradient(beta, omega);
  J.rightCols(d).diagonal().setOnes();
  return J;
}

RiskDeviation::RiskDeviation(std::shared_ptr<const RegressionModel> model)
    : Component(model->covariates.dim() + 1, 2), model_(std::move(model)) {}

Draw RiskDeviation::draw(Rng& rng) const { return model_->sample(rng); }

Vector RiskDeviation::value(const Vector& point, const Draw& omega) const {
  const double z = point[0];
  const Vector beta = point.tail(point.size() - 1);
  const double gap = std::max(0.0, z - risk_utility(beta, omega));
  Vector out(2);
  out << z, gap * gap;
  return out;
}

Jacobian RiskDeviation::jacobian(const Vector& point, const Draw& omega) const {
  const Eigen::Index d = point.size() - 1;
  const double z = point[0];
  const Vector beta = point.tail(d);
  const double gap = std::max(0.0, z - risk_utility(beta, omega));
  Jacobian J = Jacobian::Zero(d + 1, 2);
  J(0, 0) = 1.0;
  J(0, 1) = 2.0 * gap;
  if (gap > 0.0) J.col(1).tail(d) = -2.0 * gap * risk_utility_gradient(beta, omega);
  return J;
}

std::optional<std::string> RiskDeviation::fd_exclusion(const Vector& point, const Draw& omega,
                                                       double h) const {
  const Vector beta = point.tail(point.size() - 1);
  const double gap = point[0] - risk_utility(beta, omega);
  const double reach = h * (1.0 + risk_utility_gradient(beta, omega).lpNorm<1>());
  if (std::abs(gap) <= 100.0 * reach) {
    return fmt::format("point within {:.3g} of the hinge z = U", std::abs(gap));
  }
  return std::nullopt;
}

RiskMeanDeviationOuter::RiskMeanDeviationOuter(double lambda, double epsilon)
    : Component(2, 1), lambda_(lambda), epsilon_(epsilon) {}

Vector RiskMeanDeviationOuter::value(const Vector& point, const Draw& /*omega*/) const {
  return mean_value(point);
}

Vector RiskMeanDeviationOuter::mean_value(const Vector& point) const {
  return Vector::Constant(1, -point[0] + lambda_ * std::sqrt(point[1] + epsilon_));
}

Jacobian RiskMeanDeviationOuter::jacobian(const Vector& point, const Draw& /*omega*/) const {
  Jacobian J(2, 1);
  J(0, 0) = -1.0;
  J(1, 0) = 0.5 * lambda_ / std::sqrt(point[1] + epsilon_);
  return J;
}

Vector RiskMeanDeviationOuter::probe_point(Rng& rng) const {
  Vector p(2);
  fill_standard_normal(rng, {p.data(), 2});
  p[1] = 0.5 + p[1] * p[1];
  return p;
}

std::optional<std::string> RiskMeanDeviationOuter::fd_exclusion(const Vector& point,
                                                                const Draw& /*omega*/,
                                                                double h) const {
  if (point[1] + epsilon_ <= 100.0 * h) return std::string("second argument at the root's kink");
  return std::nullopt;
}

Problem risk_averse_regression(const RiskAverseConfig& config) {
  config.validate();
  auto model = std::make_shared<RegressionModel>(RegressionModel{
      .covariates = CovariateSampler(config.setup, config.d),
      .beta_star = Vector(config.d),
      .noise_std = config.noise_std,
  });
  Rng truth(config.beta_star_seed, kAuxStreamBase + 1);
  fill_standard_normal(truth, {model->beta_star.data(), static_cast<std::size_t>(config.d)});

  std::vector<std::shared_ptr<const Component>> components{
      std::make_shared<RiskUtilityLift>(model), std::make_shared<RiskDeviation>(model),
      std::make_shared<RiskMeanDeviationOuter>(config.lambda, config.epsilon)};

  Problem problem{
      .name = fmt::format("risk-regression(d={}, setup={}, lambda={})", config.d, config.setup,
                          config.lambda),
      .dims = dims_of(components),
      .make_oracle = [components](std::uint64_t seed) -> std::unique_ptr<SampleOracle> {
        return std::make_unique<ComponentOracle>(components, seed);
      },
      .feasible_set = ConvexSet::whole_space(),
      .reference = std::nullopt,
      .objective = {},
      .strong_convexity = std::nullopt,
      .sampled_data = true,
      .notes = {},
  };
  problem.notes = {
      {"noise_model", fmt::format("y = x'beta* + e, e ~ N(0, {}^2)", config.noise_std)},
      {"samples_per_query", "one fresh (x, y) per level per oracle query"},
      {"beta_star_seed", fmt::format("{}", config.beta_star_seed)},
      {"epsilon", fmt::format("{}", config.epsilon)},
  };
  return problem;
}

double exact_objective(const Problem& problem, const Vector& x) {
  if (!problem.objective) {
    throw UnsupportedError(fmt::format("{} has no analytic objective", problem.name));
  }
  if (x.size() != problem.dims.decision_dim()) {
    throw DimensionError(fmt::format("objective point has dim {}, expected {}", x.size(),
                                     problem.dims.decision_dim()));
  }
  return problem.objective(x);
}

}  // namespace tscgd
