#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tscgd/oracle.hpp"
#include "tscgd/problems.hpp"

using namespace tscgd;

namespace {

std::vector<std::shared_ptr<const Component>> noisy_chain(double sigma) {
  Eigen::MatrixXd A(2, 2);
  A << 1, 2, 0, 3;
  std::vector<std::shared_ptr<const Component>> inner{
      std::make_shared<AffineMap>(A, Eigen::Vector2d(1, -1)), std::make_shared<HalfSquaredNorm>(2)};
  std::vector<std::shared_ptr<const Component>> out;
  for (auto& c : inner) out.push_back(std::make_shared<GaussianNoise>(c, sigma));
  return out;
}

}  // namespace

TEST_CASE("linear chain returns its Jacobians exactly") {
  testing::Gen g(1);
  std::vector<Jacobian> js{g.mat(3, 2), g.mat(2, 4), g.mat(4, 1)};
  auto oracle = linear_chain(js, 5);
  CHECK(oracle->dims() == LevelDims{3, 2, 4, 1});
  for (int q = 0; q < 3; ++q) {
    const std::vector<Vector> ys{g.vec(2), g.vec(4)};
    const GradientSample s = oracle->query_gradients(g.vec(3), ys);
    REQUIRE(s.jacobians.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(s.jacobians[i] == js[i]);
  }
  CHECK(oracle->counter() == 3);
  // level j value is J_j^T v
  const Vector v = g.vec(2);
  CHECK(oracle->true_value(2, v) == Vector(js[1].transpose() * v));
  CHECK(oracle->query_value(2, v).value == Vector(js[1].transpose() * v));
}

TEST_CASE("zero-sigma noise wrapper is transparent") {
  ComponentOracle wrapped(noisy_chain(0.0), 9);
  ComponentOracle plain2(
      {std::make_shared<AffineMap>(Eigen::MatrixXd((Eigen::Matrix2d() << 1, 2, 0, 3).finished()),
                                   Eigen::Vector2d(1, -1)),
       std::make_shared<HalfSquaredNorm>(2)},
      9);
  const Vector x = Eigen::Vector2d(0.3, -1.2);
  const std::vector<Vector> ys{Eigen::Vector2d(2.0, 0.5)};
  const auto a = wrapped.query_gradients(x, ys);
  const auto b = plain2.query_gradients(x, ys);
  for (int i = 0; i < 2; ++i) CHECK(a.jacobians[i] == b.jacobians[i]);
  CHECK(wrapped.query_value(2, x).value == plain2.query_value(2, x).value);
  CHECK(wrapped.query_value(1, x).value == plain2.query_value(1, x).value);
}

TEST_CASE("replayed queries are bit-identical") {
  ComponentOracle a(noisy_chain(0.3), 1234), b(noisy_chain(0.3), 1234);
  const Vector x = Eigen::Vector2d(1.5, -0.25);
  const std::vector<Vector> ys{Eigen::Vector2d(0.1, 0.2)};
  for (int q = 0; q < 10; ++q) {
    const auto sa = a.query_gradients(x, ys);
    const auto sb = b.query_gradients(x, ys);
    for (int i = 0; i < 2; ++i) CHECK(sa.jacobians[i] == sb.jacobians[i]);
    CHECK(a.query_value(2, x).value == b.query_value(2, x).value);
  }
}

TEST_CASE("distinct counters give distinct samples") {
  ComponentOracle o(noisy_chain(0.3), 77);
  const Vector x = Eigen::Vector2d(1.0, 1.0);
  const Vector first = o.query_value(2, x).value;
  const Vector second = o.query_value(2, x).value;
  CHECK(first != second);
  ComponentOracle other(noisy_chain(0.3), 78);
  CHECK(other.query_value(2, x).value != first);
}

TEST_CASE("quadratic chain level values") {
  const Problem p = quadratic_chain(2, Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1, 1), 0.0);
  auto oracle = p.make_oracle(0);
  const Vector top = oracle->query_value(2, Eigen::Vector2d(1, 1)).value;
  CHECK(top == Vector(Eigen::Vector2d(0, 0)));
  CHECK(oracle->true_value(1, Eigen::Vector2d(3, 4))[0] == 12.5);
}

TEST_CASE("risk components evaluate a fixed draw by hand") {
  RiskAverseConfig cfg;
  cfg.d = 1;
  auto model = std::make_shared<RegressionModel>(
      RegressionModel{CovariateSampler(1, 1), Vector::Constant(1, 0.0), 1.0});
  const RiskUtilityLift f3(model);
  const Draw omega{{1.0, 2.0}};
  const Vector beta = Vector::Zero(1);
  const Vector v = f3.value(beta, omega);
  CHECK(v[0] == -4.0);
  CHECK(v[1] == 0.0);

  const RiskDeviation f2(model);
  // first coordinate passes z through for any draw
  const Vector zb = Eigen::Vector2d(-3.25, 0.5);
  CHECK(f2.value(zb, omega)[0] == -3.25);
  CHECK(f2.value(zb, Draw{{0.3, -7.0}})[0] == -3.25);
}

TEST_CASE("noise is unbiased in Monte Carlo") {
  const double sigma = 0.1;
  ComponentOracle o(noisy_chain(sigma), 2024);
  const int N = 100000;
  // At the origin the wrapper's noise is just xi ~ N(0, sigma^2 I).
  const Vector origin = Vector::Zero(2);
  const Vector truth = o.true_value(2, origin);
  Vector sum = Vector::Zero(2), sq = Vector::Zero(2);
  for (int i = 0; i < N; ++i) {
    const Vector s = o.query_value(2, origin).value;
    sum += s;
    sq += (s - truth).cwiseProduct(s - truth);
  }
  const Vector mean = sum / N;
  for (int i = 0; i < 2; ++i) CHECK(std::abs(mean[i] - truth[i]) <= 3 * sigma / std::sqrt(N));

  // Away from the origin, against the empirical spread.
  const Vector x = Eigen::Vector2d(0.7, -1.1);
  const Vector tx = o.true_value(2, x);
  std::vector<Vector> draws;
  Vector m = Vector::Zero(2);
  for (int i = 0; i < N; ++i) {
    draws.push_back(o.query_value(2, x).value);
    m += draws.back();
  }
  m /= N;
  Vector var = Vector::Zero(2);
  for (const auto& s : draws) var += (s - m).cwiseProduct(s - m);
  var /= (N - 1);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(m[i] - tx[i]) <= 4 * std::sqrt(var[i] / N));
}

TEST_CASE("noisy sampled Jacobian is the derivative of the sampled value") {
  auto inner = std::make_shared<HalfSquaredNorm>(3);
  GaussianNoise noisy(inner, 0.5);
  Rng rng(3, 0);
  const Draw omega = noisy.draw(rng);
  const Vector p = Eigen::Vector3d(0.4, -0.2, 1.3);
  const Jacobian J = noisy.jacobian(p, omega);
  auto f = [&](const testing::Vec& v) { return noisy.value(v, omega)[0]; };
  const testing::Vec fd = testing::fd_gradient(f, p);
  CHECK((J.col(0) - fd).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("oracle argument errors") {
  ComponentOracle o(noisy_chain(0.1), 0);
  const std::vector<Vector> ys{Vector::Zero(2)};
  CHECK_THROWS_AS(o.query_gradients(Vector::Zero(3), ys), DimensionError);
  CHECK_THROWS_AS(o.query_gradients(Vector::Zero(2), std::vector<Vector>{}), DimensionError);
  CHECK_THROWS_AS(o.query_gradients(Vector::Zero(2), std::vector<Vector>{Vector::Zero(1)}), DimensionError);
  CHECK_THROWS_AS(o.query_value(0, Vector::Zero(2)), std::out_of_range);
  CHECK_THROWS_AS(o.query_value(3, Vector::Zero(2)), std::out_of_range);
  CHECK_THROWS_AS(o.query_value(1, Vector::Zero(3)), DimensionError);
  CHECK_THROWS_AS(GaussianNoise(std::make_shared<HalfSquaredNorm>(2), -1.0), std::invalid_argument);

  const Problem risk = risk_averse_regression(RiskAverseConfig{.d = 3});
  auto ro = risk.make_oracle(0);
  CHECK_FALSE(ro->analytic());
  CHECK_THROWS_AS(ro->true_value(3, Vector::Zero(3)), UnsupportedError);
  CHECK_NOTHROW(ro->true_value(1, Eigen::Vector2d(0, 1)));
}

TEST_CASE("counter advances once per query") {
  ComponentOracle o(noisy_chain(0.1), 0);
  const std::vector<Vector> ys{Vector::Zero(2)};
  o.query_gradients(Vector::Zero(2), ys);
  o.query_value(2, Vector::Zero(2));
  o.query_value(1, Vector::Zero(2));
  CHECK(o.counter() == 3);
  o.true_value(2, Vector::Zero(2));
  CHECK(o.counter() == 3);
}
