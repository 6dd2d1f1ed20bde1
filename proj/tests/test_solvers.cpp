#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "support.hpp"
#include "tscgd/harness.hpp"
#include "tscgd/solvers.hpp"

using namespace tscgd;

namespace {

Jacobian scalar(double v) { return Jacobian::Constant(1, 1, v); }

Eigen::MatrixXd diag12() {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
  A(0, 0) = 1;
  A(1, 1) = 2;
  return A;
}

SolverState state_of(Vector x, std::vector<Vector> ys, std::uint64_t k = 1) {
  SolverState s;
  s.k = k;
  s.x = std::move(x);
  s.trackers = std::move(ys);
  return s;
}

// Trackers set to the true composed values at x.
std::vector<Vector> exact_trackers(const SampleOracle& o, const Vector& x) {
  std::vector<Vector> ys;
  Vector v = x;
  for (int level = o.levels(); level >= 2; --level) {
    v = o.true_value(level, v);
    ys.push_back(v);
  }
  return ys;
}

std::vector<AlgorithmKind> all_kinds() {
  return {AlgorithmKind::tscgd(), AlgorithmKind::atscgd(false), AlgorithmKind::atscgd(true)};
}

}  // namespace

TEST_CASE("one hand-traced step") {
  auto o = linear_chain({scalar(1), scalar(1)});
  const SolverState s = state_of(Vector::Constant(1, 1.0), {Vector::Zero(1)});
  const SolverState n = tscgd_step(s, *o, StepSizes{0.5, {0.5}}, ConvexSet());
  CHECK(n.k == 2);
  CHECK(n.x[0] == 0.5);
  CHECK(n.trackers[0][0] == 0.5);
}

TEST_CASE("zero stepsizes freeze the state") {
  const Problem p = quadratic_chain(3, diag12(), Eigen::Vector2d(1, 2), 0.2);
  testing::Gen g(3);
  for (const auto& kind : all_kinds()) {
    auto o = p.make_oracle(1);
    const SolverState s = state_of(g.vec(2), {g.vec(2), g.vec(2)}, 4);
    // beta = 0 cannot drive extrapolation, so the accelerated steps get beta = 0 only via tscgd
    const StepSizes zero{0.0, {0.0, 0.0}};
    if (kind.variant == AlgorithmKind::Variant::atscgd) {
      CHECK_THROWS_AS(step(kind, s, *o, zero, p.feasible_set), std::invalid_argument);
      continue;
    }
    const SolverState n = step(kind, s, *o, zero, p.feasible_set);
    CHECK(n.k == 5);
    CHECK(n.x == s.x);
    CHECK(n.trackers == s.trackers);
  }
}

// 0.5 ||x - c||^2 as a single level.
class ShiftedHalfNorm final : public Component {
 public:
  explicit ShiftedHalfNorm(Vector c) : Component(static_cast<int>(c.size()), 1), c_(std::move(c)) {}
  Vector value(const Vector& x, const Draw&) const override {
    return Vector::Constant(1, 0.5 * (x - c_).squaredNorm());
  }
  Jacobian jacobian(const Vector& x, const Draw&) const override { return x - c_; }
  bool has_mean() const override { return true; }
  Vector mean_value(const Vector& x) const override { return value(x, {}); }

 private:
  Vector c_;
};

TEST_CASE("frozen tracker reproduces projected gradient descent") {
  // With f1 linear the frozen tracker loses nothing.
  const int d = 3;
  const Vector c = Eigen::Vector3d(2.0, -1.0, 0.5);
  std::vector<std::shared_ptr<const Component>> comps{
      std::make_shared<ShiftedHalfNorm>(c), std::make_shared<AffineMap>(Eigen::MatrixXd::Constant(1, 1, 1.5))};
  ComponentOracle o(comps, 0);
  const auto set = ConvexSet::box(Vector::Constant(d, -0.5), Vector::Constant(d, 0.75));
  const auto schedule = preset_basic(2);

  SolverState s = state_of(Vector::Constant(d, 0.1), {});
  s.trackers = exact_trackers(o, s.x);
  Vector ref = s.x;
  for (int i = 0; i < 500; ++i) {
    const double alpha = schedule.alpha(s.k);
    s = tscgd_step(s, o, StepSizes{alpha, {0.0}}, set);
    Vector next = ref - alpha * 1.5 * (ref - c);
    for (int m = 0; m < d; ++m) next[m] = std::clamp(next[m], -0.5, 0.75);
    ref = next;
    CHECK((s.x - ref).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("unit beta lags gradient descent by one tracker step") {
  const testing::Mat A = (testing::Mat(2, 2) << 1.0, 0.3, -0.2, 1.5).finished();
  const testing::Vec b = Eigen::Vector2d(1, -2);
  const Problem p = quadratic_chain(2, A, b, 0.0);
  auto o = p.make_oracle(0);
  SolverState s = state_of(Eigen::Vector2d(0.3, 0.4), {});
  s.trackers = exact_trackers(*o, s.x);
  testing::Vec prev = s.x, cur = s.x;
  const double alpha = 0.1;
  for (int i = 0; i < 300; ++i) {
    s = tscgd_step(s, *o, StepSizes{alpha, {1.0}}, p.feasible_set);
    const testing::Vec next = cur - alpha * A.transpose() * (A * prev - b);
    prev = cur;
    cur = next;
    CHECK((s.x - cur).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK((s.x - *p.reference).norm() < 1e-6);
}

TEST_CASE("unit beta with frozen x makes trackers exact in one step") {
  const Problem p = quadratic_chain(3, diag12(), Eigen::Vector2d(1, 2), 0.0);
  testing::Gen g(8);
  for (const auto& kind : all_kinds()) {
    auto o = p.make_oracle(0);
    const SolverState s = state_of(g.vec(2), {g.vec(2), g.vec(2)});
    const SolverState n = step(kind, s, *o, StepSizes{0.0, {1.0, 1.0}}, p.feasible_set);
    for (double e : tracking_errors(n, *o)) CHECK(e == 0.0);
  }
}

TEST_CASE("tracking error contracts geometrically with frozen x") {
  const Problem p = quadratic_chain(3, diag12(), Eigen::Vector2d(1, 2), 0.0);
  auto o = p.make_oracle(0);
  testing::Gen g(9);
  for (double beta : {0.1, 0.37, 0.9}) {
    SolverState s = state_of(g.vec(2), {g.vec(2), g.vec(2)});
    const double e0 = tracking_errors(s, *o)[0];
    for (int m = 1; m <= 30; ++m) {
      const double before = tracking_errors(s, *o)[0];
      s = tscgd_step(s, *o, StepSizes{0.0, {beta, beta}}, p.feasible_set);
      const double after = tracking_errors(s, *o)[0];
      CHECK(after == doctest::Approx((1 - beta) * before).epsilon(1e-12));
      CHECK(after == doctest::Approx(std::pow(1 - beta, m) * e0).epsilon(1e-10));
    }
  }
}

TEST_CASE("chain direction at exact trackers is the gradient") {
  testing::Gen g(21);
  for (int T : {2, 3}) {
    for (int trial = 0; trial < 10; ++trial) {
      const testing::Mat A = g.mat(4, 3) + 2 * testing::Mat::Identity(4, 3);
      const Problem p = quadratic_chain(T, A, g.vec(4), 0.0);
      auto o = p.make_oracle(0);
      const Vector x = g.vec(3);
      SolverState s = state_of(x, exact_trackers(*o, x));
      const std::vector<double> zeros(static_cast<std::size_t>(T - 1), 0.0);
      const SolverState n = tscgd_step(s, *o, StepSizes{1.0, zeros}, p.feasible_set);
      const testing::Vec direction = x - n.x;
      const testing::Vec fd = testing::fd_gradient([&](const testing::Vec& v) { return exact_objective(p, v); }, x);
      CHECK((direction - fd).norm() / std::max(1.0, fd.norm()) <= 1e-5);
    }
  }
}

TEST_CASE("extrapolation") {
  CHECK(extrapolate(Vector::Constant(1, 1.0), Vector::Constant(1, 2.0), 0.5)[0] == 3.0);
  testing::Gen g(4);
  for (int i = 0; i < 100; ++i) {
    const Vector c = g.vec(4);
    const double beta = g.uniform(1e-3, 1.0);
    CHECK((extrapolate(c, c, beta) - c).cwiseAbs().maxCoeff() <= 1e-12 * (1 + c.cwiseAbs().maxCoeff() / beta));
    const Vector other = g.vec(4);
    CHECK(extrapolate(other, c, 1.0) == c);
  }
  CHECK_THROWS_AS(extrapolate(Vector::Zero(1), Vector::Zero(1), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(extrapolate(Vector::Zero(1), Vector::Zero(2), 0.5), DimensionError);
}

TEST_CASE("accelerated step queries at extrapolated points") {
  // Linear levels f(v) = v make the tracker sample equal to the query point.
  auto o = linear_chain({scalar(1), scalar(1), scalar(1)});
  const SolverState s = state_of(Vector::Constant(1, 1.0), {Vector::Constant(1, 0.0), Vector::Constant(1, 0.0)});
  const StepSizes st{0.5, {0.5, 0.25}};
  // x: 1 - 0.5 = 0.5
  const SolverState smooth = atscgd_step(s, *o, st, ConvexSet(), true);
  CHECK(smooth.x[0] == 0.5);
  // y2: query at (1 - 2) * 1 + 0.5 * 2 = 0, blend 0.5 -> 0
  CHECK(smooth.trackers[0][0] == 0.0);
  // y1: query at (1 - 4) * 0 + 0 * 4 = 0 -> 0
  CHECK(smooth.trackers[1][0] == 0.0);
  const SolverState rough = atscgd_step(s, *o, st, ConvexSet(), false);
  // y2: query at x_{k+1} = 0.5 -> 0.25
  CHECK(rough.trackers[0][0] == 0.25);
  // y1: query at (1 - 4) * 0 + 4 * 0.25 = 1 -> 0.25
  CHECK(rough.trackers[1][0] == 0.25);
  const SolverState basic = tscgd_step(s, *o, st, ConvexSet());
  // y2: query at x_k = 1 -> 0.5; y1: query at the new y2 -> 0.125
  CHECK(basic.trackers[0][0] == 0.5);
  CHECK(basic.trackers[1][0] == 0.125);
}

TEST_CASE("zero-noise run reaches the minimiser") {
  const Problem p = quadratic_chain(3, diag12(), Eigen::Vector2d(1, 2), 0.0);
  const auto schedule = preset_strongly_convex(3, true, *p.strong_convexity);
  const RunRecord r = run(AlgorithmKind::atscgd(true), p, schedule,
                          RunOptions{.iterations = 100000, .grid = RecordGrid::logarithmic(10)});
  // independent normal-equations solve
  const testing::Mat A = diag12();
  const testing::Vec xs = (A.transpose() * A).ldlt().solve(A.transpose() * Eigen::Vector2d(1, 2));
  CHECK((r.final_x - xs).norm() <= 1e-3);
  CHECK(r.entries.back().k == 100001);
  CHECK(r.entries.front().k == 1);
  CHECK(r.entries.back().distance <= 1e-3);
}

TEST_CASE("single-iteration run records two entries") {
  const Problem p = quadratic_chain(2, diag12(), Eigen::Vector2d(1, 2), 0.1);
  const RunRecord r = run(AlgorithmKind::tscgd(), p, preset_basic(2), RunOptions{.iterations = 1});
  REQUIRE(r.entries.size() == 2);
  CHECK(r.entries[0].k == 1);
  CHECK(r.entries[1].k == 2);
  CHECK(r.averaged_x == r.final_x);
}

TEST_CASE("runs are bit-identical under a fixed seed") {
  const Problem quad = quadratic_chain(3, diag12(), Eigen::Vector2d(1, 2), 0.3);
  const Problem risk = risk_averse_regression(RiskAverseConfig{.d = 4});
  for (const Problem* p : {&quad, &risk}) {
    const int T = p->dims.levels();
    for (const auto& kind : all_kinds()) {
      const auto schedule = kind.variant == AlgorithmKind::Variant::tscgd
                                ? preset_basic(T)
                                : preset_accelerated(T, kind.smooth_inner).scaled(0.05);
      RunOptions opt{.iterations = 2000, .seed = 17, .grid = RecordGrid::every(7), .keep_iterates = true};
      opt.reference = Vector::Zero(p->dims.decision_dim());
      const RunRecord a = run(kind, *p, schedule, opt);
      const RunRecord b = run(kind, *p, schedule, opt);
      REQUIRE(a.entries.size() == b.entries.size());
      for (std::size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].k == b.entries[i].k);
        CHECK(a.entries[i].x == b.entries[i].x);
        CHECK(std::memcmp(&a.entries[i].distance, &b.entries[i].distance, sizeof(double)) == 0);
        CHECK(a.entries[i].tracking == b.entries[i].tracking);
      }
      CHECK(a.averaged_x == b.averaged_x);
      opt.seed = 18;
      CHECK(run(kind, *p, schedule, opt).final_x != a.final_x);
    }
  }
}

TEST_CASE("recorded iterates stay feasible") {
  testing::Gen g(33);
  const std::vector<ConvexSet> sets{ConvexSet::box(Eigen::Vector2d(0.2, -1), Eigen::Vector2d(0.6, 0.5)),
                                    ConvexSet::ball(Eigen::Vector2d(3, 3), 1.5)};
  for (const auto& set : sets) {
    const Problem p = quadratic_chain(3, diag12(), Eigen::Vector2d(1, 2), 0.5, set);
    CHECK(set.contains(*p.reference));
    for (const auto& kind : all_kinds()) {
      const auto schedule = kind.variant == AlgorithmKind::Variant::tscgd ? preset_basic(3)
                                                                            : preset_accelerated(3, kind.smooth_inner);
      const RunRecord r = run(kind, p, schedule,
                              RunOptions{.iterations = 500, .seed = 2, .grid = RecordGrid::every(1), .keep_iterates = true});
      for (const auto& e : r.entries) CHECK(set.contains(*e.x, 1e-12));
    }
  }
}

TEST_CASE("record grid") {
  CHECK(RecordGrid::every(3).indices(7) == std::vector<std::uint64_t>{1, 4, 7, 8});
  CHECK(RecordGrid::every(1).indices(2) == std::vector<std::uint64_t>{1, 2, 3});
  const auto log = RecordGrid::logarithmic(10).indices(1000);
  CHECK(log.front() == 1);
  CHECK(log.back() == 1001);
  for (std::size_t i = 1; i < log.size(); ++i) CHECK(log[i] > log[i - 1]);
  CHECK_THROWS_AS(RecordGrid::every(0), std::invalid_argument);
  CHECK_THROWS_AS(RecordGrid::logarithmic(0), std::invalid_argument);
}

TEST_CASE("divergence carries the partial record") {
  const Problem p = quadratic_chain(2, diag12(), Eigen::Vector2d(1, 2), 0.0);
  const StepSchedule wild(2, Rational(0), {Rational(0)}, 10.0, {1.0});
  try {
    run(AlgorithmKind::tscgd(), p, wild, RunOptions{.iterations = 10000, .grid = RecordGrid::every(1)});
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration() > 1);
    REQUIRE(e.partial() != nullptr);
    CHECK(e.partial()->entries.size() == e.iteration());
    CHECK(e.partial()->steps == e.iteration() - 1);
  }
}

TEST_CASE("run argument checks") {
  const Problem p = quadratic_chain(3, diag12(), Eigen::Vector2d(1, 2), 0.0);
  CHECK_THROWS_AS(run(AlgorithmKind::tscgd(), p, preset_basic(2), RunOptions{}), std::invalid_argument);
  CHECK_THROWS_AS(run(AlgorithmKind::tscgd(), p, preset_basic(3), RunOptions{.iterations = 0}),
                  std::invalid_argument);
  auto o = linear_chain({scalar(1)});
  CHECK_THROWS_AS(atscgd_step(state_of(Vector::Zero(1), {}), *o, StepSizes{0.1, {}}, ConvexSet(), true),
                  std::invalid_argument);
}

TEST_CASE("unclamped betas are applied as given") {
  auto o = linear_chain({scalar(1), scalar(1)});
  const SolverState s = state_of(Vector::Constant(1, 1.0), {Vector::Constant(1, 0.0)});
  const SolverState n = tscgd_step(s, *o, StepSizes{0.0, {2.0}}, ConvexSet());
  CHECK(n.trackers[0][0] == 2.0);
}

TEST_CASE("warm and zero tracker initialisation") {
  const Problem p = quadratic_chain(3, diag12(), Eigen::Vector2d(1, 2), 0.0);
  auto o = p.make_oracle(0);
  const SolverState warm = initial_state(*o, p.feasible_set, TrackerInit::warm, Vector(Eigen::Vector2d(1, 1)));
  for (double e : tracking_errors(warm, *o)) CHECK(e == 0.0);
  const SolverState zeros = initial_state(*o, p.feasible_set, TrackerInit::zeros);
  CHECK(zeros.x == Vector::Zero(2));
  for (const auto& y : zeros.trackers) CHECK(y == Vector::Zero(2));
}
