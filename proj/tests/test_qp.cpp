#include <doctest.h>

#include <cmath>
#include <random>

#include "psf/qp.hpp"

using namespace psf;

namespace {

// Brute-force oracle for 2-D QPs: dense grid over a bounding window, refined
// twice around the best cell. Only feasible grid points compete.
Eigen::Vector2d grid_oracle(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                            const Eigen::MatrixXd& c, const Eigen::VectorXd& d, double window,
                            double* value = nullptr) {
  auto objective = [&](const Eigen::Vector2d& x) {
    return 0.5 * x.dot(h * x) + g.dot(x);
  };
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Eigen::Vector2d best = center;
  double best_val = std::numeric_limits<double>::infinity();
  double half = window;
  for (int level = 0; level < 5; ++level) {
    const int n = 201;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Eigen::Vector2d x = center + Eigen::Vector2d(2.0 * half * i / (n - 1) - half,
                                                     2.0 * half * j / (n - 1) - half);
        if (((c * x - d).array() > 1e-12).any()) continue;
        const double v = objective(x);
        if (v < best_val) {
          best_val = v;
          best = x;
        }
      }
    }
    center = best;
    half /= 10.0;  // the next window still covers the coarse-grid error
  }
  if (value) *value = best_val;
  return best;
}

}  // namespace

TEST_CASE("unconstrained minimizer") {
  Eigen::MatrixXd h(2, 2);
  h << 2.0, 0.0, 0.0, 4.0;
  Eigen::VectorXd g(2);
  g << -2.0, -8.0;
  const QpResult res = solve_qp(h, g, Eigen::MatrixXd::Zero(0, 2), Eigen::VectorXd::Zero(0));
  REQUIRE(res.status == QpStatus::Optimal);
  CHECK(res.x(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(res.x(1) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("single active constraint with analytic solution") {
  // min 0.5||x||^2 - (1,1)'x s.t. x1 + x2 <= 1: KKT gives x = (1-lambda)(1,1)
  // and 2(1-lambda) = 1, so x = (0.5, 0.5) with multiplier 0.5.
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd g(2);
  g << -1.0, -1.0;
  Eigen::MatrixXd c(1, 2);
  c << 1.0, 1.0;
  Eigen::VectorXd d(1);
  d << 1.0;
  const QpResult res = solve_qp(h, g, c, d);
  REQUIRE(res.status == QpStatus::Optimal);
  CHECK(res.x(0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(res.x(1) == doctest::Approx(0.5).epsilon(1e-9));
  REQUIRE(res.lambda.size() == 1);
  CHECK(res.lambda(0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("inactive constraints leave the minimizer untouched") {
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd g(2);
  g << -0.1, -0.1;
  Eigen::MatrixXd c(4, 2);
  c << 1, 0, -1, 0, 0, 1, 0, -1;  // |x_i| <= 1
  Eigen::VectorXd d = Eigen::VectorXd::Ones(4);
  const QpResult res = solve_qp(h, g, c, d);
  REQUIRE(res.status == QpStatus::Optimal);
  CHECK((res.x - Eigen::Vector2d(0.1, 0.1)).norm() < 1e-10);
  CHECK(res.lambda.norm() < 1e-10);
}

TEST_CASE("box-cornered solution") {
  // Pull toward (3, 3) inside the unit box: lands at the (1, 1) corner.
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd g(2);
  g << -3.0, -3.0;
  Eigen::MatrixXd c(4, 2);
  c << 1, 0, -1, 0, 0, 1, 0, -1;
  Eigen::VectorXd d = Eigen::VectorXd::Ones(4);
  const QpResult res = solve_qp(h, g, c, d);
  REQUIRE(res.status == QpStatus::Optimal);
  CHECK((res.x - Eigen::Vector2d(1.0, 1.0)).norm() < 1e-9);
}

TEST_CASE("infeasible constraint systems are detected") {
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(1, 1);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(1);
  Eigen::MatrixXd c(2, 1);
  c << 1.0, -1.0;  // x <= -1 and -x <= -1 (x >= 1)
  Eigen::VectorXd d(2);
  d << -1.0, -1.0;
  const QpResult res = solve_qp(h, g, c, d);
  CHECK(res.status == QpStatus::Infeasible);
}

TEST_CASE("kkt conditions on random dense problems") {
  std::mt19937_64 rng(71);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int nv = 2 + static_cast<int>(rng() % 5);
    const int nc = 1 + static_cast<int>(rng() % (2 * nv));
    Eigen::MatrixXd m(nv, nv);
    for (int i = 0; i < m.size(); ++i) m(i / nv, i % nv) = gauss(rng);
    const Eigen::MatrixXd h =
        m * m.transpose() + 0.1 * Eigen::MatrixXd::Identity(nv, nv);
    Eigen::VectorXd g(nv);
    for (int i = 0; i < nv; ++i) g(i) = gauss(rng);
    Eigen::MatrixXd c(nc, nv);
    for (int i = 0; i < c.size(); ++i) c(i / nv, i % nv) = gauss(rng);
    // Right-hand side chosen so a known point is strictly feasible.
    Eigen::VectorXd x_feas(nv);
    for (int i = 0; i < nv; ++i) x_feas(i) = 0.3 * gauss(rng);
    const Eigen::VectorXd d = c * x_feas + Eigen::VectorXd::Constant(nc, 0.1);

    const QpResult res = solve_qp(h, g, c, d);
    REQUIRE(res.status == QpStatus::Optimal);
    // Stationarity, primal/dual feasibility, complementary slackness.
    const Eigen::VectorXd slack = d - c * res.x;
    CHECK(slack.minCoeff() > -1e-7);
    CHECK(res.lambda.minCoeff() > -1e-9);
    CHECK((h * res.x + g + c.transpose() * res.lambda).norm() < 1e-6);
    CHECK(std::abs(res.lambda.dot(slack)) < 1e-6);
  }
}

TEST_CASE("matches the grid oracle on random 2-d problems") {
  std::mt19937_64 rng(73);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd m(2, 2);
    for (int i = 0; i < 4; ++i) m(i / 2, i % 2) = gauss(rng);
    const Eigen::MatrixXd h = m * m.transpose() + 0.5 * Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd g(2);
    g << gauss(rng), gauss(rng);
    // A random polytope around the origin plus a bounding box.
    const int extra = 1 + static_cast<int>(rng() % 3);
    Eigen::MatrixXd c(4 + extra, 2);
    c.topRows(4) << 1, 0, -1, 0, 0, 1, 0, -1;
    Eigen::VectorXd d(4 + extra);
    d.head(4).setConstant(2.0);
    for (int i = 0; i < extra; ++i) {
      c.row(4 + i) << gauss(rng), gauss(rng);
      d(4 + i) = 0.2 + std::abs(gauss(rng));  // keeps the origin feasible
    }
    const QpResult res = solve_qp(h, g, c, d);
    REQUIRE(res.status == QpStatus::Optimal);
    double oracle_val = 0.0;
    const Eigen::Vector2d oracle_x = grid_oracle(h, g, c, d, 2.0, &oracle_val);
    const double solver_val = 0.5 * res.x.dot(h * res.x) + g.dot(res.x);
    CHECK(solver_val <= oracle_val + 1e-6);  // never worse than the grid
    CHECK(oracle_val - solver_val < 1e-3);   // and the grid confirms optimality
    // Location can drift along flat directions of ill-conditioned Hessians.
    CHECK((res.x - oracle_x).norm() < 0.15);
  }
}

TEST_CASE("redundant duplicate constraints are tolerated") {
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd g(2);
  g << -3.0, 0.0;
  Eigen::MatrixXd c(3, 2);
  c << 1, 0, 1, 0, 1, 0;  // x1 <= 1 three times
  Eigen::VectorXd d = Eigen::VectorXd::Ones(3);
  const QpResult res = solve_qp(h, g, c, d);
  REQUIRE(res.status == QpStatus::Optimal);
  CHECK(res.x(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.x(1) == doctest::Approx(0.0).epsilon(1e-9));
  // Total multiplier mass matches the single-constraint problem.
  CHECK(res.lambda.sum() == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("equality-like paired inequalities") {
  // x1 + x2 <= 1 and -(x1 + x2) <= -1 pin the sum to one.
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd g(2);
  g << 0.0, -2.0;
  Eigen::MatrixXd c(2, 2);
  c << 1, 1, -1, -1;
  Eigen::VectorXd d(2);
  d << 1.0, -1.0;
  const QpResult res = solve_qp(h, g, c, d);
  REQUIRE(res.status == QpStatus::Optimal);
  CHECK(res.x.sum() == doctest::Approx(1.0).epsilon(1e-8));
  // Analytic: minimize 0.5 x1^2 + 0.5 x2^2 - 2 x2 on the line -> (-0.5, 1.5).
  CHECK(res.x(0) == doctest::Approx(-0.5).epsilon(1e-7));
  CHECK(res.x(1) == doctest::Approx(1.5).epsilon(1e-7));
}
