#include <doctest.h>

#include <cmath>
#include <random>

#include "psf/errors.hpp"
#include "psf/geometry.hpp"

using namespace psf;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// Dense-sampling oracle for the Hausdorff distance between two boxes.
double hausdorff_oracle(const Box& a, const Box& b, int grid = 41) {
  const int n = static_cast<int>(a.lo.size());
  std::vector<Eigen::VectorXd> pa, pb;
  std::vector<int> idx(n, 0);
  auto enumerate = [&](const Box& box, std::vector<Eigen::VectorXd>& out) {
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      Eigen::VectorXd p(n);
      for (int d = 0; d < n; ++d) {
        p(d) = box.lo(d) + (box.hi(d) - box.lo(d)) * idx[d] / (grid - 1);
      }
      out.push_back(p);
      int d = 0;
      while (d < n && ++idx[d] == grid) idx[d++] = 0;
      if (d == n) break;
    }
  };
  enumerate(a, pa);
  enumerate(b, pb);
  // Exact distance to the target box keeps the sampled sup a lower bound.
  auto directed = [n](const std::vector<Eigen::VectorXd>& from, const Box& to) {
    double worst = 0.0;
    for (const auto& p : from) {
      double sq = 0.0;
      for (int d = 0; d < n; ++d) {
        const double g = std::max({to.lo(d) - p(d), p(d) - to.hi(d), 0.0});
        sq += g * g;
      }
      worst = std::max(worst, std::sqrt(sq));
    }
    return worst;
  };
  return std::max(directed(pa, b), directed(pb, a));
}

}  // namespace

TEST_CASE("polytope normalization and membership") {
  Eigen::MatrixXd a(2, 1);
  a << 2.0, -4.0;  // 2z <= 3, -4z <= 1
  Eigen::VectorXd b(2);
  b << 3.0, 1.0;
  const Polytope p = Polytope::from_inequalities(a, b);
  Eigen::VectorXd z(1);
  z << 1.49;
  CHECK(p.contains(z).inside);
  z << 1.51;
  CHECK(!p.contains(z).inside);
  z << -0.24;
  CHECK(p.contains(z).inside);
  z << -0.26;
  CHECK(!p.contains(z).inside);
}

TEST_CASE("polytope rejects nonpositive right-hand sides") {
  Eigen::MatrixXd a(1, 1);
  a << 1.0;
  Eigen::VectorXd b(1);
  b << 0.0;
  CHECK_THROWS_AS(Polytope::from_inequalities(a, b), ContractViolation);
  b << -1.0;
  CHECK_THROWS_AS(Polytope::from_inequalities(a, b), ContractViolation);
}

TEST_CASE("box polytope and unit-box tightened membership") {
  const Polytope box = Polytope::box(vec2(-1.0, -1.0), vec2(1.0, 1.0));
  CHECK(box.contains(vec2(0.0, 0.0)).inside);
  CHECK(box.contains(vec2(0.0, 0.0), 0.5).inside);
  // z = (0.97, 0) with eps = 0.0399: 0.97 > 0.9601.
  const Membership m = box.contains(vec2(0.97, 0.0), 0.0399);
  CHECK(!m.inside);
  CHECK(m.margin == doctest::Approx(0.9601 - 0.97).epsilon(1e-12));
  CHECK_THROWS_AS(box.contains(vec2(0.0, 0.0), 1.0), ConfigError);
}

TEST_CASE("terminal box contains the origin at full tightening") {
  const double deg = M_PI / 180.0;
  const Polytope term = Polytope::box(vec2(-30 * deg, -30 * deg), vec2(30 * deg, 30 * deg));
  const TighteningSchedule sched(0.99, 0.02, 20);
  CHECK(TerminalSet{term}.contains(vec2(0.0, 0.0), sched.epsilon_at(20)).inside);
}

TEST_CASE("tightening recursion values") {
  const TighteningSchedule sched(0.99, 0.02, 20);
  CHECK(sched.epsilon_at(0) == 0.0);
  // eps_1 = eps, eps_2 = eps + sqrt(rho) * eps.
  CHECK(sched.epsilon_at(2) == doctest::Approx(0.0399).epsilon(1e-4));
  CHECK(sched.epsilon_at(20) == doctest::Approx(0.38152).epsilon(1e-4));
  CHECK_THROWS_AS(sched.epsilon_at(-1), ContractViolation);
  CHECK_THROWS_AS(sched.epsilon_at(21), ContractViolation);
}

TEST_CASE("tightening closed form matches the recursion on random schedules") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rho_dist(0.05, 0.999);
  std::uniform_real_distribution<double> eps_dist(1e-4, 0.03);
  for (int trial = 0; trial < 1000; ++trial) {
    const double rho = rho_dist(rng);
    const double eps = eps_dist(rng);
    const int horizon = 1 + static_cast<int>(rng() % 25);
    TighteningSchedule sched(rho, eps, horizon);
    double eps_i = 0.0;
    for (int i = 0; i <= horizon; ++i) {
      CHECK(std::abs(sched.epsilon_at(i) - eps_i) < 1e-12);
      eps_i += std::pow(std::sqrt(rho), i) * eps;
    }
  }
}

TEST_CASE("tightening schedule rejects empty tightened sets") {
  // eps_N >= 1 must be rejected at construction.
  CHECK_THROWS_AS(TighteningSchedule(0.999, 0.2, 20), ConfigError);
  CHECK_THROWS_AS(TighteningSchedule(1.0, 0.02, 20), ConfigError);
  CHECK_THROWS_AS(TighteningSchedule(0.99, -0.02, 20), ConfigError);
}

TEST_CASE("tightened sets are nested over the horizon") {
  const Polytope box = Polytope::box(vec2(-1.0, -1.0), vec2(1.0, 1.0));
  const TighteningSchedule sched(0.9, 0.05, 12);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(-1.2, 1.2);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::VectorXd z = vec2(coord(rng), coord(rng));
    for (int i = 1; i <= 12; ++i) {
      if (box.contains(z, sched.epsilon_at(i)).inside) {
        // Membership at a later index implies membership at every earlier one.
        for (int j = 0; j < i; ++j) {
          CHECK(box.contains(z, sched.epsilon_at(j)).inside);
        }
      }
    }
  }
}

TEST_CASE("error ball membership and inflation") {
  const ErrorBall ball(0.02);
  CHECK(ball.contains(vec2(0.005, 0.005)).inside);
  CHECK(!ball.contains(vec2(0.015, 0.015)).inside);
  CHECK(ball.radius() == 0.02);

  // Zero displacement leaves the set unchanged.
  CHECK(ball.inflate(0.0, 1.0 / 0.02, 0.5).radius() == 0.02);
  // L_a = 1/r, L_sigma = 0.5, dz = 0.01 -> radius 0.02 * (1 + 0.25) = 0.025.
  CHECK(ball.inflate(0.01, 1.0 / 0.02, 0.5).radius() == doctest::Approx(0.025).epsilon(1e-12));
  CHECK_THROWS_AS(ball.inflate(-0.1, 1.0, 1.0), ContractViolation);

  // Membership monotone under inflation.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-0.03, 0.03);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::VectorXd e = vec2(coord(rng), coord(rng));
    if (ball.contains(e).inside) {
      CHECK(ball.inflate(0.3, 1.0 / 0.02, 0.5).contains(e).inside);
    }
  }
}

TEST_CASE("error budget worked example") {
  StabilityCertificate cert;
  cert.rho = 0.5;
  cert.c_l = 1.0;
  cert.c_u = 1.0;
  cert.delta = 1.0;
  cert.pi_max = 1.0;
  const ErrorBudget b = error_budget(cert, 0.02, 1.0, 1.0, 1.0, 1.0);
  CHECK(b.e1 == doctest::Approx(1.0));
  CHECK(b.e2 == doctest::Approx(0.02));
  CHECK(b.e3 == doctest::Approx(0.02));
  CHECK(b.e4 == doctest::Approx(0.02));
  CHECK(b.e5 == doctest::Approx(0.01));
  CHECK(b.e_hat == doctest::Approx(0.01));
}

TEST_CASE("error budget homogeneity and monotonicity") {
  StabilityCertificate cert;
  cert.rho = 0.5;
  cert.c_l = 0.8;
  cert.c_u = 2.0;
  cert.delta = 100.0;  // large so e1 never binds
  cert.pi_max = 1.3;
  const double c = 3.0;
  const ErrorBudget b1 = error_budget(cert, 0.02, 1.1, 0.9, 1.4, 1.2);
  const ErrorBudget b2 = error_budget(cert, c * 0.02, 1.1, 0.9, 1.4, 1.2);
  CHECK(b2.e2 == doctest::Approx(c * b1.e2));
  CHECK(b2.e3 == doctest::Approx(c * b1.e3));
  CHECK(b2.e4 == doctest::Approx(c * b1.e4));
  CHECK(b2.e5 == doctest::Approx(c * b1.e5));
  CHECK(b2.e_hat == doctest::Approx(c * b1.e_hat));

  StabilityCertificate wider = cert;
  wider.c_u = 4.0;
  const ErrorBudget b3 = error_budget(wider, 0.02, 1.1, 0.9, 1.4, 1.2);
  CHECK(b3.e_hat <= b1.e_hat);

  // Each component bounds the minimum from below.
  for (double e : {b1.e1, b1.e2, b1.e3, b1.e4, b1.e5}) CHECK(b1.e_hat <= e + 1e-15);
  CHECK(b1.e_hat > 0.0);

  StabilityCertificate bad = cert;
  bad.c_u = 0.0;
  CHECK_THROWS_AS(error_budget(bad, 0.02, 1.0, 1.0, 1.0, 1.0), ContractViolation);
}

TEST_CASE("hausdorff examples against the dense-sampling oracle") {
  Eigen::VectorXd one(1);
  one << 1.0;
  Eigen::VectorXd zero(1);
  zero << 0.0;
  Eigen::VectorXd two(1);
  two << 2.0;
  Eigen::VectorXd three(1);
  three << 3.0;

  const Box a{zero, one};
  CHECK(hausdorff(a, a) == 0.0);
  CHECK(hausdorff(a, Box{two, three}) == doctest::Approx(2.0).epsilon(1e-9));

  // [0,1]^2 vs [0,2]^2: the oracle decides the corner question.
  const Box sq1{vec2(0, 0), vec2(1, 1)};
  const Box sq2{vec2(0, 0), vec2(2, 2)};
  const double oracle = hausdorff_oracle(sq1, sq2);
  CHECK(hausdorff(sq1, sq2) == doctest::Approx(oracle).epsilon(0.05));
}

TEST_CASE("hausdorff against the oracle on random boxes") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    auto make_box = [&] {
      Eigen::VectorXd lo = vec2(coord(rng), coord(rng));
      Eigen::VectorXd hi = vec2(lo(0) + std::abs(coord(rng)), lo(1) + std::abs(coord(rng)));
      return Box{lo, hi};
    };
    const Box a = make_box();
    const Box b = make_box();
    const double exact = hausdorff(a, b);
    const double approx = hausdorff_oracle(a, b);
    // The grid oracle underestimates by at most the grid diagonal.
    CHECK(exact == doctest::Approx(approx).epsilon(0.1));
    CHECK(exact >= approx - 1e-9);
  }
}

TEST_CASE("hausdorff metric properties on sampled box triples") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  auto make_box = [&] {
    Eigen::VectorXd lo = vec2(coord(rng), coord(rng));
    Eigen::VectorXd hi = vec2(lo(0) + 0.1 + std::abs(coord(rng)), lo(1) + 0.1 + std::abs(coord(rng)));
    return Box{lo, hi};
  };
  for (int trial = 0; trial < 200; ++trial) {
    const Box a = make_box();
    const Box b = make_box();
    const Box c = make_box();
    const double ab = hausdorff(a, b);
    const double ba = hausdorff(b, a);
    const double ac = hausdorff(a, c);
    const double cb = hausdorff(c, b);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));     // symmetry
    CHECK(ab <= ac + cb + 1e-9);                          // triangle inequality
    CHECK(hausdorff(a, a) == 0.0);                        // identity
  }
}
