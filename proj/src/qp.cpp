#include "psf/qp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "psf/errors.hpp"

namespace psf {

namespace {
constexpr double kViolationTol = 1e-9;
constexpr double kPivotTol = 1e-12;
}  // namespace

QpResult solve_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                  const Eigen::MatrixXd& c, const Eigen::VectorXd& d) {
  const int nv = static_cast<int>(h.rows());
  const int nc = static_cast<int>(c.rows());
  if (h.cols() != nv || g.size() != nv || (nc > 0 && c.cols() != nv) || d.size() != nc) {
    throw ContractViolation("solve_qp: dimension mismatch");
  }

  QpResult out;
  out.lambda = Eigen::VectorXd::Zero(nc);

  Eigen::LLT<Eigen::MatrixXd> hllt(h);
  if (hllt.info() != Eigen::Success) {
    return out;  // NumericalFailure: H not positive definite
  }

  // Work in the ">=" convention: n_i' x >= b_i with n_i = -c_i, b_i = -d_i.
  Eigen::VectorXd x = hllt.solve(-g);
  if (nc == 0) {
    out.status = QpStatus::Optimal;
    out.x = x;
    return out;
  }
  const Eigen::MatrixXd n_all = -c.transpose();  // nv x nc columns
  const Eigen::VectorXd b_all = -d;
  const Eigen::MatrixXd hinv_n = hllt.solve(n_all);  // nv x nc

  std::vector<int> active;
  std::vector<double> u;  // multipliers aligned with `active`
  std::vector<char> in_active(nc, 0);

  const int max_iter = std::min(50 * (nv + nc), 3000);
  int iter = 0;

  auto finish = [&](QpStatus status) {
    out.status = status;
    out.x = x;
    out.iterations = iter;
    out.lambda.setZero();
    for (std::size_t j = 0; j < active.size(); ++j) out.lambda(active[j]) = u[j];
    return out;
  };

  while (true) {
    if (++iter > max_iter) return finish(QpStatus::MaxIter);

    // Most violated inactive constraint.
    int p = -1;
    double worst = -kViolationTol;
    for (int i = 0; i < nc; ++i) {
      if (in_active[i]) continue;
      const double s = n_all.col(i).dot(x) - b_all(i);
      if (s < worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) return finish(QpStatus::Optimal);

    double u_p = 0.0;
    // Inner loop: take (partial) steps toward satisfying constraint p.
    while (true) {
      if (++iter > max_iter) return finish(QpStatus::MaxIter);
      const int q = static_cast<int>(active.size());
      Eigen::VectorXd z = hinv_n.col(p);
      Eigen::VectorXd r = Eigen::VectorXd::Zero(q);
      if (q > 0) {
        Eigen::MatrixXd nact(nv, q);
        Eigen::MatrixXd hinv_nact(nv, q);
        for (int j = 0; j < q; ++j) {
          nact.col(j) = n_all.col(active[j]);
          hinv_nact.col(j) = hinv_n.col(active[j]);
        }
        const Eigen::MatrixXd gram = nact.transpose() * hinv_nact;
        r = gram.ldlt().solve(nact.transpose() * hinv_n.col(p));
        z -= hinv_nact * r;
      }

      // Dual blocking step.
      double t1 = std::numeric_limits<double>::infinity();
      int blocking = -1;
      for (int j = 0; j < q; ++j) {
        if (r(j) > kPivotTol) {
          const double ratio = u[j] / r(j);
          if (ratio < t1) {
            t1 = ratio;
            blocking = j;
          }
        }
      }

      const double ztn = z.dot(n_all.col(p));
      const double s_p = n_all.col(p).dot(x) - b_all(p);
      const bool z_zero = ztn <= kPivotTol;

      if (z_zero && !std::isfinite(t1)) return finish(QpStatus::Infeasible);

      double t2 = std::numeric_limits<double>::infinity();
      if (!z_zero) t2 = -s_p / ztn;
      const double t = std::min(t1, t2);

      if (!z_zero) x += t * z;
      for (int j = 0; j < q; ++j) u[j] -= t * r(j);
      u_p += t;

      if (!z_zero && t == t2) {
        active.push_back(p);
        u.push_back(u_p);
        in_active[p] = 1;
        break;
      }
      // Drop the blocking constraint and retry.
      in_active[active[blocking]] = 0;
      active.erase(active.begin() + blocking);
      u.erase(u.begin() + blocking);
    }
  }
}

}  // namespace psf
