#include "hhv/qp.hpp"

#include <stdexcept>
#include <vector>

namespace hhv {

Eigen::MatrixXd hessian_floor(const Eigen::MatrixXd& quu, double delta) {
  Eigen::MatrixXd sym = 0.5 * (quu + quu.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  double lmin = es.eigenvalues().minCoeff();
  double tau = delta > lmin ? delta - lmin : 0.0;
  if (tau > 0.0) sym.diagonal().array() += tau;
  return sym;
}

namespace {

// Active-set iteration on  min 1/2 z'Hz + q'z  s.t.  Az <= b  from a
// feasible start. H must be positive definite.
QpResult active_set(const Eigen::MatrixXd& h, const Eigen::VectorXd& q,
                    const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                    Eigen::VectorXd z) {
  const int n = static_cast<int>(z.size());
  const int m = static_cast<int>(a.rows());
  const double tol = 1e-11;

  std::vector<int> work;
  work.reserve(static_cast<std::size_t>(n));

  QpResult res;
  for (int iter = 0; iter < 100 + 10 * m; ++iter) {
    res.iterations = iter + 1;
    const int k = static_cast<int>(work.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = h;
    for (int i = 0; i < k; ++i) {
      kkt.block(n + i, 0, 1, n) = a.row(work[static_cast<std::size_t>(i)]);
      kkt.block(0, n + i, n, 1) =
          a.row(work[static_cast<std::size_t>(i)]).transpose();
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + k);
    rhs.head(n) = -(h * z + q);

    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) {
      // dependent working set (degenerate geometry); drop the newest row
      if (!work.empty()) {
        work.pop_back();
        continue;
      }
      break;
    }
    Eigen::VectorXd sol = lu.solve(rhs);
    Eigen::VectorXd d = sol.head(n);
    Eigen::VectorXd lambda = sol.tail(k);

    if (d.lpNorm<Eigen::Infinity>() <= tol) {
      int worst = -1;
      double worst_l = -tol;
      for (int i = 0; i < k; ++i)
        if (lambda(i) < worst_l) {
          worst_l = lambda(i);
          worst = i;
        }
      if (worst < 0) {
        res.z = z;
        return res;
      }
      work.erase(work.begin() + worst);
      continue;
    }

    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < m; ++i) {
      if (std::find(work.begin(), work.end(), i) != work.end()) continue;
      double ad = a.row(i).dot(d);
      if (ad > tol) {
        double ai = (b(i) - a.row(i).dot(z)) / ad;
        if (ai < alpha - 1e-15) {
          alpha = ai;
          blocking = i;
        }
      }
    }
    if (alpha > 0.0) z += std::max(alpha, 0.0) * d;
    if (blocking >= 0) {
      // only keep independent rows in the working set
      Eigen::MatrixXd aw(static_cast<int>(work.size()) + 1, n);
      for (std::size_t i = 0; i < work.size(); ++i) aw.row(static_cast<int>(i)) = a.row(work[i]);
      aw.row(static_cast<int>(work.size())) = a.row(blocking);
      Eigen::FullPivLU<Eigen::MatrixXd> rk(aw);
      if (rk.rank() == aw.rows()) work.push_back(blocking);
    } else if (alpha >= 1.0) {
      // full unconstrained-in-subspace step taken; loop detects optimality
    }
  }
  res.z = z;
  return res;
}

}  // namespace

QpResult solve_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& q,
                  const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                  const std::vector<bool>& soft, const Eigen::VectorXd& z0,
                  double soft_weight) {
  const int n = static_cast<int>(h.rows());
  const int m = static_cast<int>(a.rows());

  int ns = 0;
  for (bool s : soft)
    if (s) ++ns;

  if (ns == 0) {
    for (int i = 0; i < m; ++i)
      if (a.row(i).dot(z0) > b(i) + 1e-9)
        throw std::runtime_error("solve_qp: infeasible start for hard rows");
    return active_set(h, q, a, b, z0);
  }

  // L1 slack on the soft rows: variables [z; s], s >= 0,
  // soft rows become a'z - s_i <= b, objective gains W*s + 1/2*W*s^2.
  Eigen::MatrixXd he = Eigen::MatrixXd::Zero(n + ns, n + ns);
  he.topLeftCorner(n, n) = h;
  for (int i = 0; i < ns; ++i) he(n + i, n + i) = soft_weight;
  Eigen::VectorXd qe = Eigen::VectorXd::Zero(n + ns);
  qe.head(n) = q;
  qe.tail(ns).setConstant(soft_weight);

  Eigen::MatrixXd ae = Eigen::MatrixXd::Zero(m + ns, n + ns);
  Eigen::VectorXd be(m + ns);
  int si = 0;
  Eigen::VectorXd z0e = Eigen::VectorXd::Zero(n + ns);
  z0e.head(n) = z0;
  for (int i = 0; i < m; ++i) {
    ae.block(i, 0, 1, n) = a.row(i);
    be(i) = b(i);
    if (soft[static_cast<std::size_t>(i)]) {
      ae(i, n + si) = -1.0;
      double viol = a.row(i).dot(z0) - b(i);
      z0e(n + si) = std::max(viol, 0.0);
      ++si;
    } else if (a.row(i).dot(z0) > b(i) + 1e-9) {
      throw std::runtime_error("solve_qp: infeasible start for hard rows");
    }
  }
  for (int i = 0; i < ns; ++i) {
    ae(m + i, n + i) = -1.0;  // -s_i <= 0
    be(m + i) = 0.0;
  }

  QpResult full = active_set(he, qe, ae, be, z0e);
  QpResult res;
  res.z = full.z.head(n);
  res.iterations = full.iterations;
  res.max_slack = ns > 0 ? full.z.tail(ns).maxCoeff() : 0.0;
  res.relaxed = res.max_slack > 1e-9;
  return res;
}

QpResult stage_qp(const Eigen::MatrixXd& quu, const Eigen::VectorXd& q_lin,
                  const Eigen::MatrixXd& d, const Eigen::VectorXd& c,
                  const std::vector<bool>& soft_rows, const Eigen::VectorXd& z0) {
  std::vector<bool> soft = soft_rows;
  if (soft.empty()) soft.assign(static_cast<std::size_t>(d.rows()), false);
  return solve_qp(quu, q_lin, d, c, soft, z0);
}

}  // namespace hhv
