#include "hhv/solver_ddp.hpp"

#include <stdexcept>

namespace hhv {

namespace {

// Partials of the reduced stage cost L(x, u) = g(x, F(x, u, w), u, w)
// with second-order dynamics terms neglected.
void compose(const StageCostPartials& c, const Eigen::MatrixXd& fx,
             const Eigen::MatrixXd& fu, Eigen::RowVectorXd& lx,
             Eigen::RowVectorXd& lu, Eigen::MatrixXd& lxx, Eigen::MatrixXd& luu,
             Eigen::MatrixXd& lux) {
  lx = c.gx + c.gn * fx;
  lu = c.gu + c.gn * fu;
  lxx = c.gxx + fx.transpose() * c.gnn * fx + c.gxn * fx +
        fx.transpose() * c.gxn.transpose();
  luu = c.guu + fu.transpose() * c.gnn * fu + c.gun * fu +
        fu.transpose() * c.gun.transpose();
  lux = c.gux + fu.transpose() * c.gnn * fx + c.gun * fx +
        fu.transpose() * c.gxn.transpose();
}

}  // namespace

Nominal DdpSolver::rollout(const Eigen::VectorXd& x0,
                           const std::vector<Eigen::VectorXd>& u,
                           const DisturbanceModel& dist) const {
  const int n_stages = prob_.horizon();
  Nominal nom;
  nom.u = u;
  nom.x.resize(static_cast<std::size_t>(n_stages) + 1);
  nom.x[0] = x0;
  for (int n = 0; n < n_stages; ++n) {
    Eigen::VectorXd xn = Eigen::VectorXd::Zero(prob_.dim_x());
    for (int j = 0; j < dist.count(n); ++j)
      xn += dist.prob(n, j) *
            prob_.dynamics(n, nom.x[static_cast<std::size_t>(n)],
                           u[static_cast<std::size_t>(n)], dist.value(n, j));
    nom.x[static_cast<std::size_t>(n) + 1] = xn;
  }
  return nom;
}

BackwardPassResult DdpSolver::backward_pass(const Nominal& nominal,
                                            const DisturbanceModel& dist) const {
  return backward_pass(nominal, dist, nullptr);
}

BackwardPassResult DdpSolver::backward_pass(
    const Nominal& nominal, const DisturbanceModel& dist,
    const ConstraintProvider* constraints) const {
  const int n_stages = prob_.horizon();
  const int nx = prob_.dim_x();
  const int nu = prob_.dim_u();
  if (static_cast<int>(nominal.x.size()) != n_stages + 1 ||
      static_cast<int>(nominal.u.size()) != n_stages)
    throw std::invalid_argument("backward_pass: nominal length mismatch");

  BackwardPassResult out;
  out.q.resize(static_cast<std::size_t>(n_stages));
  out.v.resize(static_cast<std::size_t>(n_stages) + 1);
  out.diag.resize(static_cast<std::size_t>(n_stages));

  // terminal expansion from h
  {
    ValueExpansion& vt = out.v[static_cast<std::size_t>(n_stages)];
    vt.anchor = nominal.x[static_cast<std::size_t>(n_stages)];
    vt.v0 = prob_.terminal_cost(vt.anchor);
    prob_.terminal_partials(vt.anchor, vt.vx, vt.vxx);
  }

  StageCostPartials cp;
  cp.resize(nx, nu);
  Eigen::MatrixXd fx(nx, nx), fu(nx, nu);
  Eigen::RowVectorXd lx(nx), lu(nu);
  Eigen::MatrixXd lxx(nx, nx), luu(nu, nu), lux(nu, nx);

  for (int n = n_stages - 1; n >= 0; --n) {
    const Eigen::VectorXd& xh = nominal.x[static_cast<std::size_t>(n)];
    const Eigen::VectorXd& uh = nominal.u[static_cast<std::size_t>(n)];
    const ValueExpansion& vnext = out.v[static_cast<std::size_t>(n) + 1];

    QExpansion qe;
    qe.q0 = 0.0;
    qe.qx = Eigen::RowVectorXd::Zero(nx);
    qe.qu = Eigen::RowVectorXd::Zero(nu);
    qe.qxx = Eigen::MatrixXd::Zero(nx, nx);
    qe.quu = Eigen::MatrixXd::Zero(nu, nu);
    qe.qux = Eigen::MatrixXd::Zero(nu, nx);

    for (int j = 0; j < dist.count(n); ++j) {
      const double w = dist.value(n, j);
      const double pj = dist.prob(n, j);
      if (pj == 0.0) continue;

      Eigen::VectorXd xn = prob_.dynamics(n, xh, uh, w);
      // off-anchor evaluation of the next value model
      Eigen::VectorXd dxn = xn - vnext.anchor;
      Eigen::RowVectorXd vx = vnext.vx + (vnext.vxx * dxn).transpose();
      const Eigen::MatrixXd& vxx = vnext.vxx;
      double v0 = vnext.v0 + vnext.vx.dot(dxn) + 0.5 * dxn.dot(vnext.vxx * dxn);

      prob_.dynamics_partials(n, xh, uh, w, fx, fu);
      prob_.cost_partials(n, xh, xn, uh, w, cp);
      compose(cp, fx, fu, lx, lu, lxx, luu, lux);

      qe.q0 += pj * (cp.g + v0);
      qe.qx += pj * (lx + vx * fx);
      qe.qu += pj * (lu + vx * fu);
      qe.qxx += pj * (lxx + fx.transpose() * vxx * fx);
      qe.quu += pj * (luu + fu.transpose() * vxx * fu);
      qe.qux += pj * (lux + fu.transpose() * vxx * fx);
    }

    qe.qxx = 0.5 * (qe.qxx + qe.qxx.transpose());
    qe.quu = 0.5 * (qe.quu + qe.quu.transpose());

    StageDiag& dg = out.diag[static_cast<std::size_t>(n)];
    {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qe.quu);
      dg.lambda_min = es.eigenvalues().minCoeff();
    }
    qe.quu = hessian_floor(qe.quu, cfg_.delta);
    dg.q0 = qe.q0;
    dg.qu_norm = qe.qu.norm();

    // Stage minimizer k and feedback K. When an input box is supplied the
    // clamped components get zero feedback, so the value model never
    // promises corrections a railed input cannot deliver.
    Eigen::VectorXd k(nu);
    Eigen::MatrixXd gain = Eigen::MatrixXd::Zero(nu, nx);
    std::vector<bool> clamped(static_cast<std::size_t>(nu), false);
    if (constraints != nullptr) {
      Eigen::VectorXd lo(nu), hi(nu);
      constraints->input_box(n, xh, lo, hi);
      Eigen::MatrixXd a(2 * nu, nu);
      Eigen::VectorXd b(2 * nu);
      a.setZero();
      for (int i = 0; i < nu; ++i) {
        a(2 * i, i) = 1.0;
        b(2 * i) = hi(i) - uh(i);
        a(2 * i + 1, i) = -1.0;
        b(2 * i + 1) = uh(i) - lo(i);
      }
      Eigen::VectorXd z0(nu);
      for (int i = 0; i < nu; ++i)
        z0(i) = std::clamp(0.0, lo(i) - uh(i), hi(i) - uh(i));
      std::vector<bool> hard(static_cast<std::size_t>(2 * nu), false);
      k = solve_qp(qe.quu, qe.qu.transpose(), a, b, hard, z0).z;
      for (int i = 0; i < nu; ++i)
        clamped[static_cast<std::size_t>(i)] =
            k(i) >= b(2 * i) - 1e-9 || -k(i) >= b(2 * i + 1) - 1e-9;
    } else {
      k = -Eigen::LLT<Eigen::MatrixXd>(qe.quu).solve(qe.qu.transpose());
    }

    std::vector<int> free_idx;
    for (int i = 0; i < nu; ++i)
      if (!clamped[static_cast<std::size_t>(i)]) free_idx.push_back(i);
    if (!free_idx.empty()) {
      const int nf = static_cast<int>(free_idx.size());
      Eigen::MatrixXd quu_ff(nf, nf);
      Eigen::MatrixXd qux_f(nf, nx);
      for (int a = 0; a < nf; ++a) {
        qux_f.row(a) = qe.qux.row(free_idx[static_cast<std::size_t>(a)]);
        for (int b = 0; b < nf; ++b)
          quu_ff(a, b) = qe.quu(free_idx[static_cast<std::size_t>(a)],
                                free_idx[static_cast<std::size_t>(b)]);
      }
      Eigen::MatrixXd kf = -Eigen::LLT<Eigen::MatrixXd>(quu_ff).solve(qux_f);
      for (int a = 0; a < nf; ++a)
        gain.row(free_idx[static_cast<std::size_t>(a)]) = kf.row(a);
    }

    ValueExpansion& ve = out.v[static_cast<std::size_t>(n)];
    ve.anchor = xh;
    ve.vx = qe.qx + qe.qu * gain +
            k.transpose() * (qe.qux + qe.quu * gain);
    ve.vxx = qe.qxx + gain.transpose() * qe.quu * gain +
             gain.transpose() * qe.qux + qe.qux.transpose() * gain;
    ve.vxx = 0.5 * (ve.vxx + ve.vxx.transpose());
    ve.v0 = qe.q0 + qe.qu.dot(k) + 0.5 * k.dot(qe.quu * k);

    out.q[static_cast<std::size_t>(n)] = std::move(qe);
  }
  return out;
}

Nominal DdpSolver::forward_pass(const Nominal& nominal,
                                const BackwardPassResult& bp,
                                const Eigen::VectorXd& x0,
                                const DisturbanceModel& dist,
                                const ConstraintProvider* constraints,
                                std::vector<StageDiag>* diag) const {
  const int n_stages = prob_.horizon();
  const int nx = prob_.dim_x();
  const int nu = prob_.dim_u();

  Nominal out;
  out.x.resize(static_cast<std::size_t>(n_stages) + 1);
  out.u.resize(static_cast<std::size_t>(n_stages));
  out.x[0] = x0;

  Eigen::MatrixXd fx(nx, nx), fu(nx, nu);

  for (int n = 0; n < n_stages; ++n) {
    const Eigen::VectorXd& xh = nominal.x[static_cast<std::size_t>(n)];
    const Eigen::VectorXd& uh = nominal.u[static_cast<std::size_t>(n)];
    const QExpansion& qe = bp.q[static_cast<std::size_t>(n)];
    const Eigen::VectorXd& xb = out.x[static_cast<std::size_t>(n)];

    Eigen::VectorXd dx = xb - xh;
    Eigen::VectorXd q_lin = qe.qu.transpose() + qe.qux * dx;

    Eigen::VectorXd du;
    if (constraints == nullptr) {
      du = -Eigen::LLT<Eigen::MatrixXd>(qe.quu).solve(q_lin);
    } else {
      // linearized expected next state about (x_bar, u_hat)
      Eigen::VectorXd x_pred = Eigen::VectorXd::Zero(nx);
      Eigen::MatrixXd bu = Eigen::MatrixXd::Zero(nx, nu);
      for (int j = 0; j < dist.count(n); ++j) {
        double pj = dist.prob(n, j);
        if (pj == 0.0) continue;
        double w = dist.value(n, j);
        x_pred += pj * prob_.dynamics(n, xb, uh, w);
        prob_.dynamics_partials(n, xb, uh, w, fx, fu);
        bu += pj * fu;
      }

      Eigen::MatrixXd dxr;
      Eigen::VectorXd cxr;
      constraints->state_rows(n, dxr, cxr);
      Eigen::VectorXd lo(nu), hi(nu);
      constraints->input_box(n, xh, lo, hi);

      const int ms = static_cast<int>(dxr.rows());
      const bool trust = cfg_.du_trust.size() == nu;
      const int rows = ms + 2 * nu + (trust ? 2 * nu : 0);
      Eigen::MatrixXd a(rows, nu);
      Eigen::VectorXd b(rows);
      std::vector<bool> soft(static_cast<std::size_t>(rows), false);
      if (ms > 0) {
        a.topRows(ms) = dxr * bu;
        b.head(ms) = cxr - dxr * x_pred;
        for (int i = 0; i < ms; ++i) soft[static_cast<std::size_t>(i)] = true;
      }
      for (int i = 0; i < nu; ++i) {
        a.row(ms + 2 * i).setZero();
        a(ms + 2 * i, i) = 1.0;
        b(ms + 2 * i) = hi(i) - uh(i);
        a.row(ms + 2 * i + 1).setZero();
        a(ms + 2 * i + 1, i) = -1.0;
        b(ms + 2 * i + 1) = uh(i) - lo(i);
      }
      Eigen::VectorXd z0(nu);
      for (int i = 0; i < nu; ++i)
        z0(i) = std::clamp(0.0, std::min(lo(i) - uh(i), hi(i) - uh(i)),
                           hi(i) - uh(i));
      if (trust) {
        // never tighter than the step needed to re-enter the input box
        int base = ms + 2 * nu;
        for (int i = 0; i < nu; ++i) {
          double r = std::max(cfg_.du_trust(i), std::abs(z0(i)));
          a.row(base + 2 * i).setZero();
          a(base + 2 * i, i) = 1.0;
          b(base + 2 * i) = r;
          a.row(base + 2 * i + 1).setZero();
          a(base + 2 * i + 1, i) = -1.0;
          b(base + 2 * i + 1) = r;
        }
      }

      QpResult qp = solve_qp(qe.quu, q_lin, a, b, soft, z0);
      du = qp.z;
      if (diag) {
        (*diag)[static_cast<std::size_t>(n)].qp_relaxed = qp.relaxed;
        (*diag)[static_cast<std::size_t>(n)].max_slack = qp.max_slack;
      }
    }

    Eigen::VectorXd us = uh + du;
    out.u[static_cast<std::size_t>(n)] = us;

    Eigen::VectorXd xn = Eigen::VectorXd::Zero(nx);
    for (int j = 0; j < dist.count(n); ++j) {
      double pj = dist.prob(n, j);
      if (pj == 0.0) continue;
      xn += pj * prob_.dynamics(n, xb, us, dist.value(n, j));
    }
    out.x[static_cast<std::size_t>(n) + 1] = xn;
  }
  return out;
}

Nominal DdpSolver::solve(const Eigen::VectorXd& x0, Nominal warm,
                         const DisturbanceModel& dist_backward,
                         const DisturbanceModel& dist_forward,
                         const ConstraintProvider* constraints,
                         std::vector<StageDiag>* diag) const {
  const int n_stages = prob_.horizon();
  if (static_cast<int>(warm.u.size()) != n_stages)
    throw std::invalid_argument("solve: warm control sequence length");
  if (static_cast<int>(warm.x.size()) != n_stages + 1)
    warm = rollout(x0, warm.u, dist_forward);
  else
    warm.x[0] = x0;

  Nominal nom = std::move(warm);
  for (int it = 0; it < cfg_.sweeps; ++it) {
    BackwardPassResult bp = backward_pass(nom, dist_backward, constraints);
    if (diag) *diag = bp.diag;
    nom = forward_pass(nom, bp, x0, dist_forward, constraints, diag);
  }
  return nom;
}

}  // namespace hhv
