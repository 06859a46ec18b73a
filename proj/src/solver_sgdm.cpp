#include "hhv/solver_sgdm.hpp"

#include <stdexcept>

namespace hhv {

double SgdmSolver::horizon_cost(const Eigen::MatrixXd& u_seq,
                                std::span<const double> w_path,
                                const Eigen::VectorXd& x0) const {
  const int n_stages = prob_.horizon();
  if (u_seq.cols() != n_stages || static_cast<int>(w_path.size()) < n_stages)
    throw std::invalid_argument("horizon_cost: sequence length");
  double j = 0.0;
  Eigen::VectorXd x = x0;
  for (int n = 0; n < n_stages; ++n) {
    Eigen::VectorXd xn = prob_.dynamics(n, x, u_seq.col(n), w_path[n]);
    j += prob_.cost(n, x, xn, u_seq.col(n), w_path[n]);
    x = xn;
  }
  return j + prob_.terminal_cost(x);
}

Eigen::MatrixXd SgdmSolver::gradient(const Eigen::MatrixXd& u_seq,
                                     std::span<const double> w_path,
                                     const Eigen::VectorXd& x0) const {
  const int n_stages = prob_.horizon();
  const int nx = prob_.dim_x();
  const int nu = prob_.dim_u();
  if (u_seq.cols() != n_stages || static_cast<int>(w_path.size()) < n_stages)
    throw std::invalid_argument("gradient: sequence length");

  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(nu, n_stages);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(nx, n_stages * nu);
  Eigen::MatrixXd fx(nx, nx), fu(nx, nu);
  StageCostPartials cp;
  cp.resize(nx, nu);

  auto add_row = [&](const Eigen::RowVectorXd& row) {
    for (int k = 0; k < n_stages; ++k)
      grad.col(k) += row.segment(k * nu, nu).transpose();
  };

  Eigen::VectorXd x = x0;
  for (int n = 0; n < n_stages; ++n) {
    Eigen::VectorXd xn = prob_.dynamics(n, x, u_seq.col(n), w_path[n]);
    prob_.dynamics_partials(n, x, u_seq.col(n), w_path[n], fx, fu);
    prob_.cost_partials(n, x, xn, u_seq.col(n), w_path[n], cp);

    Eigen::MatrixXd c_next = fx * c;
    c_next.block(0, n * nu, nx, nu) += fu;

    add_row(cp.gx * c + cp.gn * c_next);
    grad.col(n) += cp.gu.transpose();

    c = std::move(c_next);
    x = xn;
  }

  Eigen::RowVectorXd hx;
  Eigen::MatrixXd hxx;
  prob_.terminal_partials(x, hx, hxx);
  if (hx.squaredNorm() > 0.0) add_row(hx * c);
  return grad;
}

SgdmSolver::Result SgdmSolver::solve(
    const Eigen::VectorXd& x0, const Eigen::MatrixXd& warm_u,
    const Eigen::MatrixXd& warm_v,
    const std::function<std::vector<double>(int)>& sample,
    std::vector<SgdmIterTrace>* trace) const {
  const int n_stages = prob_.horizon();
  if (warm_u.cols() != n_stages || warm_v.cols() != n_stages)
    throw std::invalid_argument("solve: warm sequence length");

  Result r{warm_u, warm_v};
  for (int k = 1; k <= cfg_.k_iters; ++k) {
    std::vector<double> w = sample(k);
    Eigen::MatrixXd g = gradient(r.u + cfg_.mu * r.v, w, x0);
    if (cfg_.grad_clip > 0.0) {
      double mag = g.cwiseAbs().maxCoeff();
      if (mag > cfg_.grad_clip) g *= cfg_.grad_clip / mag;  // keep direction
    }
    int ks = k + cfg_.k_offset;
    double gamma = ks <= cfg_.warmup
                       ? cfg_.gamma0
                       : cfg_.gamma0 / (1.0 + (ks - cfg_.warmup - 1) * cfg_.eps);
    gamma = std::max(gamma, cfg_.gamma_min);
    r.v = cfg_.mu * r.v - gamma * g;
    r.u += r.v;
    if (trace)
      trace->push_back({k, horizon_cost(r.u, w, x0), g.norm(), gamma});
  }
  return r;
}

}  // namespace hhv
