#pragma once

#include <Eigen/Dense>

namespace hhv {

// Adds tau*I with tau = max(0, delta - lambda_min) so that the smallest
// eigenvalue of the (symmetric) input is at least delta.
Eigen::MatrixXd hessian_floor(const Eigen::MatrixXd& quu, double delta);

struct QpResult {
  Eigen::VectorXd z;
  bool relaxed = false;     // true when soft rows had to be violated
  double max_slack = 0.0;   // largest soft-row violation
  int iterations = 0;
};

// Primal active-set method for
//   min 1/2 z'Hz + q'z   s.t.  Az <= b
// with H symmetric positive definite. Rows flagged soft are relaxed with
// an L1 slack (weight soft_weight) instead of failing when the row set is
// infeasible; hard rows must admit the all-slack start point z0.
// Throws std::runtime_error when no feasible start exists.
QpResult solve_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& q,
                  const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                  const std::vector<bool>& soft, const Eigen::VectorXd& z0,
                  double soft_weight = 1.0e6);

// Convenience wrapper for the stage subproblem: all rows hard unless
// marked, start point feasible for the input box assumed to be row-built.
QpResult stage_qp(const Eigen::MatrixXd& quu, const Eigen::VectorXd& q_lin,
                  const Eigen::MatrixXd& d, const Eigen::VectorXd& c,
                  const std::vector<bool>& soft_rows, const Eigen::VectorXd& z0);

}  // namespace hhv
