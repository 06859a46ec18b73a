#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "hhv/horizon_problem.hpp"

namespace hhv {

struct SgdmConfig {
  int k_iters = 200;
  double gamma0 = 0.2;
  double eps = 0.1;    // step decay after warmup
  double mu = 0.95;    // momentum
  int warmup = 50;     // constant-step iterations
  // receding-horizon continuation: iterations already taken by earlier
  // invocations advance the decay schedule instead of restarting it
  int k_offset = 0;
  double gamma_min = 0.015;  // step floor so the controller stays adaptive
  // direction-preserving cap on the gradient infinity norm; keeps a
  // pathological rollout (stalled engine far outside the penalty box)
  // from detonating the fixed-step update. Inactive at normal operating
  // magnitudes.
  double grad_clip = 1.0;
};

struct SgdmIterTrace {
  int k;
  double j_sample;
  double grad_norm;
  double gamma;
};

// Monte-Carlo stochastic gradient descent with Nesterov momentum over the
// horizon control sequence. Control sequences are dimU x N matrices.
class SgdmSolver {
 public:
  SgdmSolver(const HorizonProblem& prob, SgdmConfig cfg)
      : prob_(prob), cfg_(cfg) {}

  double horizon_cost(const Eigen::MatrixXd& u_seq, std::span<const double> w_path,
                      const Eigen::VectorXd& x0) const;

  // Forward sensitivity recursion: d x_n / d u_k blocks accumulated into
  // the gradient (blocks with k >= n are identically zero).
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& u_seq,
                           std::span<const double> w_path,
                           const Eigen::VectorXd& x0) const;

  struct Result {
    Eigen::MatrixXd u;
    Eigen::MatrixXd v;
  };

  // sample(k) returns the demand path for iteration k (1-based); with
  // fixed streams the whole solve is deterministic in its inputs.
  Result solve(const Eigen::VectorXd& x0, const Eigen::MatrixXd& warm_u,
               const Eigen::MatrixXd& warm_v,
               const std::function<std::vector<double>(int)>& sample,
               std::vector<SgdmIterTrace>* trace = nullptr) const;

 private:
  const HorizonProblem& prob_;
  SgdmConfig cfg_;
};

}  // namespace hhv
