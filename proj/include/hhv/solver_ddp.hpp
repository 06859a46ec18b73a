#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hhv/horizon_problem.hpp"
#include "hhv/qp.hpp"

namespace hhv {

// Quadratic local model of the stage state-control value function.
struct QExpansion {
  double q0 = 0.0;
  Eigen::RowVectorXd qx, qu;
  Eigen::MatrixXd qxx, quu, qux;  // quu already floored
};

// Quadratic local model of the cost-to-go around the nominal anchor.
struct ValueExpansion {
  double v0 = 0.0;
  Eigen::RowVectorXd vx;  // "A" in the backward recursion
  Eigen::MatrixXd vxx;    // "B"
  Eigen::VectorXd anchor;
};

struct StageDiag {
  double q0 = 0.0;
  double qu_norm = 0.0;
  double lambda_min = 0.0;  // of Quu before flooring
  bool qp_relaxed = false;
  double max_slack = 0.0;
};

// Box constraints for the stage subproblem; the input box may vary per
// stage (engine torque cap evaluated at the nominal engine speed).
class ConstraintProvider {
 public:
  virtual ~ConstraintProvider() = default;
  // rows Dx * x_next <= cx on the expected next state; empty when none
  virtual void state_rows(int n, Eigen::MatrixXd& dx, Eigen::VectorXd& cx) const = 0;
  // absolute input box [lo, hi] for stage n given the nominal state
  virtual void input_box(int n, const Eigen::VectorXd& x_nom, Eigen::VectorXd& lo,
                         Eigen::VectorXd& hi) const = 0;
};

struct DdpConfig {
  double delta = 0.003;  // Hessian eigenvalue floor
  int sweeps = 1;        // backward/forward passes per call
  // optional per-component bound on the stage input update in the
  // constrained forward pass; damps chatter on stiff stages without
  // moving the converged fixed point (empty = unbounded)
  Eigen::VectorXd du_trust;
};

struct Nominal {
  std::vector<Eigen::VectorXd> x;  // N+1
  std::vector<Eigen::VectorXd> u;  // N
};

struct BackwardPassResult {
  std::vector<QExpansion> q;       // N
  std::vector<ValueExpansion> v;   // N+1 (terminal included)
  std::vector<StageDiag> diag;     // N
};

class DdpSolver {
 public:
  DdpSolver(const HorizonProblem& prob, DdpConfig cfg)
      : prob_(prob), cfg_(cfg) {}

  // Expected-trajectory rollout of a control sequence under the given
  // disturbance weighting.
  Nominal rollout(const Eigen::VectorXd& x0,
                  const std::vector<Eigen::VectorXd>& u,
                  const DisturbanceModel& dist) const;

  // Probability-weighted value recursion around the nominal. When an
  // input box is supplied, clamped input components carry no feedback in
  // the value expansion (control-limited recursion).
  BackwardPassResult backward_pass(const Nominal& nominal,
                                   const DisturbanceModel& dist) const;
  BackwardPassResult backward_pass(const Nominal& nominal,
                                   const DisturbanceModel& dist,
                                   const ConstraintProvider* constraints) const;

  // Stage-wise constrained re-simulation with feedback. `constraints` may
  // be null for the unconstrained update.
  Nominal forward_pass(const Nominal& nominal, const BackwardPassResult& bp,
                       const Eigen::VectorXd& x0, const DisturbanceModel& dist,
                       const ConstraintProvider* constraints,
                       std::vector<StageDiag>* diag = nullptr) const;

  // sweeps x (backward + forward). dist_backward drives the value
  // recursion, dist_forward the expected-state propagation (they differ
  // for the averaged-path variant).
  Nominal solve(const Eigen::VectorXd& x0, Nominal warm,
                const DisturbanceModel& dist_backward,
                const DisturbanceModel& dist_forward,
                const ConstraintProvider* constraints,
                std::vector<StageDiag>* diag = nullptr) const;

 private:
  const HorizonProblem& prob_;
  DdpConfig cfg_;
};

}  // namespace hhv
