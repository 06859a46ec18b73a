#include "hhv/hhv_problem.hpp"

namespace hhv {

namespace {
SystemState to_state(const Eigen::VectorXd& x) {
  return {x(0), x(1), x(2), x(3)};
}
ControlInput to_input(const Eigen::VectorXd& u) { return {u(0), u(1)}; }
}  // namespace

Eigen::VectorXd HhvProblem::dynamics(int, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& u, double w) const {
  SystemState s = to_state(x);
  return step(s, to_input(u), w, grade_at(s.ell), dt_, pr_).vec();
}

void HhvProblem::dynamics_partials(int, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u, double w,
                                   Eigen::MatrixXd& fx,
                                   Eigen::MatrixXd& fu) const {
  SystemState s = to_state(x);
  Eigen::Matrix4d fx4;
  Eigen::Matrix<double, 4, 2> fu4;
  discrete_jacobians(s, to_input(u), w, grade_at(s.ell), dt_, pr_, fx4, fu4);
  fx = fx4;
  fu = fu4;
}

double HhvProblem::cost(int, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& x_next, const Eigen::VectorXd& u,
                        double w) const {
  SystemState s = to_state(x);
  // single evaluation path with cost_partials (same p* capping)
  CostTerms ct = stage_cost_terms(s, to_state(x_next), to_input(u), w,
                                  grade_at(s.ell), p_set_, cw_, fm_, pr_,
                                  with_penalty_, bx_);
  return ct.g;
}

void HhvProblem::cost_partials(int, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& x_next,
                               const Eigen::VectorXd& u, double w,
                               StageCostPartials& out) const {
  SystemState s = to_state(x);
  CostTerms ct = stage_cost_terms(s, to_state(x_next), to_input(u), w,
                                  grade_at(s.ell), p_set_, cw_, fm_, pr_,
                                  with_penalty_, bx_);
  out.g = ct.g;
  out.gx = ct.gx;
  out.gn = ct.gn;
  out.gu = ct.gu;
  out.gxx = ct.gxx;
  out.gnn = ct.gnn;
  out.gxn = ct.gxn;
  out.guu = ct.guu;
  out.gux = ct.gux;
  out.gun = ct.gun;
}

}  // namespace hhv
