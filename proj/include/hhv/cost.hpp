#pragma once

#include <Eigen/Dense>

#include "hhv/control_model.hpp"

namespace hhv {

struct CostWeights {
  double k1 = 2.533e-3;  // (engine-speed change)^2, 0.1 per (rev/s)^2
  double k2 = 1.0;      // fuel rate
  double k3 = 5.0e-13;  // Pa^-2, pressure shortfall
  double b0 = 0.3;      // engine-speed box penalty
  double b1 = 2.0;      // input box penalty
  double b2 = 5.0;      // torque-curve penalty
  double alpha_w = 1.0;
  double beta_w = 1.25;
  // APDDP evaluates only the averaged demand path, so its pressure terms
  // are inflated to compensate.
  double apddp_k3_gain = 1.5;
  double apddp_setpoint_gain = 1.5;
};

// Boxes shared by the penalty terms and the DDP stage constraints.
struct StageBoxes {
  double n_min = 80.0;
  double n_max = 523.6;
  double p_min = 20.0e5;
  double p_max = 350.0e5;
  double u1_min = 0.0;
  double u1_max = 102.0;  // t_abs_max / m1
  double u2_min = 0.0;
  double u2_max = 4.2;    // vp_max / m2
};

// p_req: pressure at which max motor displacement satisfies the force
// command (losses evaluated at the state's own pressure and motor speed).
double pressure_required(double f_cmd, double v, double p, const VehicleParams& pr);

// p_set: statistics-derived floor from F_p^set = m_veh * w_set.
double pressure_setpoint(double w_set, double v, double p, const VehicleParams& pr);

// p* = max(p_req, p_set).
double pressure_target(double w, double v, double phi, double p_set,
                       const SystemState& x, const VehicleParams& pr);

// g = K1*(n' - n)^2 + K2*b_f(n, m1*u1) + K3*(p - p*)^2 * 1{p < p*}
double running_cost(const SystemState& x, const SystemState& x_next,
                    const ControlInput& u, double p_star, const CostWeights& cw,
                    const FuelMap& fm, const VehicleParams& pr);

// One-sided quadratic penalties on the engine-speed box, the input box,
// and torque commands above the max-torque curve. Zero on the interior.
double penalty(const SystemState& x, const ControlInput& u, const CostWeights& cw,
               const FuelMap& fm, const VehicleParams& pr, const StageBoxes& bx);

// Probability-weighted stage cost over disturbance outcomes.
double expected_running_cost(const SystemState& x,
                             const std::vector<SystemState>& x_next_per_j,
                             const ControlInput& u,
                             const Eigen::VectorXd& probs,
                             const std::vector<double>& p_star_per_j,
                             const CostWeights& cw, const FuelMap& fm,
                             const VehicleParams& pr);

// Value and raw partials of the stage cost with respect to (x, x_next, u),
// second order. Used by the solvers; the p* state dependence (through the
// drag and loss terms of p_req) is included.
struct CostTerms {
  double g = 0.0;
  Eigen::RowVector4d gx = Eigen::RowVector4d::Zero();
  Eigen::RowVector4d gn = Eigen::RowVector4d::Zero();  // wrt x_next
  Eigen::RowVector2d gu = Eigen::RowVector2d::Zero();
  Eigen::Matrix4d gxx = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d gnn = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d gxn = Eigen::Matrix4d::Zero();  // d2g / dx dx_next
  Eigen::Matrix2d guu = Eigen::Matrix2d::Zero();
  Eigen::Matrix<double, 2, 4> gux = Eigen::Matrix<double, 2, 4>::Zero();
  Eigen::Matrix<double, 2, 4> gun = Eigen::Matrix<double, 2, 4>::Zero();
};

CostTerms stage_cost_terms(const SystemState& x, const SystemState& x_next,
                           const ControlInput& u, double w, double phi,
                           double p_set, const CostWeights& cw, const FuelMap& fm,
                           const VehicleParams& pr, bool with_penalty,
                           const StageBoxes& bx);

}  // namespace hhv
