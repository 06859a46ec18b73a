#pragma once

#include <functional>

#include "hhv/control_model.hpp"
#include "hhv/cost.hpp"
#include "hhv/horizon_problem.hpp"
#include "hhv/solver_ddp.hpp"

namespace hhv {

// The embedded vehicle model + running cost as a horizon problem. The
// grade source and the statistics-derived pressure floor are set once per
// control step; within a solve they are fixed data.
class HhvProblem : public HorizonProblem {
 public:
  HhvProblem(const VehicleParams& pr, const FuelMap& fm, const CostWeights& cw,
             const StageBoxes& bx, int horizon, double dt, bool with_penalty)
      : pr_(pr), fm_(fm), cw_(cw), bx_(bx), horizon_(horizon), dt_(dt),
        with_penalty_(with_penalty) {}

  void set_grade(std::function<double(double)> phi_of_ell) {
    grade_ = std::move(phi_of_ell);
  }
  void set_pressure_floor(double p_set) { p_set_ = p_set; }

  double grade_at(double ell) const { return grade_ ? grade_(ell) : 0.0; }
  double pressure_floor() const { return p_set_; }
  const VehicleParams& params() const { return pr_; }
  const FuelMap& fuel_map() const { return fm_; }
  const CostWeights& weights() const { return cw_; }
  const StageBoxes& boxes() const { return bx_; }
  double dt() const { return dt_; }

  int dim_x() const override { return 4; }
  int dim_u() const override { return 2; }
  int horizon() const override { return horizon_; }

  Eigen::VectorXd dynamics(int n, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u, double w) const override;
  void dynamics_partials(int n, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double w, Eigen::MatrixXd& fx,
                         Eigen::MatrixXd& fu) const override;
  double cost(int n, const Eigen::VectorXd& x, const Eigen::VectorXd& x_next,
              const Eigen::VectorXd& u, double w) const override;
  void cost_partials(int n, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& x_next, const Eigen::VectorXd& u,
                     double w, StageCostPartials& out) const override;

 private:
  VehicleParams pr_;
  FuelMap fm_;
  CostWeights cw_;
  StageBoxes bx_;
  int horizon_;
  double dt_;
  bool with_penalty_;
  std::function<double(double)> grade_;
  double p_set_ = 0.0;
};

// Engine-speed and pressure boxes on the expected trajectory plus the
// input box with the torque cap evaluated at the nominal engine speed.
class HhvConstraints : public ConstraintProvider {
 public:
  HhvConstraints(const StageBoxes& bx, const FuelMap& fm, double m1)
      : bx_(bx), fm_(fm), m1_(m1) {}

  void state_rows(int, Eigen::MatrixXd& dx, Eigen::VectorXd& cx) const override {
    dx = Eigen::MatrixXd::Zero(4, 4);
    cx = Eigen::VectorXd::Zero(4);
    dx(0, 2) = 1.0;
    cx(0) = bx_.n_max;
    dx(1, 2) = -1.0;
    cx(1) = -bx_.n_min;
    dx(2, 3) = 1.0;
    cx(2) = bx_.p_max;
    dx(3, 3) = -1.0;
    cx(3) = -bx_.p_min;
  }

  void input_box(int, const Eigen::VectorXd& x_nom, Eigen::VectorXd& lo,
                 Eigen::VectorXd& hi) const override {
    lo = Eigen::VectorXd(2);
    hi = Eigen::VectorXd(2);
    lo << bx_.u1_min, bx_.u2_min;
    hi << std::min(bx_.u1_max, fm_.torque_max(x_nom(2)) / m1_), bx_.u2_max;
    if (hi(0) < lo(0)) hi(0) = lo(0);
  }

 private:
  StageBoxes bx_;
  FuelMap fm_;
  double m1_;
};

}  // namespace hhv
