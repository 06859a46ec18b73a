#pragma once

#include <string>

#include "hhv/control_model.hpp"

namespace hhv {

struct EngineParams {
  double r_gas = 287.0;     // J/(kg*K)
  double t_im = 300.0;      // K
  double eta_v = 0.85;
  double eta_t = 0.40;
  double v_d = 3.0e-3;      // m^3
  double v_im = 3.5e-3;     // m^3
  double afr = 14.6;
  double q_lhv = 44.0e6;    // J/kg
  double p_amb = 101325.0;  // Pa
};

struct ThrottlePiGains {
  double kp = 4.0e-4;  // kg/s per N*m
  double ki = 4.0e-3;
  double w_max = 0.25;  // kg/s
};

struct PlantConfig {
  EngineParams eng;
  ThrottlePiGains throttle;
  // The plant's loss maps are the embedded model's polynomial families with
  // coefficients scaled by (1 + loss_perturb): the controller model is
  // deliberately imperfect. Set 0 for model-equivalence tests.
  double loss_perturb = 0.10;
  double dt_rk4 = 0.01;  // s, integration substep ceiling
};

// T_cyl = eta_t*eta_v*Q_lhv*V_d*p_im / (4*pi*R*T_im*AFR)
double cylinder_torque(double p_im, const EngineParams& ep);

class ThrottlePi {
 public:
  explicit ThrottlePi(ThrottlePiGains g) : g_(g) {}
  double update(double t_cmd, double t_act, double dt);
  void reset() { integral_ = 0.0; }

 private:
  ThrottlePiGains g_;
  double integral_ = 0.0;
};

struct PlantState {
  double ell = 0.0;
  double v = 0.0;
  double n_eng = 0.0;
  double p = 0.0;     // differential pressure, Pa
  double p_im = 0.0;  // intake manifold pressure, Pa

  SystemState system() const { return {ell, v, n_eng, p}; }
};

// Full-fidelity simulation plant: longitudinal dynamics, engine speed +
// intake manifold with throttle PI, pressure dynamics with perturbed loss
// maps, two-speed output gear, relief at p_max. Single owner per run.
class Plant {
 public:
  Plant(const VehicleParams& pr, const PlantConfig& cfg);

  void reset(const PlantState& s);
  // overwrite the physical state, keeping controller internals (throttle
  // integral) and the fault latch
  void set_state(const PlantState& s) { s_ = s; }

  // One actuation tick: throttle PI update then RK4 over dt (dt <= 0.01 s
  // enforced by splitting). Commands held constant over the tick.
  void step(double t_cyl_cmd, double v_p, double v_m, double phi, double dt);

  const PlantState& state() const { return s_; }
  double t_cyl_act() const { return cylinder_torque(s_.p_im, cfg_.eng); }
  double f_p(double v_m) const;  // propulsion force at current state

  bool fault() const { return fault_; }
  const std::string& fault_message() const { return fault_msg_; }

  const LossModel& pump_loss() const { return pump_loss_; }
  const LossModel& motor_loss() const { return motor_loss_; }

 private:
  Eigen::Matrix<double, 5, 1> rhs(const Eigen::Matrix<double, 5, 1>& x,
                                  double w_thr, double v_p, double v_m,
                                  double phi) const;

  VehicleParams pr_;
  PlantConfig cfg_;
  LossModel pump_loss_;
  LossModel motor_loss_;
  ThrottlePi throttle_;
  PlantState s_;
  bool fault_ = false;
  std::string fault_msg_;
};

}  // namespace hhv
