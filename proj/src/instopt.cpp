#include "hhv/instopt.hpp"

#include <cmath>

namespace hhv {

void InstOpt::reset() {
  p_ref_ = cfg_.p_ref0;
  i_vp_ = i_trim_ = i_spd_ = 0.0;
}

InstOptOutput InstOpt::step(const SystemState& x, double f_cmd, double dt) {
  InstOptOutput out;

  out.v_m = motor_displacement(f_cmd, x.p, x.v, pr_);

  // raise the reference while propulsion is displacement-limited
  bool unmet = out.v_m >= pr_.vm_max * (1.0 - 1e-9) && f_cmd > 0.0;
  if (unmet)
    p_ref_ = std::min(p_ref_ + cfg_.raise_rate * dt, pr_.p_max);
  else
    p_ref_ = std::max(p_ref_ - cfg_.decay_rate * dt, cfg_.p_ref0);

  // pump displacement from PI on the pressure error
  double pe = p_ref_ - x.p;
  i_vp_ += cfg_.ki_vp * pe * dt;
  i_vp_ = std::clamp(i_vp_, 0.0, pr_.vp_max);
  out.v_p = std::clamp(cfg_.kp_vp * pe + i_vp_, 0.0, pr_.vp_max);

  // flow-feasible minimum engine speed (zero when the pump is destroked)
  double n_flow = 0.0;
  if (out.v_p > 1e-9) {
    double motor_flow_disp = std::max(out.v_m, 0.0);
    n_flow = pr_.k2(x.v) * motor_flow_disp * x.v / (pr_.r_tire * pr_.k1 * out.v_p);
  }

  // speed trim when pressure sags below the band
  double trim_err = (p_ref_ - cfg_.eps_band) - x.p;
  if (trim_err > 0.0) {
    i_trim_ += cfg_.ki_trim * trim_err * dt;
    i_trim_ = std::clamp(i_trim_, 0.0, cfg_.n_max);
  } else {
    i_trim_ = std::max(0.0, i_trim_ - 40.0 * dt);  // bleed off
  }
  double n_trim = trim_err > 0.0 ? cfg_.kp_trim * trim_err + i_trim_ : i_trim_;

  double n_cmd = std::clamp(std::max({n_flow, n_trim, cfg_.n_idle}), cfg_.n_idle,
                            cfg_.n_max);

  // torque command tracking the speed command, capped by the engine curve
  double se = n_cmd - x.n_eng;
  double t_max = fm_.torque_max(x.n_eng);
  i_spd_ += cfg_.ki_spd * se * dt;
  i_spd_ = std::clamp(i_spd_, 0.0, t_max);
  out.t_cyl = std::clamp(cfg_.kp_spd * se + i_spd_, 0.0, t_max);

  return out;
}

}  // namespace hhv
