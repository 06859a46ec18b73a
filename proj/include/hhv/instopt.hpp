#pragma once

#include "hhv/control_model.hpp"

namespace hhv {

struct InstOptConfig {
  double p_ref0 = 150.0e5;     // Pa, nominal reference pressure
  double eps_band = 5.0e5;     // Pa, trim activation band
  double raise_rate = 2.0e5;   // Pa/s while demand unmet
  double decay_rate = 1.0e5;   // Pa/s back toward nominal
  double kp_vp = 4.0e-11;      // m^3/rev per Pa
  double ki_vp = 2.0e-11;      // m^3/rev per Pa*s
  double kp_trim = 2.0e-5;     // rad/s per Pa
  double ki_trim = 2.0e-5;     // rad/s per Pa*s
  double kp_spd = 4.0;         // N*m per rad/s
  double ki_spd = 6.0;         // N*m per rad/s*s
  double n_idle = 80.0;        // rad/s
  double n_max = 523.6;        // rad/s
};

struct InstOptOutput {
  double t_cyl = 0.0;  // N*m command
  double v_p = 0.0;    // m^3/rev
  double v_m = 0.0;    // m^3/rev
};

// Instantaneous-optimization baseline: PI pressure hold on the pump,
// flow-feasible minimum engine speed with a low-pressure trim, reference
// pressure raised while propulsion demand is unmet. Causal: uses only
// current measurements and internal state. Runs at the actuation tick.
class InstOpt {
 public:
  InstOpt(InstOptConfig cfg, const VehicleParams& pr, const FuelMap& fm)
      : cfg_(cfg), pr_(pr), fm_(fm), p_ref_(cfg.p_ref0) {}

  InstOptOutput step(const SystemState& x, double f_cmd, double dt);

  double p_ref() const { return p_ref_; }
  void reset();

 private:
  InstOptConfig cfg_;
  VehicleParams pr_;
  FuelMap fm_;
  double p_ref_;
  double i_vp_ = 0.0;
  double i_trim_ = 0.0;
  double i_spd_ = 0.0;
};

}  // namespace hhv
