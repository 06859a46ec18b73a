#pragma once

#include <string>

#include "hhv/control_model.hpp"
#include "hhv/cost.hpp"
#include "hhv/instopt.hpp"
#include "hhv/plant.hpp"
#include "hhv/solver_ddp.hpp"
#include "hhv/solver_sgdm.hpp"
#include "hhv/terrain.hpp"

namespace hhv {

struct DriverGains {
  double kp = 8000.0;  // N per m/s
  double ki = 3000.0;  // N per m
};

// Everything a simulation run needs; JSON-overridable, ships with defaults.
struct SimConfig {
  VehicleParams vehicle;
  FuelMap fuel;
  CostWeights cost;
  StageBoxes boxes;
  SgdmConfig sgdm;
  DdpConfig ddp;
  InstOptConfig instopt;
  PlantConfig plant;
  DriverGains driver;
  GradeGrid grade_grid;

  double dt_model = 1.0;   // s, embedded-model stage length
  int horizon = 12;        // stages
  double t_s = 0.1;        // s, control period
  double dt_plant = 0.01;  // s, actuation tick
  double learn_dt = 1.0;   // s, driver-model sampling period
  double markov_alpha = 0.025;
  double gauss_sigma = 2.0;  // grid steps, learning initialization
  double v_switch = 10.0;    // m/s, low/high model boundary
  double p_set_min = 100.0e5;  // Pa, floor on the statistics-derived target
  bool sgdm_reset_momentum = false;  // zero the velocity at each control step
  bool engine_speed_mode = false;  // speed-interpolation handoff
};

SimConfig default_config();
// Missing fields fall back to defaults; unknown fields are rejected.
SimConfig load_config(const std::string& path);
void save_config(const SimConfig& c, const std::string& path);

}  // namespace hhv
