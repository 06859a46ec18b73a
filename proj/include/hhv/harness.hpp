#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hhv/config.hpp"
#include "hhv/cycles.hpp"
#include "hhv/driver_model.hpp"

namespace hhv {

enum class Algo { kSgdm, kAsddp, kApddp, kDdp, kInstOpt };

Algo algo_from_string(const std::string& s);
std::string algo_name(Algo a);

struct RunConfig {
  Algo algo = Algo::kAsddp;
  double max_time = -1.0;  // s, truncate the cycle; <=0 keeps it whole
  std::uint64_t seed = 1;
  SimConfig sim;
};

struct LogRow {
  double t, v_ref, v, f_cmd, f_act, n_eng, p, p_im, t_cyl, v_p, v_m, b_f, grade;
};

struct RunMetrics {
  double fuel_g = 0.0;
  double tracking_m_per_km = 0.0;
  double runtime_s = 0.0;
  double solver_ms_p50 = 0.0;
  double solver_ms_p95 = 0.0;
  bool fault = false;
  std::string fault_message;
};

// Trapezoidal integral of the fuel-rate column.
double fuel_metric(const std::vector<LogRow>& log);

// Distance-normalized speed-error integral gated by the
// motor-displacement-at-clamp indicator (clamp equality within 1e-9
// relative). Throws on zero-distance cycles.
double tracking_metric(const std::vector<LogRow>& log, double vm_max);

void write_log_csv(const std::string& path, const std::vector<LogRow>& rows);
void write_summary_json(const std::string& path, const std::string& algo,
                        const std::string& cycle, const RunMetrics& m,
                        std::uint64_t seed);

// One closed-loop pass over the cycle: plant at dt_plant, controller at
// t_s, motor displacement re-inverted every tick, driver-model learning at
// learn_dt (when `learn`). `stats` persists across calls.
RunMetrics run_closed_loop(const RunConfig& rc, const CycleTrace& trace,
                           DualSpeedModel& stats, bool learn,
                           std::vector<LogRow>* log_out);

// Repeats the cycle, carrying the learned statistics between runs.
std::vector<RunMetrics> experiment_progression(const RunConfig& rc,
                                               const CycleTrace& trace,
                                               int n_runs, DualSpeedModel& stats,
                                               bool freeze_learning = false);

// Run 0 with frozen (foreign) statistics, then adaptive runs.
std::vector<RunMetrics> experiment_crosstrain(const RunConfig& rc,
                                              const CycleTrace& trace,
                                              int n_runs, DualSpeedModel& stats);

// Drive-cycle statistics from the reference kinematics alone (the demand a
// perfectly tracking driver would issue), at the learning sample rate.
DualSpeedModel learn_stats_from_cycle(const CycleTrace& trace, int passes,
                                      const SimConfig& cfg);

DualSpeedModel fresh_stats(const SimConfig& cfg);

}  // namespace hhv
