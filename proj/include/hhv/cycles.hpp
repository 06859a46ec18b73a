#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hhv {

// Time-indexed reference speed (and optional elevation) samples for a
// drive cycle. Immutable after load; safe to share between threads.
struct CycleTrace {
  std::string name;
  std::vector<double> t;      // seconds, strictly increasing
  std::vector<double> v_ref;  // m/s, >= 0
  std::vector<double> elev;   // meters; empty when the cycle has no elevation

  bool has_elev() const { return !elev.empty(); }
  std::size_t size() const { return t.size(); }
  double duration() const { return t.empty() ? 0.0 : t.back(); }

  // Linear interpolation between bracketing samples; elevation 0 when
  // absent. Throws std::out_of_range outside [t.front(), t.back()].
  std::pair<double, double> reference_at(double time) const;

  // Reference distance travelled at each sample time (trapezoidal).
  std::vector<double> positions() const;

  // Keep only samples with t <= t_max.
  CycleTrace truncated(double t_max) const;
};

// Parses the cycle CSV schema `t_s,v_ref_mps[,elev_m]`. Throws
// std::runtime_error with the offending line number on parse errors,
// non-monotone time, negative speed, gaps > 2 s, or partial elevation.
CycleTrace load_cycle(const std::string& path);

// Writes the same schema load_cycle reads (round-trips bit-identically).
void save_cycle(const CycleTrace& trace, const std::string& path);

// Stand-in for a recorded urban cycle with altitude: ~15 min, stop-and-go
// then cruise, smooth elevation within +/-10 m, |grade| <= 6%, speeds in
// [0, 20] m/s. Deterministic in the seed.
CycleTrace synth_gps_like_cycle(std::uint64_t seed);

// PI speed-tracking driver converting speed error into a propulsion-force
// command. Integral state is clamped to +/-f_max (anti-windup). One
// instance per simulation loop.
class VirtualDriver {
 public:
  VirtualDriver(double kp, double ki, double f_max);

  // Advances the integral by ki*(v_ref - v)*dt and returns
  // kp*(v_ref - v) + integral.
  double force(double v_ref, double v, double dt);

  double integral() const { return integral_; }
  void reset() { integral_ = 0.0; }

 private:
  double kp_;
  double ki_;
  double f_max_;
  double integral_ = 0.0;
};

}  // namespace hhv
