#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hhv {

struct VehicleParams;

// 19 demand levels evenly spaced on [-3, 3] m/s^2.
struct DemandGrid {
  static constexpr int kLevels = 19;
  static constexpr double kMin = -3.0;
  static constexpr double kMax = 3.0;

  static constexpr double spacing() { return (kMax - kMin) / (kLevels - 1); }
  static double level(int i);  // 0-based index -> m/s^2

  // Nearest level, saturating outside [-3, 3]; half-way ties round toward
  // zero. Throws std::invalid_argument on non-finite input. 0-based.
  static int quantize(double w);
};

// Row-stochastic transition matrix over the demand grid with a first-order
// learning filter. Single writer; share read-only snapshots between
// control steps.
class MarkovModel {
 public:
  MarkovModel() : MarkovModel(0.025) {}
  explicit MarkovModel(double alpha);

  static MarkovModel uniform(double alpha = 0.025);
  // Each row a discretized normal centered on its own level,
  // sigma in units of grid steps, renormalized.
  static MarkovModel gaussian_init(double sigma_steps = 2.0, double alpha = 0.025);

  const Eigen::MatrixXd& P() const { return P_; }
  double alpha() const { return alpha_; }

  // Row i_prev <- alpha*1{j=i_next} + (1-alpha)*row; other rows untouched.
  void learn(int i_prev, int i_next);

  // Matrix power P^n (n=0 gives identity).
  Eigen::MatrixXd multi_step(int n) const;

  // Rows of P^n for n = 0..N conditioned on i0: result(n, j) = [P^n]_{i0 j}.
  Eigen::MatrixXd multi_step_rows(int i0, int n_max) const;

  // Long-run occupation distribution via power iteration of P^(n) (repeated
  // squaring until all rows agree within tol). Throws std::runtime_error if
  // the chain is not irreducible and aperiodic (no strictly positive power
  // up to (k-1)^2+1) or does not converge.
  Eigen::VectorXd stationary(double tol = 1e-13) const;

  // E[w_n | w_0 = level i0] and Var[w_n | ...] for n = 0..N.
  void demand_moments(int i0, int n_max, Eigen::VectorXd& mean,
                      Eigen::VectorXd& var) const;

  // Path of N demand values from CDF inversion of successive rows using
  // the supplied uniforms (needs N-1 of them); path[0] is level i0.
  std::vector<double> sample_path(int i0, std::span<const double> omegas,
                                  int n) const;

  // Throws if any row sum is off by more than 1e-12 or entries leave [0,1].
  void validate() const;

  void set_matrix(const Eigen::MatrixXd& P);

 private:
  Eigen::MatrixXd P_;
  double alpha_;
};

// Long-run occupation distribution of an arbitrary row-stochastic matrix
// (power iteration by repeated squaring). Same preconditions as
// MarkovModel::stationary.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P,
                                        double tol = 1e-13);

// alpha*w_ave+ + beta*w_std+ over the non-negative demand levels of the
// stationary distribution. Throws if the non-negative levels carry no mass.
double accel_setpoint(const MarkovModel& m, double alpha_w, double beta_w);

// Acceleration demand implied by a propulsion-force command at the current
// operating point: w = [F - drag - m g (Cr cos(phi) + sin(phi))] / m.
double observe_demand(double f_cmd, double v, double phi,
                      const VehicleParams& pr);

// One chain for low-speed driving, one for the rest.
struct DualSpeedModel {
  MarkovModel low;
  MarkovModel high;
  double v_switch = 10.0;  // m/s

  MarkovModel& active(double v) { return v < v_switch ? low : high; }
  const MarkovModel& active(double v) const { return v < v_switch ? low : high; }
};

// K fixed uniform streams of length len, regenerable bit-identically from
// the seed (the Monte-Carlo solver reuses them every control step).
struct RandomStreams {
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> omega;  // K x len

  static RandomStreams generate(int k, int len, std::uint64_t seed);
};

// JSON persistence: {alpha, grid, P (row-major), v_switch, which}.
void save_model(const MarkovModel& m, double v_switch, const std::string& which,
                const std::string& path);
MarkovModel load_model(const std::string& path, double* v_switch = nullptr,
                       std::string* which = nullptr);
void save_dual_model(const DualSpeedModel& m, const std::string& path);
DualSpeedModel load_dual_model(const std::string& path);

}  // namespace hhv
