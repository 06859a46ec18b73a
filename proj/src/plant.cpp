#include "hhv/plant.hpp"

#include <cmath>

namespace hhv {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kFourPi = 4.0 * M_PI;
}  // namespace

double cylinder_torque(double p_im, const EngineParams& ep) {
  return ep.eta_t * ep.eta_v * ep.q_lhv * ep.v_d * p_im /
         (kFourPi * ep.r_gas * ep.t_im * ep.afr);
}

double ThrottlePi::update(double t_cmd, double t_act, double dt) {
  double err = t_cmd - t_act;
  integral_ += g_.ki * err * dt;
  integral_ = std::clamp(integral_, 0.0, g_.w_max);
  return std::clamp(g_.kp * err + integral_, 0.0, g_.w_max);
}

Plant::Plant(const VehicleParams& pr, const PlantConfig& cfg)
    : pr_(pr),
      cfg_(cfg),
      pump_loss_(pr.pump_loss.scaled(1.0 + cfg.loss_perturb)),
      motor_loss_(pr.motor_loss.scaled(1.0 + cfg.loss_perturb)),
      throttle_(cfg.throttle) {}

void Plant::reset(const PlantState& s) {
  s_ = s;
  fault_ = false;
  fault_msg_.clear();
  throttle_.reset();
}

double Plant::f_p(double v_m) const {
  v_m = std::clamp(v_m, -pr_.vm_max, pr_.vm_max);
  double k2 = pr_.k2(s_.v);
  double n_m = k2 * s_.v / pr_.r_tire;
  double t_hyd = v_m * s_.p / kTwoPi;
  double loss = motor_loss_.torque(s_.p, n_m);
  if (s_.v > 1e-3) return (t_hyd - loss) * k2 / pr_.r_tire;
  // at rest the loss torque is friction: it can only oppose, never drive
  double mag = std::max(0.0, std::abs(t_hyd) - loss);
  return (t_hyd >= 0.0 ? mag : -mag) * k2 / pr_.r_tire;
}

Eigen::Matrix<double, 5, 1> Plant::rhs(const Eigen::Matrix<double, 5, 1>& x,
                                       double w_thr, double v_p, double v_m,
                                       double phi) const {
  const double v = std::max(x(1), 0.0);
  const double n = std::max(x(2), 0.0);
  const double p = x(3);
  const double p_im = x(4);
  const double k2 = pr_.k2(v);
  const EngineParams& ep = cfg_.eng;

  double n_m = k2 * v / pr_.r_tire;
  double t_hyd = v_m * p / kTwoPi;
  double m_loss = motor_loss_.torque(p, n_m);
  double fp;
  if (v > 1e-3) {
    fp = (t_hyd - m_loss) * k2 / pr_.r_tire;
  } else {
    double mag = std::max(0.0, std::abs(t_hyd) - m_loss);
    fp = (t_hyd >= 0.0 ? mag : -mag) * k2 / pr_.r_tire;
  }

  double drag = 0.5 * pr_.c_d * pr_.rho_air * v * v;
  double roll = pr_.m_veh * pr_.g * pr_.c_r * std::cos(phi);
  double grav = pr_.m_veh * pr_.g * std::sin(phi);
  double f_net = fp - grav - (v > 1e-3 ? drag + roll : 0.0);
  double dv = f_net / pr_.m_veh;
  if (v <= 0.0 && dv < 0.0) dv = 0.0;  // no reverse motion in these cycles

  double t_cyl = cylinder_torque(p_im, ep);
  double dn =
      (t_cyl - pr_.k1 * v_p * p / kTwoPi - pr_.k1 * pump_loss_.torque(p, n)) /
      pr_.i_eng;
  if (n <= 0.0 && dn < 0.0) dn = 0.0;

  double dpim = ep.r_gas * ep.t_im / ep.v_im *
                (w_thr - ep.eta_v * ep.v_d * n * p_im /
                             (kFourPi * ep.r_gas * ep.t_im));
  if (p_im >= ep.p_amb && dpim > 0.0) dpim = 0.0;

  double flow = pr_.k1 * v_p * n / kTwoPi - k2 * v_m * v / (kTwoPi * pr_.r_tire) -
                pump_loss_.flow(p, v_p) - motor_loss_.flow(p, v_m);
  double dp = flow / capacitance(std::max(p, 0.0), pr_);
  if (p >= pr_.p_max && dp > 0.0) dp = 0.0;  // relief valve

  Eigen::Matrix<double, 5, 1> f;
  f << v, dv, dn, dp, dpim;
  return f;
}

void Plant::step(double t_cyl_cmd, double v_p, double v_m, double phi, double dt) {
  if (fault_) return;
  v_m = std::clamp(v_m, -pr_.vm_max, pr_.vm_max);
  v_p = std::clamp(v_p, 0.0, pr_.vp_max);

  double w_thr = throttle_.update(t_cyl_cmd, t_cyl_act(), dt);

  int sub = std::max(1, static_cast<int>(std::ceil(dt / cfg_.dt_rk4 - 1e-9)));
  double h = dt / sub;
  Eigen::Matrix<double, 5, 1> x;
  x << s_.ell, s_.v, s_.n_eng, s_.p, s_.p_im;
  for (int i = 0; i < sub; ++i) {
    auto k1 = rhs(x, w_thr, v_p, v_m, phi);
    auto k2 = rhs(x + 0.5 * h * k1, w_thr, v_p, v_m, phi);
    auto k3 = rhs(x + 0.5 * h * k2, w_thr, v_p, v_m, phi);
    auto k4 = rhs(x + h * k3, w_thr, v_p, v_m, phi);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    x(1) = std::max(x(1), 0.0);
    x(2) = std::max(x(2), 0.0);
    x(3) = std::min(x(3), pr_.p_max);
    x(4) = std::clamp(x(4), 1.0e3, cfg_.eng.p_amb);
  }

  s_.ell = x(0);
  s_.v = x(1);
  s_.n_eng = x(2);
  s_.p = x(3);
  s_.p_im = x(4);

  if (!(s_.p >= 0.0) || !std::isfinite(s_.p) || !std::isfinite(s_.v)) {
    fault_ = true;
    fault_msg_ = "plant state left physical bounds (p=" + std::to_string(s_.p) +
                 " Pa at t step)";
  }
}

}  // namespace hhv
