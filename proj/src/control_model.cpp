#include "hhv/control_model.hpp"

#include <cmath>
#include <stdexcept>

namespace hhv {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
}  // namespace

double FuelMap::torque_max(double n) const {
  if (n >= n_eng_max) return 0.0;  // governor: no torque past the speed limit
  n = std::max(n, 0.0);
  double t = t0 + t1 * n + t2 * n * n;
  if (n > 1.0) t = std::min(t, p_eng_max / n);
  double taper = std::min((n_eng_max - n) / 20.0, 1.0);  // governor roll-off
  return std::max(t * taper, 0.0);
}

double propulsion_cmd(double w, double v, double phi, const VehicleParams& pr) {
  return pr.m_veh * w + 0.5 * pr.c_d * pr.rho_air * v * v +
         pr.m_veh * pr.g * (pr.c_r * std::cos(phi) + std::sin(phi));
}

double motor_displacement(double f_cmd, double p, double v,
                          const VehicleParams& pr) {
  double p_eff = std::max(p, pr.p_floor);
  double k2 = pr.k2(v);
  double n_m = k2 * v / pr.r_tire;
  double loss = pr.motor_loss.torque(p_eff, n_m);
  double vm = kTwoPi * (f_cmd * pr.r_tire / k2 + loss) / p_eff;
  return std::clamp(vm, -pr.vm_max, pr.vm_max);
}

double capacitance(double p, const VehicleParams& pr) {
  if (p + pr.p_lp <= 0.0) throw std::invalid_argument("capacitance: p + p_lp <= 0");
  double g = pr.gamma_gas;
  return pr.v_ha * std::pow(pr.p_ha, 1.0 / g) /
             (g * std::pow(p + pr.p_lp, 1.0 + 1.0 / g)) +
         pr.v_line / pr.k_line;
}

double accumulator_energy(double p1, double p2, double p0, double v0,
                          double gamma) {
  if (!(p0 > 0.0) || p1 < p0 || p2 < p1)
    throw std::invalid_argument("accumulator_energy: need p2 >= p1 >= p0 > 0");
  double e = std::pow(p0, 1.0 / gamma) * v0 / (gamma - 1.0) *
             (std::pow(p2, 1.0 - 1.0 / gamma) - std::pow(p1, 1.0 - 1.0 / gamma));
  return std::max(e, 0.0);
}

double fuel_rate(double n, double t_cyl, const FuelMap& fm) {
  n = std::clamp(n, 0.0, fm.n_eng_max);
  double t = std::clamp(t_cyl, 0.0, fm.t_abs_max);
  double b = fm.c0 + fm.c1 * n + fm.c2 * n * t + fm.c3 * t * t;
  return std::max(b, 0.0);
}

Eigen::Vector4d dynamics_rhs(const SystemState& x, const ControlInput& u,
                             double w, double phi, const VehicleParams& pr) {
  double t_cyl = pr.m1 * u.u1;
  double v_p = pr.m2 * u.u2;
  if (pr.saturate_inputs) {
    t_cyl = std::clamp(t_cyl, 0.0, pr.t_cyl_sat);
    v_p = std::clamp(v_p, 0.0, pr.vp_max);
  }
  double f_cmd = propulsion_cmd(w, x.v, phi, pr);
  double v_m = motor_displacement(f_cmd, x.p, x.v, pr);
  double p_eff = std::max(x.p, pr.p_floor);

  double m_p = pr.pump_loss.torque(p_eff, x.n_eng);
  double q_p = pr.pump_loss.flow(p_eff, v_p);
  double q_m = pr.motor_loss.flow(p_eff, v_m);
  double k2 = pr.k2(x.v);

  Eigen::Vector4d f;
  f(0) = x.v;
  f(1) = w;
  f(2) = (t_cyl - pr.k1 * v_p * x.p / kTwoPi - pr.k1 * m_p) / pr.i_eng;
  f(3) = (pr.k1 * v_p * x.n_eng / kTwoPi -
          k2 * v_m * x.v / (kTwoPi * pr.r_tire) - q_p - q_m) /
         capacitance(std::max(x.p, 0.0), pr);
  return f;
}

void dynamics_jacobians(const SystemState& x, const ControlInput& u, double w,
                        double phi, const VehicleParams& pr,
                        Eigen::Matrix4d& dfdx, Eigen::Matrix<double, 4, 2>& dfdu) {
  dfdx.setZero();
  dfdu.setZero();

  double t_raw = pr.m1 * u.u1;
  double vp_raw = pr.m2 * u.u2;
  double v_p = vp_raw;
  double sat_t = 1.0, sat_vp = 1.0;
  if (pr.saturate_inputs) {
    v_p = std::clamp(vp_raw, 0.0, pr.vp_max);
    sat_t = (t_raw >= -pr.t_cyl_sat * 1e-9 &&
             t_raw <= pr.t_cyl_sat * (1.0 + 1e-9))
                ? 1.0
                : 0.0;
    sat_vp = (vp_raw >= -pr.vp_max * 1e-9 &&
              vp_raw <= pr.vp_max * (1.0 + 1e-9))
                 ? 1.0
                 : 0.0;
  }
  double p_eff = std::max(x.p, pr.p_floor);
  bool above_floor = x.p > pr.p_floor;
  double k2 = pr.k2(x.v);
  double n_m = k2 * x.v / pr.r_tire;

  double f_cmd = propulsion_cmd(w, x.v, phi, pr);
  double loss_m = pr.motor_loss.torque(p_eff, n_m);
  double a_torque = f_cmd * pr.r_tire / k2 + loss_m;
  double v_m_raw = kTwoPi * a_torque / p_eff;
  bool clamped = std::abs(v_m_raw) >= pr.vm_max;
  double v_m = std::clamp(v_m_raw, -pr.vm_max, pr.vm_max);

  double dvm_dv = 0.0, dvm_dp = 0.0;
  if (!clamped) {
    double dfc_dv = pr.c_d * pr.rho_air * x.v;
    double dlm_dv = pr.motor_loss.mu2 * sgn(n_m) * k2 / pr.r_tire;
    dvm_dv = kTwoPi * (dfc_dv * pr.r_tire / k2 + dlm_dv) / p_eff;
    if (above_floor) {
      // V_m = 2*pi*(A0 + mu1*p)/p with A0 = F*r/k2 + mu0 + mu2*|n_m|
      double a0 = a_torque - pr.motor_loss.mu1 * p_eff;
      dvm_dp = -kTwoPi * a0 / (p_eff * p_eff);
    }
  }

  // engine speed row
  dfdx(2, 2) = -pr.k1 * pr.pump_loss.mu2 * sgn(x.n_eng) / pr.i_eng;
  dfdx(2, 3) = (-pr.k1 * v_p / kTwoPi -
                pr.k1 * (above_floor ? pr.pump_loss.mu1 : 0.0)) /
               pr.i_eng;
  dfdu(2, 0) = sat_t * pr.m1 / pr.i_eng;
  dfdu(2, 1) = -sat_vp * pr.k1 * pr.m2 * x.p / (kTwoPi * pr.i_eng);

  // pressure row
  double ch = capacitance(std::max(x.p, 0.0), pr);
  double s = pr.k1 * v_p * x.n_eng / kTwoPi -
             k2 * v_m * x.v / (kTwoPi * pr.r_tire) -
             pr.pump_loss.flow(p_eff, v_p) - pr.motor_loss.flow(p_eff, v_m);

  double dqm_dvm = pr.motor_loss.kap2 * p_eff * sgn(v_m);
  double ds_dv = -k2 / (kTwoPi * pr.r_tire) * (v_m + x.v * dvm_dv) - dqm_dvm * dvm_dv;
  double ds_dn = pr.k1 * v_p / kTwoPi;
  double ds_dp = -k2 * x.v / (kTwoPi * pr.r_tire) * dvm_dp - dqm_dvm * dvm_dp;
  if (above_floor) {
    ds_dp -= pr.pump_loss.kap1 + pr.pump_loss.kap2 * std::abs(v_p);
    ds_dp -= pr.motor_loss.kap1 + pr.motor_loss.kap2 * std::abs(v_m);
  }
  double ds_du2 = sat_vp * (pr.k1 * pr.m2 * x.n_eng / kTwoPi -
                            pr.pump_loss.kap2 * p_eff * sgn(v_p) * pr.m2);

  double gg = pr.gamma_gas;
  double dch_dp =
      x.p > 0.0 ? -(1.0 + 1.0 / gg) * pr.v_ha * std::pow(pr.p_ha, 1.0 / gg) /
                      (gg * std::pow(x.p + pr.p_lp, 2.0 + 1.0 / gg))
                : 0.0;

  dfdx(3, 1) = ds_dv / ch;
  dfdx(3, 2) = ds_dn / ch;
  dfdx(3, 3) = ds_dp / ch - s * dch_dp / (ch * ch);
  dfdu(3, 1) = ds_du2 / ch;

  // kinematics
  dfdx(0, 1) = 1.0;
}

SystemState step(const SystemState& x, const ControlInput& u, double w,
                 double phi, double dt, const VehicleParams& pr) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  Eigen::Vector4d f = dynamics_rhs(x, u, w, phi, pr);
  Eigen::Matrix4d a;
  Eigen::Matrix<double, 4, 2> b;
  dynamics_jacobians(x, u, w, phi, pr, a, b);
  Eigen::Vector4d next = x.vec() + dt * f + 0.5 * dt * dt * (a * f);
  return SystemState::from_vec(next);
}

void discrete_jacobians(const SystemState& x, const ControlInput& u, double w,
                        double phi, double dt, const VehicleParams& pr,
                        Eigen::Matrix4d& fx, Eigen::Matrix<double, 4, 2>& fu) {
  Eigen::Matrix4d a;
  Eigen::Matrix<double, 4, 2> b;
  dynamics_jacobians(x, u, w, phi, pr, a, b);
  fx = Eigen::Matrix4d::Identity() + dt * a + 0.5 * dt * dt * (a * a);
  fu = dt * b + 0.5 * dt * dt * (a * b);
}

}  // namespace hhv
