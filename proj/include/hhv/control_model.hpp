#pragma once

#include <Eigen/Dense>

namespace hhv {

// Second-order loss polynomials for a hydraulic unit:
//   torque loss  M_s(p, n) = mu0 + mu1*p + mu2*|n|        [N*m]
//   flow loss    Q_s(p, V) = kap1*p + kap2*p*|V|          [m^3/s]
struct LossModel {
  double mu0 = 0.0;
  double mu1 = 0.0;   // N*m / Pa
  double mu2 = 0.0;   // N*m / (rad/s)
  double kap1 = 0.0;  // m^3/s / Pa
  double kap2 = 0.0;  // m^3/s / (Pa * m^3/rev)

  double torque(double p, double n) const { return mu0 + mu1 * p + mu2 * std::abs(n); }
  double flow(double p, double v_disp) const { return kap1 * p + kap2 * p * std::abs(v_disp); }

  LossModel scaled(double f) const { return {mu0 * f, mu1 * f, mu2 * f, kap1 * f, kap2 * f}; }
};

// Unit convention: shaft speeds in rad/s, displacement volumes in m^3/rev,
// torque = p*V/(2*pi), flow = n*V/(2*pi), pressures in Pa (differential
// above the low-pressure level unless noted).
struct VehicleParams {
  // chassis
  double m_veh = 2091.0;   // kg
  double c_d = 1.62;       // effective drag area coefficient
  double c_r = 0.010;
  double rho_air = 1.2;    // kg/m^3
  double g = 9.81;         // m/s^2
  double r_tire = 0.35;    // m
  double f_p_max = 6500.0; // N

  // driveline
  double k1 = 1.0;
  double k2_lo = 10.0;
  double k2_hi = 6.67;
  double v_hi_switch = 20.0;  // m/s
  double i_eng = 0.5;         // kg*m^2

  // hydraulics
  double vp_max = 63.0e-6;  // m^3/rev
  double vm_max = 50.0e-6;  // m^3/rev
  double p_max = 350.0e5;   // Pa
  double p_floor = 5.0e5;   // Pa, lower bound used in displacement inversion

  // accumulator + lines
  double v_ha = 50.0e-3;    // m^3
  double p_ha = 70.0e5;     // Pa
  double gamma_gas = 1.4;
  double p_lp = 10.0e5;     // Pa
  double v_line = 5.0e-3;   // m^3
  double k_line = 1.4e9;    // Pa

  // losses (embedded-model approximations)
  LossModel pump_loss{2.0, 2.4e-7, 0.008, 2.0e-12, 3.2e-8};
  LossModel motor_loss{2.0, 2.4e-7, 0.008, 2.0e-12, 3.2e-8};

  // input scalings: T_cyl = m1*u1, V_p = m2*u2; the physical commands
  // saturate at the actuator range inside the dynamics
  double m1 = 3.0;       // N*m
  double m2 = 1.5e-5;    // m^3/rev
  double t_cyl_sat = 305.0;  // N*m
  bool saturate_inputs = true;

  double k2(double v) const { return v < v_hi_switch ? k2_lo : k2_hi; }
};

// Engine fuel-rate surface b_f(n, T) = c0 + c1*n + c2*n*T + c3*T^2 [g/s]
// and the maximum-torque curve T_max(n) = min(t0 + t1*n + t2*n^2, P_max/n).
struct FuelMap {
  double c0 = 0.15;
  double c1 = 3.0e-3;
  double c2 = 4.8e-5;
  double c3 = 1.0e-5;
  double t0 = 154.05;
  double t1 = 0.9439;
  double t2 = -1.494e-3;
  double p_eng_max = 125.0e3;  // W
  double n_eng_max = 523.6;    // rad/s (5000 RPM)
  double n_eng_idle = 80.0;    // rad/s
  double t_abs_max = 305.0;    // N*m, clamp ceiling for evaluation

  double torque_max(double n) const;
};

struct SystemState {
  double ell = 0.0;    // m
  double v = 0.0;      // m/s
  double n_eng = 0.0;  // rad/s
  double p = 0.0;      // Pa

  Eigen::Vector4d vec() const { return {ell, v, n_eng, p}; }
  static SystemState from_vec(const Eigen::Vector4d& x) {
    return {x(0), x(1), x(2), x(3)};
  }
};

struct ControlInput {
  double u1 = 0.0;  // scaled cylinder torque
  double u2 = 0.0;  // scaled pump displacement
};

// F = m*w + 0.5*Cd*rho*v^2 + m*g*(Cr*cos(phi) + sin(phi))
double propulsion_cmd(double w, double v, double phi, const VehicleParams& pr);

// V_m = (2*pi/p)*(F*r/k2 + M_s,m), clamped to [-Vm_max, Vm_max]; p floored
// at p_floor; k2 picked by speed regime; motor loss evaluated at the motor
// shaft speed implied by v.
double motor_displacement(double f_cmd, double p, double v,
                          const VehicleParams& pr);

// C_h = V_ha*p_ha^(1/g) / (g*(p+p_lp)^(1+1/g)) + V_L/K_L
double capacitance(double p, const VehicleParams& pr);

// Energy stored between pressures p1 <= p2 along the polytrope anchored at
// (p0, V0). Throws on ordering violations.
double accumulator_energy(double p1, double p2, double p0, double v0,
                          double gamma);

// Clamped polynomial evaluation, >= 0.
double fuel_rate(double n, double t_cyl, const FuelMap& fm);

// Continuous-time embedded dynamics [dl, dv, dn, dp].
Eigen::Vector4d dynamics_rhs(const SystemState& x, const ControlInput& u,
                             double w, double phi, const VehicleParams& pr);

// Analytic partials of dynamics_rhs (phi held constant).
void dynamics_jacobians(const SystemState& x, const ControlInput& u, double w,
                        double phi, const VehicleParams& pr,
                        Eigen::Matrix4d& dfdx, Eigen::Matrix<double, 4, 2>& dfdu);

// x' = x + dt*f + (dt^2/2)*(df/dx)*f, with u and w held constant over dt.
SystemState step(const SystemState& x, const ControlInput& u, double w,
                 double phi, double dt, const VehicleParams& pr);

// dF/dx = I + dt*A + (dt^2/2)*A^2, dF/du = dt*B + (dt^2/2)*A*B with
// A = df/dx, B = df/du (second-order dynamic partials neglected).
void discrete_jacobians(const SystemState& x, const ControlInput& u, double w,
                        double phi, double dt, const VehicleParams& pr,
                        Eigen::Matrix4d& fx, Eigen::Matrix<double, 4, 2>& fu);

}  // namespace hhv
