#include "hhv/cost.hpp"

#include <cmath>

namespace hhv {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// derivative of the max-torque curve, following the active branch
double torque_max_deriv(double n, const FuelMap& fm) {
  if (n <= 0.0 || n >= fm.n_eng_max) return 0.0;
  double quad = fm.t0 + fm.t1 * n + fm.t2 * n * n;
  double t, dt;
  if (n > 1.0 && fm.p_eng_max / n < quad) {
    t = fm.p_eng_max / n;
    dt = -fm.p_eng_max / (n * n);
  } else {
    t = quad;
    dt = fm.t1 + 2.0 * fm.t2 * n;
  }
  double rolloff = fm.n_eng_max - n;
  if (rolloff < 20.0) return dt * rolloff / 20.0 - t / 20.0;
  return dt;
}
}  // namespace

double pressure_required(double f_cmd, double v, double p, const VehicleParams& pr) {
  double p_eff = std::max(p, pr.p_floor);
  double k2 = pr.k2(v);
  double n_m = k2 * v / pr.r_tire;
  double loss = pr.motor_loss.torque(p_eff, n_m);
  return kTwoPi / pr.vm_max * (pr.r_tire * f_cmd / k2 + loss);
}

double pressure_setpoint(double w_set, double v, double p, const VehicleParams& pr) {
  return pressure_required(pr.m_veh * w_set, v, p, pr);
}

double pressure_target(double w, double v, double phi, double p_set,
                       const SystemState& x, const VehicleParams& pr) {
  double f_cmd = propulsion_cmd(w, v, phi, pr);
  return std::max(pressure_required(f_cmd, v, x.p, pr), p_set);
}

double running_cost(const SystemState& x, const SystemState& x_next,
                    const ControlInput& u, double p_star, const CostWeights& cw,
                    const FuelMap& fm, const VehicleParams& pr) {
  double dn = x_next.n_eng - x.n_eng;
  double g = cw.k1 * dn * dn + cw.k2 * fuel_rate(x.n_eng, pr.m1 * u.u1, fm);
  if (x.p < p_star) {
    double d = x.p - p_star;
    g += cw.k3 * d * d;
  }
  return g;
}

double penalty(const SystemState& x, const ControlInput& u, const CostWeights& cw,
               const FuelMap& fm, const VehicleParams& pr, const StageBoxes& bx) {
  auto above = [](double v, double hi) { return v > hi ? v - hi : 0.0; };
  auto below = [](double v, double lo) { return v < lo ? lo - v : 0.0; };

  double b = 0.0;
  double d;
  d = above(x.n_eng, bx.n_max);
  b += cw.b0 * d * d;
  d = below(x.n_eng, bx.n_min);
  b += cw.b0 * d * d;
  d = above(u.u1, bx.u1_max);
  b += cw.b1 * d * d;
  d = below(u.u1, bx.u1_min);
  b += cw.b1 * d * d;
  d = above(u.u2, bx.u2_max);
  b += cw.b1 * d * d;
  d = below(u.u2, bx.u2_min);
  b += cw.b1 * d * d;
  d = above(u.u1, fm.torque_max(x.n_eng) / pr.m1);
  b += cw.b2 * d * d;
  return b;
}

double expected_running_cost(const SystemState& x,
                             const std::vector<SystemState>& x_next_per_j,
                             const ControlInput& u,
                             const Eigen::VectorXd& probs,
                             const std::vector<double>& p_star_per_j,
                             const CostWeights& cw, const FuelMap& fm,
                             const VehicleParams& pr) {
  double g = 0.0;
  for (int j = 0; j < probs.size(); ++j)
    g += probs(j) *
         running_cost(x, x_next_per_j[j], u, p_star_per_j[j], cw, fm, pr);
  return g;
}

CostTerms stage_cost_terms(const SystemState& x, const SystemState& x_next,
                           const ControlInput& u, double w, double phi,
                           double p_set, const CostWeights& cw, const FuelMap& fm,
                           const VehicleParams& pr, bool with_penalty,
                           const StageBoxes& bx) {
  CostTerms ct;

  // engine-speed change
  {
    double d = x_next.n_eng - x.n_eng;
    ct.g += cw.k1 * d * d;
    ct.gx(2) += -2.0 * cw.k1 * d;
    ct.gn(2) += 2.0 * cw.k1 * d;
    ct.gxx(2, 2) += 2.0 * cw.k1;
    ct.gnn(2, 2) += 2.0 * cw.k1;
    ct.gxn(2, 2) += -2.0 * cw.k1;
  }

  // fuel rate (clamped polynomial; derivatives vanish outside the box)
  {
    double t_raw = pr.m1 * u.u1;
    double n_raw = x.n_eng;
    double n = std::clamp(n_raw, 0.0, fm.n_eng_max);
    double t = std::clamp(t_raw, 0.0, fm.t_abs_max);
    double in_n = (n_raw > 0.0 && n_raw < fm.n_eng_max) ? 1.0 : 0.0;
    double in_t = (t_raw > 0.0 && t_raw < fm.t_abs_max) ? 1.0 : 0.0;
    ct.g += cw.k2 * std::max(fm.c0 + fm.c1 * n + fm.c2 * n * t + fm.c3 * t * t, 0.0);
    ct.gx(2) += cw.k2 * (fm.c1 + fm.c2 * t) * in_n;
    ct.gu(0) += cw.k2 * (fm.c2 * n + 2.0 * fm.c3 * t) * pr.m1 * in_t;
    ct.guu(0, 0) += cw.k2 * 2.0 * fm.c3 * pr.m1 * pr.m1 * in_t;
    ct.gux(0, 2) += cw.k2 * fm.c2 * pr.m1 * in_n * in_t;
  }

  // pressure shortfall against p* = max(p_req, p_set), capped at the
  // hardware limit p_max
  {
    double f_cmd = propulsion_cmd(w, x.v, phi, pr);
    double p_req = pressure_required(f_cmd, x.v, x.p, pr);
    double p_star = std::min(std::max(p_req, p_set), pr.p_max);
    Eigen::RowVector4d dps = Eigen::RowVector4d::Zero();
    if (p_req > p_set && p_req < pr.p_max) {
      double k2r = pr.k2(x.v);
      dps(1) = kTwoPi / pr.vm_max *
               (pr.r_tire * pr.c_d * pr.rho_air * x.v / k2r +
                pr.motor_loss.mu2 * sgn(k2r * x.v / pr.r_tire) * k2r / pr.r_tire);
      if (x.p > pr.p_floor) dps(3) = kTwoPi / pr.vm_max * pr.motor_loss.mu1;
    }
    if (x.p < p_star) {
      double d = x.p - p_star;
      Eigen::RowVector4d dd = -dps;
      dd(3) += 1.0;
      ct.g += cw.k3 * d * d;
      ct.gx += 2.0 * cw.k3 * d * dd;
      ct.gxx += 2.0 * cw.k3 * dd.transpose() * dd;
    }
  }

  if (with_penalty) {
    double d;
    if ((d = x.n_eng - bx.n_max) > 0.0) {
      ct.g += cw.b0 * d * d;
      ct.gx(2) += 2.0 * cw.b0 * d;
      ct.gxx(2, 2) += 2.0 * cw.b0;
    }
    if ((d = x.n_eng - bx.n_min) < 0.0) {
      ct.g += cw.b0 * d * d;
      ct.gx(2) += 2.0 * cw.b0 * d;
      ct.gxx(2, 2) += 2.0 * cw.b0;
    }
    const double u_lo[2] = {bx.u1_min, bx.u2_min};
    const double u_hi[2] = {bx.u1_max, bx.u2_max};
    const double uv[2] = {u.u1, u.u2};
    for (int i = 0; i < 2; ++i) {
      if ((d = uv[i] - u_hi[i]) > 0.0) {
        ct.g += cw.b1 * d * d;
        ct.gu(i) += 2.0 * cw.b1 * d;
        ct.guu(i, i) += 2.0 * cw.b1;
      }
      if ((d = uv[i] - u_lo[i]) < 0.0) {
        ct.g += cw.b1 * d * d;
        ct.gu(i) += 2.0 * cw.b1 * d;
        ct.guu(i, i) += 2.0 * cw.b1;
      }
    }
    double r = u.u1 - fm.torque_max(x.n_eng) / pr.m1;
    if (r > 0.0) {
      double drdn = -torque_max_deriv(x.n_eng, fm) / pr.m1;
      ct.g += cw.b2 * r * r;
      ct.gu(0) += 2.0 * cw.b2 * r;
      ct.gx(2) += 2.0 * cw.b2 * r * drdn;
      ct.guu(0, 0) += 2.0 * cw.b2;
      ct.gxx(2, 2) += 2.0 * cw.b2 * drdn * drdn;
      ct.gux(0, 2) += 2.0 * cw.b2 * drdn;
    }
  }

  return ct;
}

}  // namespace hhv
