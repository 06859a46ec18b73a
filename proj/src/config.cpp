#include "hhv/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace hhv {

namespace {

using nlohmann::json;

json loss_json(const LossModel& l) {
  return {{"mu0", l.mu0}, {"mu1", l.mu1}, {"mu2", l.mu2},
          {"kap1", l.kap1}, {"kap2", l.kap2}};
}

void loss_from(const json& j, LossModel& l) {
  l.mu0 = j.value("mu0", l.mu0);
  l.mu1 = j.value("mu1", l.mu1);
  l.mu2 = j.value("mu2", l.mu2);
  l.kap1 = j.value("kap1", l.kap1);
  l.kap2 = j.value("kap2", l.kap2);
}

json to_json(const SimConfig& c) {
  json j;
  const VehicleParams& p = c.vehicle;
  j["vehicle"] = {
      {"m_veh", p.m_veh},       {"c_d", p.c_d},
      {"c_r", p.c_r},           {"rho_air", p.rho_air},
      {"g", p.g},               {"r_tire", p.r_tire},
      {"f_p_max", p.f_p_max},   {"k1", p.k1},
      {"k2_lo", p.k2_lo},       {"k2_hi", p.k2_hi},
      {"v_hi_switch", p.v_hi_switch}, {"i_eng", p.i_eng},
      {"vp_max", p.vp_max},     {"vm_max", p.vm_max},
      {"p_max", p.p_max},       {"p_floor", p.p_floor},
      {"v_ha", p.v_ha},         {"p_ha", p.p_ha},
      {"gamma_gas", p.gamma_gas}, {"p_lp", p.p_lp},
      {"v_line", p.v_line},     {"k_line", p.k_line},
      {"m1", p.m1},             {"m2", p.m2},
      {"t_cyl_sat", p.t_cyl_sat}, {"saturate_inputs", p.saturate_inputs},
      {"pump_loss", loss_json(p.pump_loss)},
      {"motor_loss", loss_json(p.motor_loss)}};
  const FuelMap& f = c.fuel;
  j["fuel"] = {{"c0", f.c0}, {"c1", f.c1}, {"c2", f.c2}, {"c3", f.c3},
               {"t0", f.t0}, {"t1", f.t1}, {"t2", f.t2},
               {"p_eng_max", f.p_eng_max}, {"n_eng_max", f.n_eng_max},
               {"n_eng_idle", f.n_eng_idle}, {"t_abs_max", f.t_abs_max}};
  const CostWeights& w = c.cost;
  j["cost"] = {{"k1", w.k1}, {"k2", w.k2}, {"k3", w.k3},
               {"b0", w.b0}, {"b1", w.b1}, {"b2", w.b2},
               {"alpha_w", w.alpha_w}, {"beta_w", w.beta_w},
               {"apddp_k3_gain", w.apddp_k3_gain},
               {"apddp_setpoint_gain", w.apddp_setpoint_gain}};
  const StageBoxes& b = c.boxes;
  j["boxes"] = {{"n_min", b.n_min}, {"n_max", b.n_max},
                {"p_min", b.p_min}, {"p_max", b.p_max},
                {"u1_min", b.u1_min}, {"u1_max", b.u1_max},
                {"u2_min", b.u2_min}, {"u2_max", b.u2_max}};
  j["sgdm"] = {{"k_iters", c.sgdm.k_iters}, {"gamma0", c.sgdm.gamma0},
               {"eps", c.sgdm.eps}, {"mu", c.sgdm.mu}, {"warmup", c.sgdm.warmup},
               {"grad_clip", c.sgdm.grad_clip}, {"gamma_min", c.sgdm.gamma_min}};
  j["ddp"] = {{"delta", c.ddp.delta}, {"sweeps", c.ddp.sweeps},
              {"du_trust", std::vector<double>(c.ddp.du_trust.data(),
                                               c.ddp.du_trust.data() +
                                                   c.ddp.du_trust.size())}};
  const InstOptConfig& io = c.instopt;
  j["instopt"] = {{"p_ref0", io.p_ref0}, {"eps_band", io.eps_band},
                  {"raise_rate", io.raise_rate}, {"decay_rate", io.decay_rate},
                  {"kp_vp", io.kp_vp}, {"ki_vp", io.ki_vp},
                  {"kp_trim", io.kp_trim}, {"ki_trim", io.ki_trim},
                  {"kp_spd", io.kp_spd}, {"ki_spd", io.ki_spd},
                  {"n_idle", io.n_idle}, {"n_max", io.n_max}};
  const PlantConfig& pl = c.plant;
  j["plant"] = {{"loss_perturb", pl.loss_perturb},
                {"dt_rk4", pl.dt_rk4},
                {"engine",
                 {{"r_gas", pl.eng.r_gas}, {"t_im", pl.eng.t_im},
                  {"eta_v", pl.eng.eta_v}, {"eta_t", pl.eng.eta_t},
                  {"v_d", pl.eng.v_d}, {"v_im", pl.eng.v_im},
                  {"afr", pl.eng.afr}, {"q_lhv", pl.eng.q_lhv},
                  {"p_amb", pl.eng.p_amb}}},
                {"throttle",
                 {{"kp", pl.throttle.kp}, {"ki", pl.throttle.ki},
                  {"w_max", pl.throttle.w_max}}}};
  j["driver"] = {{"kp", c.driver.kp}, {"ki", c.driver.ki}};
  j["grade_grid"] = {{"behind", c.grade_grid.behind}, {"ahead", c.grade_grid.ahead},
                     {"sample_step", c.grade_grid.sample_step},
                     {"knot_step", c.grade_grid.knot_step},
                     {"zeta", c.grade_grid.zeta}};
  j["sim"] = {{"dt_model", c.dt_model}, {"horizon", c.horizon},
              {"t_s", c.t_s}, {"dt_plant", c.dt_plant},
              {"learn_dt", c.learn_dt}, {"markov_alpha", c.markov_alpha},
              {"gauss_sigma", c.gauss_sigma}, {"v_switch", c.v_switch},
              {"p_set_min", c.p_set_min}, {"sgdm_reset_momentum", c.sgdm_reset_momentum},
              {"engine_speed_mode", c.engine_speed_mode}};
  return j;
}

void check_known(const json& j, std::initializer_list<const char*> keys,
                 const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw std::runtime_error("config: unknown field '" + where + "." +
                               it.key() + "'");
  }
}

void from_json_into(const json& j, SimConfig& c) {
  check_known(j, {"vehicle", "fuel", "cost", "boxes", "sgdm", "ddp", "instopt",
                  "plant", "driver", "grade_grid", "sim"}, "");
  if (j.contains("vehicle")) {
    const json& v = j["vehicle"];
    VehicleParams& p = c.vehicle;
    p.m_veh = v.value("m_veh", p.m_veh);
    p.c_d = v.value("c_d", p.c_d);
    p.c_r = v.value("c_r", p.c_r);
    p.rho_air = v.value("rho_air", p.rho_air);
    p.g = v.value("g", p.g);
    p.r_tire = v.value("r_tire", p.r_tire);
    p.f_p_max = v.value("f_p_max", p.f_p_max);
    p.k1 = v.value("k1", p.k1);
    p.k2_lo = v.value("k2_lo", p.k2_lo);
    p.k2_hi = v.value("k2_hi", p.k2_hi);
    p.v_hi_switch = v.value("v_hi_switch", p.v_hi_switch);
    p.i_eng = v.value("i_eng", p.i_eng);
    p.vp_max = v.value("vp_max", p.vp_max);
    p.vm_max = v.value("vm_max", p.vm_max);
    p.p_max = v.value("p_max", p.p_max);
    p.p_floor = v.value("p_floor", p.p_floor);
    p.v_ha = v.value("v_ha", p.v_ha);
    p.p_ha = v.value("p_ha", p.p_ha);
    p.gamma_gas = v.value("gamma_gas", p.gamma_gas);
    p.p_lp = v.value("p_lp", p.p_lp);
    p.v_line = v.value("v_line", p.v_line);
    p.k_line = v.value("k_line", p.k_line);
    p.m1 = v.value("m1", p.m1);
    p.m2 = v.value("m2", p.m2);
    p.t_cyl_sat = v.value("t_cyl_sat", p.t_cyl_sat);
    p.saturate_inputs = v.value("saturate_inputs", p.saturate_inputs);
    if (v.contains("pump_loss")) loss_from(v["pump_loss"], p.pump_loss);
    if (v.contains("motor_loss")) loss_from(v["motor_loss"], p.motor_loss);
  }
  if (j.contains("fuel")) {
    const json& v = j["fuel"];
    FuelMap& f = c.fuel;
    f.c0 = v.value("c0", f.c0);
    f.c1 = v.value("c1", f.c1);
    f.c2 = v.value("c2", f.c2);
    f.c3 = v.value("c3", f.c3);
    f.t0 = v.value("t0", f.t0);
    f.t1 = v.value("t1", f.t1);
    f.t2 = v.value("t2", f.t2);
    f.p_eng_max = v.value("p_eng_max", f.p_eng_max);
    f.n_eng_max = v.value("n_eng_max", f.n_eng_max);
    f.n_eng_idle = v.value("n_eng_idle", f.n_eng_idle);
    f.t_abs_max = v.value("t_abs_max", f.t_abs_max);
  }
  if (j.contains("cost")) {
    const json& v = j["cost"];
    CostWeights& w = c.cost;
    w.k1 = v.value("k1", w.k1);
    w.k2 = v.value("k2", w.k2);
    w.k3 = v.value("k3", w.k3);
    w.b0 = v.value("b0", w.b0);
    w.b1 = v.value("b1", w.b1);
    w.b2 = v.value("b2", w.b2);
    w.alpha_w = v.value("alpha_w", w.alpha_w);
    w.beta_w = v.value("beta_w", w.beta_w);
    w.apddp_k3_gain = v.value("apddp_k3_gain", w.apddp_k3_gain);
    w.apddp_setpoint_gain = v.value("apddp_setpoint_gain", w.apddp_setpoint_gain);
  }
  if (j.contains("boxes")) {
    const json& v = j["boxes"];
    StageBoxes& b = c.boxes;
    b.n_min = v.value("n_min", b.n_min);
    b.n_max = v.value("n_max", b.n_max);
    b.p_min = v.value("p_min", b.p_min);
    b.p_max = v.value("p_max", b.p_max);
    b.u1_min = v.value("u1_min", b.u1_min);
    b.u1_max = v.value("u1_max", b.u1_max);
    b.u2_min = v.value("u2_min", b.u2_min);
    b.u2_max = v.value("u2_max", b.u2_max);
  }
  if (j.contains("sgdm")) {
    const json& v = j["sgdm"];
    c.sgdm.k_iters = v.value("k_iters", c.sgdm.k_iters);
    c.sgdm.gamma0 = v.value("gamma0", c.sgdm.gamma0);
    c.sgdm.eps = v.value("eps", c.sgdm.eps);
    c.sgdm.mu = v.value("mu", c.sgdm.mu);
    c.sgdm.warmup = v.value("warmup", c.sgdm.warmup);
    c.sgdm.grad_clip = v.value("grad_clip", c.sgdm.grad_clip);
    c.sgdm.gamma_min = v.value("gamma_min", c.sgdm.gamma_min);
  }
  if (j.contains("ddp")) {
    c.ddp.delta = j["ddp"].value("delta", c.ddp.delta);
    c.ddp.sweeps = j["ddp"].value("sweeps", c.ddp.sweeps);
    if (j["ddp"].contains("du_trust")) {
      auto v = j["ddp"]["du_trust"].get<std::vector<double>>();
      c.ddp.du_trust = Eigen::Map<Eigen::VectorXd>(v.data(),
                                                   static_cast<long>(v.size()));
    }
  }
  if (j.contains("instopt")) {
    const json& v = j["instopt"];
    InstOptConfig& io = c.instopt;
    io.p_ref0 = v.value("p_ref0", io.p_ref0);
    io.eps_band = v.value("eps_band", io.eps_band);
    io.raise_rate = v.value("raise_rate", io.raise_rate);
    io.decay_rate = v.value("decay_rate", io.decay_rate);
    io.kp_vp = v.value("kp_vp", io.kp_vp);
    io.ki_vp = v.value("ki_vp", io.ki_vp);
    io.kp_trim = v.value("kp_trim", io.kp_trim);
    io.ki_trim = v.value("ki_trim", io.ki_trim);
    io.kp_spd = v.value("kp_spd", io.kp_spd);
    io.ki_spd = v.value("ki_spd", io.ki_spd);
    io.n_idle = v.value("n_idle", io.n_idle);
    io.n_max = v.value("n_max", io.n_max);
  }
  if (j.contains("plant")) {
    const json& v = j["plant"];
    PlantConfig& pl = c.plant;
    pl.loss_perturb = v.value("loss_perturb", pl.loss_perturb);
    pl.dt_rk4 = v.value("dt_rk4", pl.dt_rk4);
    if (v.contains("engine")) {
      const json& e = v["engine"];
      EngineParams& ep = pl.eng;
      ep.r_gas = e.value("r_gas", ep.r_gas);
      ep.t_im = e.value("t_im", ep.t_im);
      ep.eta_v = e.value("eta_v", ep.eta_v);
      ep.eta_t = e.value("eta_t", ep.eta_t);
      ep.v_d = e.value("v_d", ep.v_d);
      ep.v_im = e.value("v_im", ep.v_im);
      ep.afr = e.value("afr", ep.afr);
      ep.q_lhv = e.value("q_lhv", ep.q_lhv);
      ep.p_amb = e.value("p_amb", ep.p_amb);
    }
    if (v.contains("throttle")) {
      const json& t = v["throttle"];
      pl.throttle.kp = t.value("kp", pl.throttle.kp);
      pl.throttle.ki = t.value("ki", pl.throttle.ki);
      pl.throttle.w_max = t.value("w_max", pl.throttle.w_max);
    }
  }
  if (j.contains("driver")) {
    c.driver.kp = j["driver"].value("kp", c.driver.kp);
    c.driver.ki = j["driver"].value("ki", c.driver.ki);
  }
  if (j.contains("grade_grid")) {
    const json& v = j["grade_grid"];
    c.grade_grid.behind = v.value("behind", c.grade_grid.behind);
    c.grade_grid.ahead = v.value("ahead", c.grade_grid.ahead);
    c.grade_grid.sample_step = v.value("sample_step", c.grade_grid.sample_step);
    c.grade_grid.knot_step = v.value("knot_step", c.grade_grid.knot_step);
    c.grade_grid.zeta = v.value("zeta", c.grade_grid.zeta);
  }
  if (j.contains("sim")) {
    const json& v = j["sim"];
    c.dt_model = v.value("dt_model", c.dt_model);
    c.horizon = v.value("horizon", c.horizon);
    c.t_s = v.value("t_s", c.t_s);
    c.dt_plant = v.value("dt_plant", c.dt_plant);
    c.learn_dt = v.value("learn_dt", c.learn_dt);
    c.markov_alpha = v.value("markov_alpha", c.markov_alpha);
    c.gauss_sigma = v.value("gauss_sigma", c.gauss_sigma);
    c.v_switch = v.value("v_switch", c.v_switch);
    c.p_set_min = v.value("p_set_min", c.p_set_min);
    c.sgdm_reset_momentum = v.value("sgdm_reset_momentum", c.sgdm_reset_momentum);
    c.engine_speed_mode = v.value("engine_speed_mode", c.engine_speed_mode);
  }
}

}  // namespace

SimConfig default_config() { return SimConfig{}; }

SimConfig load_config(const std::string& path) {
  SimConfig c = default_config();
  if (path.empty()) return c;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  in >> j;
  from_json_into(j, c);
  return c;
}

void save_config(const SimConfig& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << to_json(c).dump(2) << "\n";
}

}  // namespace hhv
