#include "hhv/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "hhv/hhv_problem.hpp"
#include "hhv/instopt.hpp"
#include "hhv/plant.hpp"
#include "hhv/solver_sgdm.hpp"
#include "hhv/terrain.hpp"

namespace hhv {

Algo algo_from_string(const std::string& s) {
  if (s == "sgdm") return Algo::kSgdm;
  if (s == "asddp") return Algo::kAsddp;
  if (s == "apddp") return Algo::kApddp;
  if (s == "ddp") return Algo::kDdp;
  if (s == "instopt") return Algo::kInstOpt;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

std::string algo_name(Algo a) {
  switch (a) {
    case Algo::kSgdm: return "sgdm";
    case Algo::kAsddp: return "asddp";
    case Algo::kApddp: return "apddp";
    case Algo::kDdp: return "ddp";
    case Algo::kInstOpt: return "instopt";
  }
  return "?";
}

double fuel_metric(const std::vector<LogRow>& log) {
  double g = 0.0;
  for (std::size_t i = 1; i < log.size(); ++i)
    g += 0.5 * (log[i].b_f + log[i - 1].b_f) * (log[i].t - log[i - 1].t);
  return g;
}

double tracking_metric(const std::vector<LogRow>& log, double vm_max) {
  if (log.size() < 2) throw std::invalid_argument("tracking_metric: empty log");
  double integral = 0.0;
  double dist = 0.0;
  for (std::size_t i = 1; i < log.size(); ++i) {
    double dt = log[i].t - log[i - 1].t;
    auto gated = [vm_max](const LogRow& r) {
      bool at_clamp = r.v_m >= vm_max * (1.0 - 1e-9);
      return at_clamp ? std::abs(r.v_ref - r.v) : 0.0;
    };
    integral += 0.5 * (gated(log[i]) + gated(log[i - 1])) * dt;
    dist += 0.5 * (log[i].v_ref + log[i - 1].v_ref) * dt;
  }
  if (dist <= 0.0) throw std::runtime_error("tracking_metric: zero-distance cycle");
  return integral / (dist / 1000.0);
}

void write_log_csv(const std::string& path, const std::vector<LogRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write log: " + path);
  out << "t,v_ref,v,f_cmd,f_act,n_eng,p,p_im,t_cyl,v_p,v_m,b_f,grade\n";
  char buf[512];
  for (const LogRow& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,"
                  "%.10g,%.10g,%.10g\n",
                  r.t, r.v_ref, r.v, r.f_cmd, r.f_act, r.n_eng, r.p, r.p_im,
                  r.t_cyl, r.v_p, r.v_m, r.b_f, r.grade);
    out << buf;
  }
}

void write_summary_json(const std::string& path, const std::string& algo,
                        const std::string& cycle, const RunMetrics& m,
                        std::uint64_t seed) {
  nlohmann::json j;
  j["algo"] = algo;
  j["cycle"] = cycle;
  j["fuel_g"] = m.fuel_g;
  j["tracking_m_per_km"] = m.tracking_m_per_km;
  j["runtime_s"] = m.runtime_s;
  j["solver_ms"] = {{"p50", m.solver_ms_p50}, {"p95", m.solver_ms_p95}};
  j["fault"] = m.fault;
  if (m.fault) j["fault_message"] = m.fault_message;
  j["seed"] = seed;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write summary: " + path);
  out << j.dump(1) << "\n";
}

namespace {

// Elevation as a function of reference distance, piecewise linear.
class ElevationMap {
 public:
  ElevationMap() = default;
  explicit ElevationMap(const CycleTrace& trace) {
    if (!trace.has_elev()) return;
    std::vector<double> raw_pos = trace.positions();
    for (std::size_t i = 0; i < raw_pos.size(); ++i) {
      if (!pos_.empty() && raw_pos[i] <= pos_.back() + 1e-9) continue;  // idle
      pos_.push_back(raw_pos[i]);
      y_.push_back(trace.elev[i]);
    }
    if (pos_.size() < 2) {
      pos_.clear();
      y_.clear();
    }
  }

  bool flat() const { return pos_.empty(); }

  double elevation(double ell) const {
    if (flat()) return 0.0;
    ell = std::clamp(ell, pos_.front(), pos_.back());
    auto it = std::upper_bound(pos_.begin(), pos_.end(), ell);
    std::size_t hi = std::min<std::size_t>(
        static_cast<std::size_t>(it - pos_.begin()), pos_.size() - 1);
    if (hi == 0) hi = 1;
    std::size_t lo = hi - 1;
    double s = (ell - pos_[lo]) / (pos_[hi] - pos_[lo]);
    return y_[lo] + s * (y_[hi] - y_[lo]);
  }

  double grade(double ell) const {
    if (flat()) return 0.0;
    ell = std::clamp(ell, pos_.front() + 1e-6, pos_.back() - 1e-6);
    auto it = std::upper_bound(pos_.begin(), pos_.end(), ell);
    std::size_t hi = std::min<std::size_t>(
        static_cast<std::size_t>(it - pos_.begin()), pos_.size() - 1);
    if (hi == 0) hi = 1;
    std::size_t lo = hi - 1;
    double slope = (y_[hi] - y_[lo]) / (pos_[hi] - pos_[lo]);
    return std::asin(std::clamp(slope, -0.5, 0.5));
  }

 private:
  std::vector<double> pos_;
  std::vector<double> y_;
};

CostWeights weights_for(Algo algo, const CostWeights& cw) {
  CostWeights w = cw;
  if (algo == Algo::kApddp) {
    w.k3 *= cw.apddp_k3_gain;
    w.alpha_w *= cw.apddp_setpoint_gain;
    w.beta_w *= cw.apddp_setpoint_gain;
  }
  return w;
}

// Receding-horizon wrapper around the horizon solvers: warm-start shifting,
// grade refits, multi-step rows, statistics floor.
class HorizonController {
 public:
  HorizonController(Algo algo, const SimConfig& cfg, std::uint64_t seed)
      : algo_(algo),
        cfg_(cfg),
        weights_(weights_for(algo, cfg.cost)),
        prob_(cfg.vehicle, cfg.fuel, weights_, cfg.boxes, cfg.horizon,
              cfg.dt_model, /*with_penalty=*/algo == Algo::kSgdm),
        constraints_(cfg.boxes, cfg.fuel, cfg.vehicle.m1),
        ddp_(prob_, cfg.ddp),
        sgdm_cfg_(cfg.sgdm),
        sgdm_(prob_, cfg.sgdm),
        streams_(RandomStreams::generate(cfg.sgdm.k_iters,
                                         std::max(cfg.horizon - 1, 1), seed)) {
    u_ = Eigen::MatrixXd::Zero(2, cfg.horizon);
    v_ = Eigen::MatrixXd::Zero(2, cfg.horizon);
    // start at the idle torque balance so the cold rollout is sane
    double t_idle = cfg.vehicle.k1 *
                    cfg.vehicle.pump_loss.torque(150.0e5, cfg.fuel.n_eng_idle);
    u_.row(0).setConstant(t_idle / cfg.vehicle.m1);
  }

  // One receding-horizon solve; returns the first-stage input (u1, u2) and
  // the predicted next-stage engine speed for the speed-handoff mode.
  struct Output {
    double u1 = 0.0;
    double u2 = 0.0;
    double n_eng_next = 0.0;
  };

  Output control_step(const SystemState& meas, int i0, const MarkovModel& model,
                      double w_set, const std::function<double(double)>& grade,
                      const std::vector<double>& future_w, double elapsed) {
    // shift the warm start one stage per elapsed model interval
    shift_debt_ += elapsed;
    while (shift_debt_ >= cfg_.dt_model - 1e-9) {
      shift_debt_ -= cfg_.dt_model;
      shift_warm();
    }

    prob_.set_grade(grade);
    double p_set = std::max(pressure_setpoint(w_set, meas.v, meas.p, cfg_.vehicle),
                            cfg_.p_set_min);
    prob_.set_pressure_floor(p_set);

    Eigen::VectorXd x0 = meas.vec();
    Output out;
    if (algo_ == Algo::kSgdm) {
      auto sampler = [&](int k) {
        return model.sample_path(i0, streams_.omega[static_cast<std::size_t>(k - 1)],
                                 cfg_.horizon);
      };
      if (cfg_.sgdm_reset_momentum) v_.setZero();
      SgdmSolver sgdm_step(prob_, sgdm_cfg_);
      SgdmSolver::Result r = sgdm_step.solve(x0, u_, v_, sampler);
      if (sgdm_cfg_.k_offset < 1000000)
        sgdm_cfg_.k_offset += sgdm_cfg_.k_iters;
      u_ = r.u;
      v_ = r.v;
      out.u1 = u_(0, 0);
      out.u2 = u_(1, 0);
      out.n_eng_next = meas.n_eng;
      return out;
    }

    Eigen::VectorXd support(DemandGrid::kLevels);
    for (int j = 0; j < DemandGrid::kLevels; ++j) support(j) = DemandGrid::level(j);

    Nominal warm;
    warm.u.reserve(static_cast<std::size_t>(cfg_.horizon));
    for (int n = 0; n < cfg_.horizon; ++n) warm.u.push_back(u_.col(n));
    if (have_nominal_x_) warm.x = nominal_x_;

    Nominal sol;
    if (algo_ == Algo::kDdp) {
      DeterministicPath path(future_w);
      sol = ddp_.solve(x0, std::move(warm), path, path, &constraints_);
    } else {
      StageDistribution dist(support, model.multi_step_rows(i0, cfg_.horizon));
      if (algo_ == Algo::kApddp) {
        DeterministicPath avg = dist.averaged(cfg_.horizon);
        sol = ddp_.solve(x0, std::move(warm), avg, dist, &constraints_);
      } else {
        sol = ddp_.solve(x0, std::move(warm), dist, dist, &constraints_);
      }
    }
    for (int n = 0; n < cfg_.horizon; ++n) u_.col(n) = sol.u[static_cast<std::size_t>(n)];
    nominal_x_ = sol.x;
    have_nominal_x_ = true;
    out.u1 = u_(0, 0);
    out.u2 = u_(1, 0);
    out.n_eng_next = sol.x[1](2);
    return out;
  }

 private:
  void shift_warm() {
    const int n = cfg_.horizon;
    for (int k = 0; k + 1 < n; ++k) {
      u_.col(k) = u_.col(k + 1);
      v_.col(k) = v_.col(k + 1);
    }
    if (have_nominal_x_) {
      for (int k = 0; k + 1 <= n; ++k)
        nominal_x_[static_cast<std::size_t>(k)] =
            nominal_x_[static_cast<std::size_t>(k) + 1];
    }
  }

  Algo algo_;
  SimConfig cfg_;
  CostWeights weights_;
  HhvProblem prob_;
  HhvConstraints constraints_;
  DdpSolver ddp_;
  SgdmConfig sgdm_cfg_;
  SgdmSolver sgdm_;
  RandomStreams streams_;
  Eigen::MatrixXd u_, v_;
  std::vector<Eigen::VectorXd> nominal_x_;
  bool have_nominal_x_ = false;
  double shift_debt_ = 0.0;
};

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double idx = q * (static_cast<double>(v.size()) - 1.0);
  std::size_t lo = static_cast<std::size_t>(idx);
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (idx - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// demand implied by the reference trace at 1 Hz (perfect-tracking driver)
double reference_demand(const CycleTrace& trace, double t, double dt) {
  double t1 = std::min(t + dt, trace.duration());
  double t0 = std::min(t, trace.duration());
  if (t1 <= t0) return 0.0;
  return (trace.reference_at(t1).first - trace.reference_at(t0).first) / (t1 - t0);
}

}  // namespace

RunMetrics run_closed_loop(const RunConfig& rc, const CycleTrace& full_trace,
                           DualSpeedModel& stats, bool learn,
                           std::vector<LogRow>* log_out) {
  const SimConfig& cfg = rc.sim;
  CycleTrace trace =
      rc.max_time > 0.0 ? full_trace.truncated(rc.max_time) : full_trace;
  if (trace.size() < 2) throw std::invalid_argument("run: cycle too short");

  ElevationMap emap(trace);
  auto true_grade = [&emap](double ell) { return emap.grade(ell); };

  Plant plant(cfg.vehicle, cfg.plant);
  PlantState init;
  init.v = trace.v_ref.front();
  init.n_eng = cfg.fuel.n_eng_idle;
  init.p = cfg.instopt.p_ref0;
  init.p_im = 0.3e5;
  plant.reset(init);

  VirtualDriver driver(cfg.driver.kp, cfg.driver.ki, cfg.vehicle.f_p_max);
  InstOpt instopt(cfg.instopt, cfg.vehicle, cfg.fuel);
  std::optional<HorizonController> ctrl;
  if (rc.algo != Algo::kInstOpt) ctrl.emplace(rc.algo, cfg, rc.seed);

  const int ticks_per_ctrl = std::max(1, static_cast<int>(std::llround(cfg.t_s / cfg.dt_plant)));
  const int ticks_per_learn =
      std::max(1, static_cast<int>(std::llround(cfg.learn_dt / cfg.dt_plant)));
  const long n_ticks =
      static_cast<long>(std::floor(trace.duration() / cfg.dt_plant + 1e-9));

  std::vector<LogRow> log;
  log.reserve(static_cast<std::size_t>(n_ticks));
  std::vector<double> solver_ms;

  double t_cyl_cmd = 0.0, v_p_cmd = 0.0, v_m_cmd = 0.0;
  double n_cmd_speed = cfg.fuel.n_eng_idle;
  double i_spd = 0.0;
  bool have_prev_sample = false;
  int i_prev = 0;
  bool prev_low_regime = true;
  double w_accum = 0.0;
  long w_accum_n = 0;
  double w_set_cache[2] = {0.0, 0.0};  // low, high

  GradeModel grade_fit = GradeModel::flat();
  bool have_grade_fit = false;

  auto t_start = std::chrono::steady_clock::now();
  RunMetrics m;

  for (long k = 0; k < n_ticks; ++k) {
    double t = static_cast<double>(k) * cfg.dt_plant;
    const PlantState& ps = plant.state();
    SystemState meas = ps.system();
    double v_ref = trace.reference_at(t).first;
    double phi_here = true_grade(ps.ell);

    double f_cmd = driver.force(v_ref, ps.v, cfg.dt_plant);

    // driver-model learning at the 1 s sampling grid; the observation is
    // the mean demand over the elapsed interval (a pedal-position estimator
    // would be filtered the same way)
    w_accum += observe_demand(f_cmd, ps.v, phi_here, cfg.vehicle);
    ++w_accum_n;
    if ((k + 1) % ticks_per_learn == 0) {
      double w_obs = w_accum / static_cast<double>(w_accum_n);
      w_accum = 0.0;
      w_accum_n = 0;
      int i_next = DemandGrid::quantize(w_obs);
      bool low_regime = ps.v < cfg.v_switch;
      if (have_prev_sample && learn) {
        MarkovModel& mdl = prev_low_regime ? stats.low : stats.high;
        mdl.learn(i_prev, i_next);
      }
      i_prev = i_next;
      prev_low_regime = low_regime;
      have_prev_sample = true;
    }

    if (rc.algo == Algo::kInstOpt) {
      InstOptOutput o = instopt.step(meas, f_cmd, cfg.dt_plant);
      t_cyl_cmd = o.t_cyl;
      v_p_cmd = o.v_p;
      v_m_cmd = o.v_m;
    } else {
      if (k % ticks_per_ctrl == 0) {
        auto s0 = std::chrono::steady_clock::now();

        if (!emap.flat()) {
          GradeGrid gg = cfg.grade_grid;
          std::vector<double> r = gg.sample_positions(ps.ell);
          std::vector<double> y;
          y.reserve(r.size());
          for (double ri : r) y.push_back(emap.elevation(ri));
          grade_fit = fit_elevation(r, y, gg.knot_positions(ps.ell), gg.zeta);
          have_grade_fit = true;
        }
        std::function<double(double)> grade_fn;
        if (have_grade_fit) {
          const GradeModel& gm = grade_fit;
          grade_fn = [gm](double ell) { return gm.grade(ell); };
        } else {
          grade_fn = [](double) { return 0.0; };
        }

        bool low_regime = ps.v < cfg.v_switch;
        const MarkovModel& model = low_regime ? stats.low : stats.high;
        int regime_idx = low_regime ? 0 : 1;
        try {
          CostWeights w_eff = weights_for(rc.algo, cfg.cost);
          w_set_cache[regime_idx] =
              accel_setpoint(model, w_eff.alpha_w, w_eff.beta_w);
        } catch (const std::exception&) {
          // keep the previous setpoint if the chain is momentarily degenerate
        }

        int i0 = DemandGrid::quantize(observe_demand(f_cmd, ps.v, phi_here, cfg.vehicle));

        std::vector<double> future_w;
        if (rc.algo == Algo::kDdp) {
          future_w.resize(static_cast<std::size_t>(cfg.horizon));
          for (int n = 0; n < cfg.horizon; ++n)
            future_w[static_cast<std::size_t>(n)] =
                reference_demand(trace, t + n * cfg.dt_model, cfg.dt_model);
          // the first stage must also close the present tracking gap
          double t1 = std::min(t + cfg.dt_model, trace.duration());
          if (t1 > t)
            future_w[0] = std::clamp(
                (trace.reference_at(t1).first - ps.v) / (t1 - t), -4.0, 4.0);
        }

        HorizonController::Output o = ctrl->control_step(
            meas, i0, model, w_set_cache[regime_idx], grade_fn, future_w,
            k == 0 ? 0.0 : cfg.t_s);
        if (const char* dbg = std::getenv("HHV_CTRL_DEBUG")) {
          static std::ofstream dout(dbg);
          dout << t << "," << ps.v << "," << ps.p / 1e5 << "," << i0 << ","
               << w_set_cache[regime_idx] << ","
               << pressure_setpoint(w_set_cache[regime_idx], ps.v, ps.p,
                                    cfg.vehicle) / 1e5
               << "," << o.u1 << "," << o.u2 << "\n";
        }
        t_cyl_cmd = std::clamp(cfg.vehicle.m1 * o.u1, 0.0,
                               cfg.fuel.torque_max(ps.n_eng));
        v_p_cmd = std::clamp(cfg.vehicle.m2 * o.u2, 0.0, cfg.vehicle.vp_max);
        n_cmd_speed = ps.n_eng + (o.n_eng_next - ps.n_eng) * (cfg.t_s / cfg.dt_model);

        solver_ms.push_back(std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - s0)
                                .count());
      }
      if (cfg.engine_speed_mode && rc.algo != Algo::kSgdm) {
        // speed handoff: track the interpolated engine-speed target
        double se = n_cmd_speed - ps.n_eng;
        double t_max = cfg.fuel.torque_max(ps.n_eng);
        i_spd = std::clamp(i_spd + 6.0 * se * cfg.dt_plant, 0.0, t_max);
        t_cyl_cmd = std::clamp(4.0 * se + i_spd, 0.0, t_max);
      }
      v_m_cmd = motor_displacement(f_cmd, ps.p, ps.v, cfg.vehicle);
    }

    LogRow row;
    row.t = t;
    row.v_ref = v_ref;
    row.v = ps.v;
    row.f_cmd = f_cmd;
    row.f_act = plant.f_p(v_m_cmd);
    row.n_eng = ps.n_eng;
    row.p = ps.p;
    row.p_im = ps.p_im;
    row.t_cyl = plant.t_cyl_act();
    row.v_p = v_p_cmd;
    row.v_m = v_m_cmd;
    row.b_f = fuel_rate(ps.n_eng, plant.t_cyl_act(), cfg.fuel);
    row.grade = phi_here;
    log.push_back(row);

    plant.step(t_cyl_cmd, v_p_cmd, v_m_cmd, phi_here, cfg.dt_plant);
    if (plant.fault()) {
      m.fault = true;
      m.fault_message = plant.fault_message() + " at t=" + std::to_string(t);
      break;
    }
  }

  m.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t_start)
                    .count();
  m.fuel_g = fuel_metric(log);
  m.tracking_m_per_km = tracking_metric(log, cfg.vehicle.vm_max);
  m.solver_ms_p50 = percentile(solver_ms, 0.50);
  m.solver_ms_p95 = percentile(solver_ms, 0.95);
  if (log_out) *log_out = std::move(log);
  return m;
}

std::vector<RunMetrics> experiment_progression(const RunConfig& rc,
                                               const CycleTrace& trace,
                                               int n_runs, DualSpeedModel& stats,
                                               bool freeze_learning) {
  std::vector<RunMetrics> out;
  for (int r = 0; r < n_runs; ++r)
    out.push_back(run_closed_loop(rc, trace, stats, !freeze_learning, nullptr));
  return out;
}

std::vector<RunMetrics> experiment_crosstrain(const RunConfig& rc,
                                              const CycleTrace& trace,
                                              int n_runs, DualSpeedModel& stats) {
  std::vector<RunMetrics> out;
  for (int r = 0; r < n_runs; ++r) {
    bool learn = r > 0;  // run 0 frozen
    out.push_back(run_closed_loop(rc, trace, stats, learn, nullptr));
  }
  return out;
}

DualSpeedModel fresh_stats(const SimConfig& cfg) {
  DualSpeedModel s;
  s.low = MarkovModel::gaussian_init(cfg.gauss_sigma, cfg.markov_alpha);
  s.high = MarkovModel::gaussian_init(cfg.gauss_sigma, cfg.markov_alpha);
  s.v_switch = cfg.v_switch;
  return s;
}

DualSpeedModel learn_stats_from_cycle(const CycleTrace& trace, int passes,
                                      const SimConfig& cfg) {
  DualSpeedModel s = fresh_stats(cfg);
  double dt = cfg.learn_dt;
  long n = static_cast<long>(std::floor(trace.duration() / dt + 1e-9));
  for (int pass = 0; pass < passes; ++pass) {
    bool have_prev = false;
    int i_prev = 0;
    bool prev_low = true;
    for (long k = 0; k < n; ++k) {
      double t = static_cast<double>(k) * dt;
      double w = reference_demand(trace, t, dt);
      double v = trace.reference_at(t).first;
      int i_next = DemandGrid::quantize(w);
      bool low = v < s.v_switch;
      if (have_prev) (prev_low ? s.low : s.high).learn(i_prev, i_next);
      i_prev = i_next;
      prev_low = low;
      have_prev = true;
    }
  }
  return s;
}

}  // namespace hhv
