#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "hhv/config.hpp"
#include "hhv/harness.hpp"
#include "hhv/terrain.hpp"

namespace fs = std::filesystem;

namespace {

hhv::CycleTrace load_trace(const std::string& path) {
  return hhv::load_cycle(path);
}

hhv::DualSpeedModel init_stats(const std::string& stats_path,
                               const hhv::SimConfig& cfg) {
  if (stats_path.empty()) return hhv::fresh_stats(cfg);
  return hhv::load_dual_model(stats_path);
}

void print_metrics(const std::string& tag, const hhv::RunMetrics& m) {
  std::printf("%-18s fuel %8.2f g   tracking %7.3f m/km   wall %6.1f s   solver p50 %6.2f ms\n",
              tag.c_str(), m.fuel_g, m.tracking_m_per_km, m.runtime_s,
              m.solver_ms_p50);
  if (m.fault) std::printf("  FAULT: %s\n", m.fault_message.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Series hydraulic hybrid energy-management simulator"};
  app.require_subcommand(1);

  std::string cycle_path, config_path, out_dir, stats_path, algo_str = "asddp";
  std::uint64_t seed = 1;
  double max_time = -1.0;
  int runs = 3;
  bool freeze = false;

  auto add_common = [&](CLI::App* c, bool need_algo) {
    c->add_option("--cycle", cycle_path, "cycle CSV")->required();
    c->add_option("--config", config_path, "config JSON (defaults when absent)");
    c->add_option("--out", out_dir, "output directory");
    c->add_option("--seed", seed, "random seed");
    c->add_option("--max-time", max_time, "truncate the cycle [s]");
    if (need_algo)
      c->add_option("--algo", algo_str, "sgdm|asddp|apddp|ddp|instopt");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "one closed-loop simulation");
  add_common(run_cmd, true);
  run_cmd->add_option("--stats", stats_path, "initial driver statistics JSON");
  run_cmd->add_flag("--freeze-learning", freeze, "disable model adaptation");

  CLI::App* exp_cmd = app.add_subcommand("experiment", "multi-run experiments");
  exp_cmd->require_subcommand(1);
  CLI::App* prog_cmd = exp_cmd->add_subcommand("progression",
                                               "repeat the cycle, learning between runs");
  add_common(prog_cmd, true);
  prog_cmd->add_option("--runs", runs, "number of runs");
  prog_cmd->add_flag("--freeze-learning", freeze, "disable model adaptation");
  CLI::App* cross_cmd = exp_cmd->add_subcommand(
      "crosstrain", "run 0 frozen on foreign statistics, then adaptive");
  add_common(cross_cmd, true);
  cross_cmd->add_option("--runs", runs, "number of runs (incl. frozen run 0)");
  cross_cmd->add_option("--stats", stats_path, "source statistics JSON")->required();

  CLI::App* stats_cmd = app.add_subcommand("stats", "driver statistics utilities");
  stats_cmd->require_subcommand(1);
  CLI::App* learn_cmd = stats_cmd->add_subcommand(
      "learn", "learn statistics from a cycle's reference kinematics");
  std::string stats_out;
  int passes = 3;
  learn_cmd->add_option("--cycle", cycle_path, "cycle CSV")->required();
  learn_cmd->add_option("--config", config_path, "config JSON");
  learn_cmd->add_option("--out", stats_out, "output statistics JSON")->required();
  learn_cmd->add_option("--passes", passes, "learning passes over the cycle");
  CLI::App* show_cmd = stats_cmd->add_subcommand("show", "print model summary");
  show_cmd->add_option("--stats", stats_path, "statistics JSON")->required();

  CLI::App* grade_cmd = app.add_subcommand("grade-fit",
                                           "fit the elevation model at a position");
  double at_pos = 0.0;
  grade_cmd->add_option("--cycle", cycle_path, "cycle CSV with elevation")->required();
  grade_cmd->add_option("--config", config_path, "config JSON");
  grade_cmd->add_option("--at", at_pos, "vehicle position [m]");

  CLI::App* synth_cmd = app.add_subcommand("synth-cycle",
                                           "write a synthetic urban cycle with elevation");
  std::string synth_out;
  synth_cmd->add_option("--seed", seed, "generator seed");
  synth_cmd->add_option("--out", synth_out, "output CSV")->required();

  CLI::App* cfg_cmd = app.add_subcommand("config", "configuration utilities");
  cfg_cmd->require_subcommand(1);
  CLI::App* dump_cmd = cfg_cmd->add_subcommand("dump", "write the default config");
  std::string cfg_out;
  dump_cmd->add_option("--out", cfg_out, "output JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (dump_cmd->parsed()) {
      hhv::save_config(hhv::default_config(), cfg_out);
      return 0;
    }
    if (synth_cmd->parsed()) {
      hhv::save_cycle(hhv::synth_gps_like_cycle(seed), synth_out);
      return 0;
    }

    hhv::SimConfig cfg = hhv::load_config(config_path);

    if (run_cmd->parsed()) {
      hhv::RunConfig rc;
      rc.algo = hhv::algo_from_string(algo_str);
      rc.max_time = max_time;
      rc.seed = seed;
      rc.sim = cfg;
      hhv::CycleTrace trace = load_trace(cycle_path);
      hhv::DualSpeedModel stats = init_stats(stats_path, cfg);
      std::vector<hhv::LogRow> log;
      hhv::RunMetrics m = hhv::run_closed_loop(rc, trace, stats, !freeze, &log);
      print_metrics(algo_str, m);
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        hhv::write_log_csv((fs::path(out_dir) / "log.csv").string(), log);
        hhv::write_summary_json((fs::path(out_dir) / "summary.json").string(),
                                algo_str, trace.name, m, seed);
        hhv::save_dual_model(stats, (fs::path(out_dir) / "stats.json").string());
      }
      return m.fault ? 2 : 0;
    }

    if (prog_cmd->parsed() || cross_cmd->parsed()) {
      hhv::RunConfig rc;
      rc.algo = hhv::algo_from_string(algo_str);
      rc.max_time = max_time;
      rc.seed = seed;
      rc.sim = cfg;
      hhv::CycleTrace trace = load_trace(cycle_path);
      std::vector<hhv::RunMetrics> ms;
      hhv::DualSpeedModel stats = init_stats(stats_path, cfg);
      if (prog_cmd->parsed())
        ms = hhv::experiment_progression(rc, trace, runs, stats, freeze);
      else
        ms = hhv::experiment_crosstrain(rc, trace, runs, stats);
      for (std::size_t r = 0; r < ms.size(); ++r)
        print_metrics(algo_str + " run " + std::to_string(r), ms[r]);
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        for (std::size_t r = 0; r < ms.size(); ++r)
          hhv::write_summary_json(
              (fs::path(out_dir) / ("summary_run" + std::to_string(r) + ".json"))
                  .string(),
              algo_str, trace.name, ms[r], seed);
        hhv::save_dual_model(stats, (fs::path(out_dir) / "stats.json").string());
      }
      return 0;
    }

    if (learn_cmd->parsed()) {
      hhv::CycleTrace trace = load_trace(cycle_path);
      hhv::DualSpeedModel s = hhv::learn_stats_from_cycle(trace, passes, cfg);
      hhv::save_dual_model(s, stats_out);
      std::printf("learned %d passes over %s -> %s\n", passes, cycle_path.c_str(),
                  stats_out.c_str());
      return 0;
    }

    if (show_cmd->parsed()) {
      hhv::DualSpeedModel s = hhv::load_dual_model(stats_path);
      for (const auto* which : {"low", "high"}) {
        const hhv::MarkovModel& m =
            std::string(which) == "low" ? s.low : s.high;
        std::printf("[%s] alpha=%.4g  v_switch=%.3g m/s\n", which, m.alpha(),
                    s.v_switch);
        try {
          Eigen::VectorXd nu = m.stationary();
          double w_set = hhv::accel_setpoint(m, 1.0, 1.25);
          std::printf("  stationary mode at w=%.3g m/s^2, w_set=%.3g m/s^2\n",
                      hhv::DemandGrid::level(static_cast<int>(
                          std::max_element(nu.data(), nu.data() + nu.size()) -
                          nu.data())),
                      w_set);
        } catch (const std::exception& e) {
          std::printf("  stationary: %s\n", e.what());
        }
      }
      return 0;
    }

    if (grade_cmd->parsed()) {
      hhv::CycleTrace trace = load_trace(cycle_path);
      if (!trace.has_elev()) {
        std::fprintf(stderr, "cycle has no elevation column\n");
        return 1;
      }
      // resample elevation onto the spatial grid ahead of `at_pos`
      std::vector<double> pos = trace.positions();
      hhv::GradeGrid gg = cfg.grade_grid;
      std::vector<double> r = gg.sample_positions(at_pos);
      std::vector<double> y;
      for (double ri : r) {
        double ell = std::clamp(ri, pos.front(), pos.back());
        auto it = std::upper_bound(pos.begin(), pos.end(), ell);
        std::size_t hi = std::min<std::size_t>(it - pos.begin(), pos.size() - 1);
        if (hi == 0) hi = 1;
        double s = (ell - pos[hi - 1]) / std::max(pos[hi] - pos[hi - 1], 1e-9);
        y.push_back(trace.elev[hi - 1] + s * (trace.elev[hi] - trace.elev[hi - 1]));
      }
      hhv::GradeModel gm = hhv::fit_elevation(r, y, gg.knot_positions(at_pos), gg.zeta);
      std::printf("fit at %.1f m: %d knots, rms residual %.4g m\n", at_pos,
                  static_cast<int>(gm.knots.size()), gm.residual);
      for (double d = 0.0; d <= 120.0; d += 20.0)
        std::printf("  grade(%+6.1f m) = %+7.4f deg\n", d,
                    gm.grade(at_pos + d) * 180.0 / M_PI);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
