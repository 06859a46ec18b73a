#include "hhv/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hhv {

std::pair<double, double> CycleTrace::reference_at(double time) const {
  if (t.empty()) throw std::out_of_range("reference_at: empty trace");
  if (time < t.front() || time > t.back())
    throw std::out_of_range("reference_at: t=" + std::to_string(time) +
                            " outside [" + std::to_string(t.front()) + ", " +
                            std::to_string(t.back()) + "]");
  auto it = std::lower_bound(t.begin(), t.end(), time);
  std::size_t i = static_cast<std::size_t>(it - t.begin());
  if (i < t.size() && t[i] == time) {
    return {v_ref[i], has_elev() ? elev[i] : 0.0};
  }
  std::size_t hi = i, lo = i - 1;
  double s = (time - t[lo]) / (t[hi] - t[lo]);
  double v = v_ref[lo] + s * (v_ref[hi] - v_ref[lo]);
  double e = has_elev() ? elev[lo] + s * (elev[hi] - elev[lo]) : 0.0;
  return {v, e};
}

std::vector<double> CycleTrace::positions() const {
  std::vector<double> pos(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i)
    pos[i] = pos[i - 1] + 0.5 * (v_ref[i] + v_ref[i - 1]) * (t[i] - t[i - 1]);
  return pos;
}

CycleTrace CycleTrace::truncated(double t_max) const {
  CycleTrace out;
  out.name = name;
  for (std::size_t i = 0; i < t.size() && t[i] <= t_max; ++i) {
    out.t.push_back(t[i]);
    out.v_ref.push_back(v_ref[i]);
    if (has_elev()) out.elev.push_back(elev[i]);
  }
  return out;
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line,
                             const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

CycleTrace load_cycle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cycle file: " + path);

  CycleTrace trace;
  trace.name = path;
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool expect_elev;
  if (line == "t_s,v_ref_mps")
    expect_elev = false;
  else if (line == "t_s,v_ref_mps,elev_m")
    expect_elev = true;
  else
    parse_fail(path, lineno, "unrecognized header '" + line + "'");

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string f0, f1, f2;
    std::getline(ss, f0, ',');
    if (!std::getline(ss, f1, ',')) parse_fail(path, lineno, "missing speed field");
    bool has_f2 = static_cast<bool>(std::getline(ss, f2, ','));
    if (has_f2 != expect_elev)
      parse_fail(path, lineno, expect_elev ? "missing elevation field"
                                           : "unexpected extra field");
    double tv, vv, ev = 0.0;
    try {
      std::size_t used = 0;
      tv = std::stod(f0, &used);
      if (used != f0.size()) throw std::invalid_argument(f0);
      vv = std::stod(f1, &used);
      if (used != f1.size()) throw std::invalid_argument(f1);
      if (expect_elev) {
        ev = std::stod(f2, &used);
        if (used != f2.size()) throw std::invalid_argument(f2);
      }
    } catch (const std::exception&) {
      parse_fail(path, lineno, "malformed number in '" + line + "'");
    }
    if (!std::isfinite(tv) || !std::isfinite(vv) || !std::isfinite(ev))
      parse_fail(path, lineno, "non-finite value");
    if (vv < 0.0) parse_fail(path, lineno, "negative speed");
    if (!trace.t.empty()) {
      if (tv <= trace.t.back()) parse_fail(path, lineno, "non-monotone time");
      if (tv - trace.t.back() > 2.0) parse_fail(path, lineno, "time gap > 2 s");
    }
    trace.t.push_back(tv);
    trace.v_ref.push_back(vv);
    if (expect_elev) trace.elev.push_back(ev);
  }
  if (trace.t.empty()) parse_fail(path, lineno, "no samples");
  return trace;
}

void save_cycle(const CycleTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write cycle file: " + path);
  out << (trace.has_elev() ? "t_s,v_ref_mps,elev_m\n" : "t_s,v_ref_mps\n");
  char buf[128];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace.has_elev())
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", trace.t[i],
                    trace.v_ref[i], trace.elev[i]);
    else
      std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", trace.t[i], trace.v_ref[i]);
    out << buf;
  }
}

CycleTrace synth_gps_like_cycle(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto uni = [&rng](double lo, double hi) {
    double u = static_cast<double>(rng() >> 11) * 0x1p-53;
    return lo + (hi - lo) * u;
  };

  CycleTrace trace;
  trace.name = "synth-gps-" + std::to_string(seed);
  std::vector<double>& v = trace.v_ref;
  v.push_back(0.0);

  auto ramp = [&v](double v1, int dur) {
    double v0 = v.back();
    for (int k = 1; k <= dur; ++k) {
      double s = 0.5 - 0.5 * std::cos(M_PI * k / dur);
      v.push_back(v0 + (v1 - v0) * s);
    }
  };
  auto hold = [&](double vc, int dur, double ripple, double period) {
    for (int k = 1; k <= dur; ++k)
      v.push_back(std::max(
          0.0, std::min(20.0, vc + ripple * std::sin(2.0 * M_PI * k / period))));
  };

  // Stop-and-go phase (~9 min).
  hold(0.0, 8, 0.0, 1.0);
  while (v.size() < 540) {
    double peak = uni(6.0, 15.0);
    int up = 8 + static_cast<int>(peak * uni(0.9, 1.4));
    ramp(peak, up);
    hold(peak, static_cast<int>(uni(10.0, 40.0)), uni(0.3, 0.9), uni(9.0, 25.0));
    ramp(0.0, 6 + static_cast<int>(peak * uni(0.8, 1.2)));
    hold(0.0, static_cast<int>(uni(5.0, 20.0)), 0.0, 1.0);
  }
  // Cruise phase (~6 min).
  ramp(17.0, 24);
  while (v.size() < 860) {
    hold(uni(15.5, 18.5), static_cast<int>(uni(25.0, 60.0)), uni(0.3, 1.0),
         uni(13.0, 31.0));
  }
  ramp(0.0, 16);
  hold(0.0, 10, 0.0, 1.0);

  trace.t.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) trace.t[i] = static_cast<double>(i);

  // Smooth rolling elevation, +/-10 m, slopes well inside 6%.
  std::vector<double> pos(v.size(), 0.0);
  for (std::size_t i = 1; i < v.size(); ++i)
    pos[i] = pos[i - 1] + 0.5 * (v[i] + v[i - 1]);
  double total = std::max(pos.back(), 1.0);
  double ph1 = uni(0.0, 2.0 * M_PI), ph2 = uni(0.0, 2.0 * M_PI);
  trace.elev.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double s = pos[i];
    trace.elev[i] = 6.5 * std::sin(2.0 * M_PI * 1.7 * s / total + ph1) +
                    3.0 * std::sin(2.0 * M_PI * 4.3 * s / total + ph2);
  }
  return trace;
}

VirtualDriver::VirtualDriver(double kp, double ki, double f_max)
    : kp_(kp), ki_(ki), f_max_(f_max) {
  if (kp < 0.0 || ki < 0.0) throw std::invalid_argument("driver gains");
}

double VirtualDriver::force(double v_ref, double v, double dt) {
  double err = v_ref - v;
  integral_ += ki_ * err * dt;
  integral_ = std::clamp(integral_, -f_max_, f_max_);
  return std::clamp(kp_ * err + integral_, -f_max_, f_max_);
}

}  // namespace hhv
