#include "hhv/driver_model.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <stdexcept>

#include "hhv/control_model.hpp"

namespace hhv {

double DemandGrid::level(int i) {
  if (i < 0 || i >= kLevels) throw std::out_of_range("demand level index");
  return kMin + spacing() * i;
}

int DemandGrid::quantize(double w) {
  if (!std::isfinite(w)) throw std::invalid_argument("quantize: non-finite demand");
  if (w <= kMin) return 0;
  if (w >= kMax) return kLevels - 1;
  double s = (w - kMin) / spacing();
  int lo = static_cast<int>(std::floor(s));
  double frac = s - lo;
  // ties toward zero: at exactly half way, pick the level nearer 0
  if (frac > 0.5) return lo + 1;
  if (frac < 0.5) return lo;
  double a = level(lo), b = level(lo + 1);
  return std::abs(a) <= std::abs(b) ? lo : lo + 1;
}

MarkovModel::MarkovModel(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::invalid_argument("learning rate must be in [0, 1)");
  P_ = Eigen::MatrixXd::Constant(DemandGrid::kLevels, DemandGrid::kLevels,
                                 1.0 / DemandGrid::kLevels);
}

MarkovModel MarkovModel::uniform(double alpha) { return MarkovModel(alpha); }

MarkovModel MarkovModel::gaussian_init(double sigma_steps, double alpha) {
  MarkovModel m(alpha);
  const int n = DemandGrid::kLevels;
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      double d = (j - i) / sigma_steps;
      m.P_(i, j) = std::exp(-0.5 * d * d);
      sum += m.P_(i, j);
    }
    m.P_.row(i) /= sum;
  }
  return m;
}

void MarkovModel::learn(int i_prev, int i_next) {
  const int n = DemandGrid::kLevels;
  if (i_prev < 0 || i_prev >= n || i_next < 0 || i_next >= n)
    throw std::out_of_range("learn: level index");
  P_.row(i_prev) *= (1.0 - alpha_);
  P_(i_prev, i_next) += alpha_;
}

Eigen::MatrixXd MarkovModel::multi_step(int n) const {
  if (n < 0) throw std::invalid_argument("multi_step: negative step count");
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(P_.rows(), P_.cols());
  for (int k = 0; k < n; ++k) out = out * P_;
  return out;
}

Eigen::MatrixXd MarkovModel::multi_step_rows(int i0, int n_max) const {
  const int m = static_cast<int>(P_.cols());
  if (i0 < 0 || i0 >= m) throw std::out_of_range("multi_step_rows: i0");
  Eigen::MatrixXd rows(n_max + 1, m);
  Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(m);
  r(i0) = 1.0;
  rows.row(0) = r;
  for (int n = 1; n <= n_max; ++n) {
    r = r * P_;
    rows.row(n) = r;
  }
  return rows;
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P, double tol) {
  const int n = static_cast<int>(P.rows());

  // Irreducible + aperiodic <=> some power up to (n-1)^2+1 is strictly
  // positive (Wielandt bound for primitive matrices). Boolean powers of the
  // adjacency pattern track the positivity pattern of P^k without underflow.
  {
    auto binarize = [](const Eigen::MatrixXd& m) {
      return m.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; }).eval();
    };
    Eigen::MatrixXd adj = binarize(P);
    Eigen::MatrixXd reach = adj;
    const int cap = (n - 1) * (n - 1) + 1;
    bool positive = (reach.array() > 0.0).all();
    for (int k = 1; k < cap && !positive; ++k) {
      reach = binarize(reach * adj);
      positive = (reach.array() > 0.0).all();
    }
    if (!positive)
      throw std::runtime_error("stationary: chain not irreducible/aperiodic");
  }

  Eigen::MatrixXd Q = P;
  for (int iter = 0; iter < 64; ++iter) {
    double spread = (Q.colwise().maxCoeff() - Q.colwise().minCoeff()).maxCoeff();
    if (spread < tol) {
      Eigen::VectorXd nu = Q.colwise().mean().transpose();
      nu /= nu.sum();
      return nu;
    }
    Q = Q * Q;
    for (int i = 0; i < n; ++i) Q.row(i) /= Q.row(i).sum();
  }
  throw std::runtime_error("stationary: power iteration did not converge");
}

Eigen::VectorXd MarkovModel::stationary(double tol) const {
  return stationary_distribution(P_, tol);
}

void MarkovModel::demand_moments(int i0, int n_max, Eigen::VectorXd& mean,
                                 Eigen::VectorXd& var) const {
  Eigen::MatrixXd rows = multi_step_rows(i0, n_max);
  Eigen::VectorXd w(DemandGrid::kLevels), w2(DemandGrid::kLevels);
  for (int j = 0; j < DemandGrid::kLevels; ++j) {
    w(j) = DemandGrid::level(j);
    w2(j) = w(j) * w(j);
  }
  mean = rows * w;
  var = rows * w2 - mean.cwiseProduct(mean);
  var = var.cwiseMax(0.0);
}

std::vector<double> MarkovModel::sample_path(int i0, std::span<const double> omegas,
                                             int n) const {
  if (static_cast<int>(omegas.size()) < n - 1)
    throw std::invalid_argument("sample_path: stream too short");
  std::vector<double> path(n);
  int i = i0;
  path[0] = DemandGrid::level(i);
  for (int k = 0; k + 1 < n; ++k) {
    double u = omegas[k];
    double acc = 0.0;
    int j = DemandGrid::kLevels - 1;
    for (int c = 0; c < DemandGrid::kLevels; ++c) {
      acc += P_(i, c);
      if (u <= acc) {
        j = c;
        break;
      }
    }
    i = j;
    path[k + 1] = DemandGrid::level(i);
  }
  return path;
}

void MarkovModel::validate() const {
  for (int i = 0; i < P_.rows(); ++i) {
    double sum = P_.row(i).sum();
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::runtime_error("row " + std::to_string(i) + " sums to " +
                               std::to_string(sum));
    for (int j = 0; j < P_.cols(); ++j)
      if (P_(i, j) < 0.0 || P_(i, j) > 1.0)
        throw std::runtime_error("entry out of [0,1]");
  }
}

void MarkovModel::set_matrix(const Eigen::MatrixXd& P) {
  if (P.rows() != DemandGrid::kLevels || P.cols() != DemandGrid::kLevels)
    throw std::invalid_argument("set_matrix: wrong shape");
  P_ = P;
  validate();
}

double accel_setpoint(const MarkovModel& m, double alpha_w, double beta_w) {
  Eigen::VectorXd nu = m.stationary();
  double mass = 0.0, m1 = 0.0, m2 = 0.0;
  for (int j = 0; j < DemandGrid::kLevels; ++j) {
    double w = DemandGrid::level(j);
    if (w < 0.0) continue;
    mass += nu(j);
    m1 += nu(j) * w;
    m2 += nu(j) * w * w;
  }
  if (mass <= 0.0)
    throw std::runtime_error("accel_setpoint: no mass on non-negative demands");
  double w_ave = m1 / mass;
  double w_std = std::sqrt(std::max(0.0, m2 / mass - w_ave * w_ave));
  return alpha_w * w_ave + beta_w * w_std;
}

double observe_demand(double f_cmd, double v, double phi, const VehicleParams& pr) {
  double drag = 0.5 * pr.c_d * pr.rho_air * v * v;
  double road = pr.m_veh * pr.g * (pr.c_r * std::cos(phi) + std::sin(phi));
  return (f_cmd - drag - road) / pr.m_veh;
}

RandomStreams RandomStreams::generate(int k, int len, std::uint64_t seed) {
  RandomStreams rs;
  rs.seed = seed;
  rs.omega.resize(k);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < k; ++i) {
    rs.omega[i].resize(len);
    for (int j = 0; j < len; ++j)
      rs.omega[i][j] = static_cast<double>(rng() >> 11) * 0x1p-53;
  }
  return rs;
}

namespace {

nlohmann::json model_to_json(const MarkovModel& m, double v_switch,
                             const std::string& which) {
  nlohmann::json j;
  j["alpha"] = m.alpha();
  j["grid"] = {{"levels", DemandGrid::kLevels},
               {"w_min", DemandGrid::kMin},
               {"w_max", DemandGrid::kMax}};
  std::vector<double> p;
  p.reserve(DemandGrid::kLevels * DemandGrid::kLevels);
  for (int i = 0; i < DemandGrid::kLevels; ++i)
    for (int c = 0; c < DemandGrid::kLevels; ++c) p.push_back(m.P()(i, c));
  j["P"] = p;
  j["v_switch"] = v_switch;
  j["which"] = which;
  return j;
}

MarkovModel model_from_json(const nlohmann::json& j, double* v_switch,
                            std::string* which) {
  if (j.at("grid").at("levels").get<int>() != DemandGrid::kLevels)
    throw std::runtime_error("model file: unexpected grid size");
  MarkovModel m(j.at("alpha").get<double>());
  auto p = j.at("P").get<std::vector<double>>();
  if (p.size() != DemandGrid::kLevels * DemandGrid::kLevels)
    throw std::runtime_error("model file: wrong P length");
  Eigen::MatrixXd P(DemandGrid::kLevels, DemandGrid::kLevels);
  for (int i = 0; i < DemandGrid::kLevels; ++i)
    for (int c = 0; c < DemandGrid::kLevels; ++c)
      P(i, c) = p[i * DemandGrid::kLevels + c];
  m.set_matrix(P);  // validates row sums
  if (v_switch) *v_switch = j.value("v_switch", 10.0);
  if (which) *which = j.value("which", "low");
  return m;
}

}  // namespace

void save_model(const MarkovModel& m, double v_switch, const std::string& which,
                const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << model_to_json(m, v_switch, which).dump(1) << "\n";
}

MarkovModel load_model(const std::string& path, double* v_switch,
                       std::string* which) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  return model_from_json(j, v_switch, which);
}

void save_dual_model(const DualSpeedModel& m, const std::string& path) {
  nlohmann::json j;
  j["low"] = model_to_json(m.low, m.v_switch, "low");
  j["high"] = model_to_json(m.high, m.v_switch, "high");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << j.dump(1) << "\n";
}

DualSpeedModel load_dual_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  DualSpeedModel m;
  m.low = model_from_json(j.at("low"), &m.v_switch, nullptr);
  m.high = model_from_json(j.at("high"), nullptr, nullptr);
  return m;
}

}  // namespace hhv
