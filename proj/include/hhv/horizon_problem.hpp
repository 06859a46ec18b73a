#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hhv {

// Raw partials of a stage cost g(x, x_next, u, w).
struct StageCostPartials {
  double g = 0.0;
  Eigen::RowVectorXd gx, gn, gu;
  Eigen::MatrixXd gxx, gnn, gxn, guu, gux, gun;

  void resize(int nx, int nu) {
    gx = Eigen::RowVectorXd::Zero(nx);
    gn = Eigen::RowVectorXd::Zero(nx);
    gu = Eigen::RowVectorXd::Zero(nu);
    gxx = Eigen::MatrixXd::Zero(nx, nx);
    gnn = Eigen::MatrixXd::Zero(nx, nx);
    gxn = Eigen::MatrixXd::Zero(nx, nx);
    guu = Eigen::MatrixXd::Zero(nu, nu);
    gux = Eigen::MatrixXd::Zero(nu, nx);
    gun = Eigen::MatrixXd::Zero(nu, nx);
  }
};

// Finite-horizon optimal-control problem with a scalar disturbance input:
//   x_{n+1} = F_n(x_n, u_n, w_n),  cost sum_n g_n(x_n, x_{n+1}, u_n, w_n) + h(x_N)
// All solvers in this project work against this interface.
class HorizonProblem {
 public:
  virtual ~HorizonProblem() = default;

  virtual int dim_x() const = 0;
  virtual int dim_u() const = 0;
  virtual int horizon() const = 0;

  virtual Eigen::VectorXd dynamics(int n, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u, double w) const = 0;
  virtual void dynamics_partials(int n, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& u, double w,
                                 Eigen::MatrixXd& fx,
                                 Eigen::MatrixXd& fu) const = 0;

  virtual double cost(int n, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& x_next, const Eigen::VectorXd& u,
                      double w) const = 0;
  virtual void cost_partials(int n, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& x_next,
                             const Eigen::VectorXd& u, double w,
                             StageCostPartials& out) const = 0;

  // Terminal cost hooks (identically zero for the vehicle problem).
  virtual double terminal_cost(const Eigen::VectorXd&) const { return 0.0; }
  virtual void terminal_partials(const Eigen::VectorXd& x,
                                 Eigen::RowVectorXd& hx,
                                 Eigen::MatrixXd& hxx) const {
    hx = Eigen::RowVectorXd::Zero(x.size());
    hxx = Eigen::MatrixXd::Zero(x.size(), x.size());
  }
};

// Per-stage disturbance support and probabilities (rows sum to 1).
class DisturbanceModel {
 public:
  virtual ~DisturbanceModel() = default;
  virtual int count(int n) const = 0;
  virtual double value(int n, int j) const = 0;
  virtual double prob(int n, int j) const = 0;
};

// Known (or deterministic) disturbance path.
class DeterministicPath : public DisturbanceModel {
 public:
  explicit DeterministicPath(std::vector<double> w) : w_(std::move(w)) {}
  int count(int) const override { return 1; }
  double value(int n, int) const override { return w_[static_cast<std::size_t>(n)]; }
  double prob(int, int) const override { return 1.0; }

 private:
  std::vector<double> w_;
};

// Fixed support with per-stage probability rows (e.g. multi-step Markov
// rows conditioned on the initial demand).
class StageDistribution : public DisturbanceModel {
 public:
  StageDistribution(Eigen::VectorXd support, Eigen::MatrixXd rows)
      : support_(std::move(support)), rows_(std::move(rows)) {}
  int count(int) const override { return static_cast<int>(support_.size()); }
  double value(int, int j) const override { return support_(j); }
  double prob(int n, int j) const override { return rows_(n, j); }

  const Eigen::MatrixXd& rows() const { return rows_; }
  const Eigen::VectorXd& support() const { return support_; }

  // Collapses each stage to its probability-averaged demand value.
  DeterministicPath averaged(int n_stages) const {
    std::vector<double> w(static_cast<std::size_t>(n_stages));
    for (int n = 0; n < n_stages; ++n) {
      double m = 0.0;
      for (int j = 0; j < support_.size(); ++j) m += rows_(n, j) * support_(j);
      w[static_cast<std::size_t>(n)] = m;
    }
    return DeterministicPath(std::move(w));
  }

 private:
  Eigen::VectorXd support_;
  Eigen::MatrixXd rows_;
};

}  // namespace hhv
