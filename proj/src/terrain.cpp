#include "hhv/terrain.hpp"

#include <cmath>
#include <stdexcept>

namespace hhv {

double GradeModel::elevation(double ell) const {
  double y = a0;
  for (int i = 0; i < a.size(); ++i) {
    double d = ell - knots(i);
    y += a(i) * std::sqrt(1.0 + zeta * d * d);
  }
  return y;
}

double GradeModel::slope(double ell) const {
  if (a.size() == 0) return 0.0;
  ell = std::clamp(ell, span_lo, span_hi);
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    double d = ell - knots(i);
    s += a(i) * zeta * d / std::sqrt(1.0 + zeta * d * d);
  }
  return s;
}

double GradeModel::grade(double ell) const {
  double s = slope(ell);
  if (std::abs(s) > 1.0)
    throw std::domain_error("grade: |dy/dl| > 1, nonphysical elevation fit");
  return std::asin(s);
}

GradeModel fit_elevation(const std::vector<double>& r, const std::vector<double>& y,
                         const Eigen::VectorXd& knots, double zeta) {
  const int m = static_cast<int>(r.size());
  const int nk = static_cast<int>(knots.size());
  if (static_cast<int>(y.size()) != m)
    throw std::invalid_argument("fit_elevation: r/y length mismatch");
  if (m < nk + 1)
    throw std::invalid_argument("fit_elevation: need at least n_knots+1 points");
  for (int i = 1; i < nk; ++i)
    if (!(knots(i) > knots(i - 1)))
      throw std::invalid_argument("fit_elevation: knots must be strictly increasing");
  if (!(zeta > 0.0)) throw std::invalid_argument("fit_elevation: zeta must be positive");

  Eigen::MatrixXd phi(m, nk + 1);
  for (int i = 0; i < m; ++i) {
    phi(i, 0) = 1.0;
    for (int j = 0; j < nk; ++j) {
      double d = r[static_cast<std::size_t>(i)] - knots(j);
      phi(i, j + 1) = std::sqrt(1.0 + zeta * d * d);
    }
  }
  Eigen::VectorXd rhs =
      Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(m));

  // rank-revealing QR keeps the self-consistency error at machine level;
  // the multiquadric design matrix is too ill-conditioned for normal
  // equations to recover its own samples to 1e-8
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
  qr.setThreshold(1e-10);
  if (qr.rank() < nk + 1)
    throw std::runtime_error("fit_elevation: rank-deficient design matrix");
  Eigen::VectorXd coef = qr.solve(rhs);

  GradeModel gm;
  gm.a0 = coef(0);
  gm.a = coef.tail(nk);
  gm.knots = knots;
  gm.zeta = zeta;
  gm.span_lo = r.front();
  gm.span_hi = r.back();
  gm.residual = std::sqrt((phi * coef - rhs).squaredNorm() / m);
  return gm;
}

std::vector<double> horizon_grades(const GradeModel& gm,
                                   const std::vector<double>& positions) {
  std::vector<double> out;
  out.reserve(positions.size());
  for (double p : positions) out.push_back(gm.grade(p));
  return out;
}

std::vector<double> GradeGrid::sample_positions(double ell0) const {
  std::vector<double> r;
  for (double d = behind; d <= ahead + 1e-9; d += sample_step) r.push_back(ell0 + d);
  return r;
}

Eigen::VectorXd GradeGrid::knot_positions(double ell0) const {
  int n = static_cast<int>(std::floor((ahead - behind) / knot_step + 1e-9)) + 1;
  Eigen::VectorXd k(n);
  for (int i = 0; i < n; ++i) k(i) = ell0 + behind + knot_step * i;
  return k;
}

}  // namespace hhv
