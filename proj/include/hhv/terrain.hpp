#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hhv {

// Multiquadric RBF fit of elevation vs. position:
//   y(l) = a0 + sum_i a_i * sqrt(1 + zeta*(l - c_i)^2)
// Immutable after fit; positions outside the fitted span are clamped to
// the span edge (boundary grade, no extrapolation).
struct GradeModel {
  double a0 = 0.0;
  Eigen::VectorXd a;      // knot weights [m]
  Eigen::VectorXd knots;  // strictly increasing positions [m]
  double zeta = 7.5e-5;   // 1/m^2
  double span_lo = 0.0;
  double span_hi = 0.0;
  double residual = 0.0;  // fit RMS residual [m]

  double elevation(double ell) const;
  double slope(double ell) const;  // dy/dl, position clamped to span
  // asin(slope); throws std::domain_error when |slope| > 1
  double grade(double ell) const;

  static GradeModel flat() { return GradeModel{}; }
};

// Least-squares fit through (r_i, y_i). Needs at least n_knots + 1 points;
// solved by ridge-stabilized normal equations (ridge 1e-10 on the Gram
// matrix). Throws on rank deficiency (duplicate knots / degenerate grid).
GradeModel fit_elevation(const std::vector<double>& r, const std::vector<double>& y,
                         const Eigen::VectorXd& knots, double zeta);

// Elementwise grade at the solver's predicted positions.
std::vector<double> horizon_grades(const GradeModel& gm,
                                   const std::vector<double>& positions);

// Default spatial grid: samples every `sample_step` from `behind` to
// `ahead` of the vehicle, knots every `knot_step` coincident with the
// span ends.
struct GradeGrid {
  double behind = -20.0;
  double ahead = 300.0;
  double sample_step = 20.0;
  double knot_step = 40.0;
  double zeta = 7.5e-5;

  std::vector<double> sample_positions(double ell0) const;
  Eigen::VectorXd knot_positions(double ell0) const;
};

}  // namespace hhv
