#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hhv/terrain.hpp"
#include "oracles.hpp"

using namespace hhv;

namespace {

// paper-figure grid: 20 m samples and 40 m knots on [-20, 300]
GradeGrid default_grid() { return GradeGrid{}; }

GradeModel fit_profile(const std::function<double(double)>& y_of_r) {
  GradeGrid gg = default_grid();
  std::vector<double> r = gg.sample_positions(0.0);
  std::vector<double> y;
  for (double ri : r) y.push_back(y_of_r(ri));
  return fit_elevation(r, y, gg.knot_positions(0.0), gg.zeta);
}

constexpr double kDeg = M_PI / 180.0;

}  // namespace

TEST_CASE("fit recovers its own samples") {
  GradeModel truth;
  truth.a0 = 3.0;
  truth.knots = Eigen::VectorXd::LinSpaced(9, -20.0, 300.0);
  truth.a = Eigen::VectorXd(9);
  truth.a << 0.5, -0.2, 0.9, 0.1, -0.7, 0.3, 0.2, -0.4, 0.6;
  truth.zeta = 7.5e-5;
  truth.span_lo = -20.0;
  truth.span_hi = 300.0;

  GradeGrid gg = default_grid();
  gg.knot_step = 40.0;
  std::vector<double> r = gg.sample_positions(0.0);
  std::vector<double> y;
  for (double ri : r) y.push_back(truth.elevation(ri));
  GradeModel fit = fit_elevation(r, y, truth.knots, truth.zeta);
  for (double ri : r)
    CHECK(fit.elevation(ri) == doctest::Approx(truth.elevation(ri)).epsilon(1e-8));
  CHECK(fit.residual < 1e-8);
}

TEST_CASE("constant elevation fits flat") {
  GradeModel gm = fit_profile([](double) { return 12.5; });
  CHECK(gm.a0 + gm.a.sum() * 1.0 != 0.0);  // coefficients exist
  for (double ell = -20.0; ell <= 300.0; ell += 7.0) {
    CHECK(gm.elevation(ell) == doctest::Approx(12.5).epsilon(1e-9));
    CHECK(std::abs(gm.grade(ell)) < 1e-9);
  }
}

TEST_CASE("five percent slope reconstructed within 0.1 degree") {
  GradeModel gm = fit_profile([](double r) { return 0.05 * r; });
  double want = std::asin(0.05);
  for (double ell = 0.0; ell <= 280.0; ell += 5.0)
    CHECK(std::abs(gm.grade(ell) - want) < 0.1 * kDeg);
}

TEST_CASE("grade matches finite differences of the elevation") {
  GradeModel gm = fit_profile(
      [](double r) { return 4.0 * std::sin(r / 70.0) + 0.02 * r; });
  for (double ell = -10.0; ell <= 290.0; ell += 3.7) {
    double h = 1e-4;
    double fd = (gm.elevation(ell + h) - gm.elevation(ell - h)) / (2.0 * h);
    CHECK(std::abs(std::asin(fd) - gm.grade(ell)) < 1e-6);
  }
}

TEST_CASE("symmetric bump has zero grade at the peak") {
  GradeModel gm;
  gm.a0 = 0.0;
  gm.knots = Eigen::VectorXd(2);
  gm.knots << 100.0, 180.0;
  gm.a = Eigen::VectorXd(2);
  gm.a << 2.0, 2.0;
  gm.zeta = 7.5e-5;
  gm.span_lo = 0.0;
  gm.span_hi = 280.0;
  CHECK(std::abs(gm.grade(140.0)) < 1e-12);  // midpoint of equal knots
}

TEST_CASE("least-squares optimality") {
  GradeGrid gg = default_grid();
  std::vector<double> r = gg.sample_positions(0.0);
  std::vector<double> y;
  std::mt19937_64 g(3);
  for (double ri : r) y.push_back(0.03 * ri + oracle::uniform(g, -0.5, 0.5));
  GradeModel gm = fit_elevation(r, y, gg.knot_positions(0.0), gg.zeta);

  auto ssr = [&](const GradeModel& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      double e = m.elevation(r[i]) - y[i];
      s += e * e;
    }
    return s;
  };
  double base = ssr(gm);
  for (int i = -1; i < gm.a.size(); ++i) {
    for (double d : {-1e-4, 1e-4}) {
      GradeModel pert = gm;
      if (i < 0)
        pert.a0 += d;
      else
        pert.a(i) += d;
      CHECK(ssr(pert) >= base - 1e-12);
    }
  }
}

TEST_CASE("grade is odd under elevation negation") {
  GradeGrid gg = default_grid();
  std::vector<double> r = gg.sample_positions(0.0);
  std::vector<double> y, yn;
  for (double ri : r) {
    double v = 3.0 * std::sin(ri / 60.0) + 0.01 * ri;
    y.push_back(v);
    yn.push_back(-v);
  }
  GradeModel a = fit_elevation(r, y, gg.knot_positions(0.0), gg.zeta);
  GradeModel b = fit_elevation(r, yn, gg.knot_positions(0.0), gg.zeta);
  for (double ell = -20.0; ell <= 300.0; ell += 11.0)
    CHECK(a.grade(ell) == doctest::Approx(-b.grade(ell)).epsilon(1e-9));
}

TEST_CASE("positions outside the span clamp to the boundary grade") {
  GradeModel gm = fit_profile([](double r) { return 0.04 * r; });
  CHECK(gm.grade(-500.0) == gm.grade(gm.span_lo));
  CHECK(gm.grade(5000.0) == gm.grade(gm.span_hi));
}

TEST_CASE("nonphysical fits are rejected at evaluation") {
  GradeModel gm;
  gm.a0 = 0.0;
  gm.knots = Eigen::VectorXd(1);
  gm.knots << 0.0;
  gm.a = Eigen::VectorXd(1);
  gm.a << 1e4;
  gm.zeta = 1.0;
  gm.span_lo = -10.0;
  gm.span_hi = 10.0;
  CHECK_THROWS_AS(static_cast<void>(gm.grade(5.0)), std::domain_error);
}

TEST_CASE("fit input validation") {
  GradeGrid gg = default_grid();
  std::vector<double> r = gg.sample_positions(0.0);
  std::vector<double> y(r.size(), 1.0);
  Eigen::VectorXd dup(3);
  dup << 0.0, 0.0, 40.0;
  CHECK_THROWS_AS(static_cast<void>(fit_elevation(r, y, dup, 7.5e-5)),
                  std::invalid_argument);
  std::vector<double> r2(r.begin(), r.begin() + 3), y2(y.begin(), y.begin() + 3);
  CHECK_THROWS_AS(
      static_cast<void>(fit_elevation(r2, y2, gg.knot_positions(0.0), 7.5e-5)),
      std::invalid_argument);
  // duplicate sample positions collapse the column space
  std::vector<double> rdup(r.size(), 100.0), ydup(r.size(), 1.0);
  CHECK_THROWS_AS(
      static_cast<void>(fit_elevation(rdup, ydup, gg.knot_positions(0.0), 7.5e-5)),
      std::runtime_error);
}

TEST_CASE("horizon_grades") {
  SUBCASE("flat model gives zeros") {
    GradeModel flat = GradeModel::flat();
    auto phis = horizon_grades(flat, {0.0, 10.0, 50.0});
    for (double p : phis) CHECK(p == 0.0);
  }
  SUBCASE("stationary vehicle sees a constant grade") {
    GradeModel gm = fit_profile([](double r) { return 0.03 * r; });
    auto phis = horizon_grades(gm, std::vector<double>(13, 80.0));
    for (double p : phis) CHECK(p == phis[0]);
  }
  SUBCASE("constant speed on a constant slope") {
    GradeModel gm = fit_profile([](double r) { return 0.05 * r; });
    std::vector<double> pos;
    for (int n = 0; n <= 12; ++n) pos.push_back(20.0 + 15.0 * n);
    auto phis = horizon_grades(gm, pos);
    for (double p : phis)
      CHECK(std::abs(p - std::asin(0.05)) < 0.1 * kDeg);
  }
}
