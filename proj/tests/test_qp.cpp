#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <optional>
#include <random>

#include "hhv/qp.hpp"
#include "oracles.hpp"

using namespace hhv;

namespace {

// independent reference: enumerate all activity patterns of a 2-D box QP
//   min 1/2 z'Hz + q'z  s.t. lo <= z <= hi
// and keep the KKT-consistent candidate.
Eigen::Vector2d box_qp_enumerate(const Eigen::Matrix2d& h, const Eigen::Vector2d& q,
                                 const Eigen::Vector2d& lo, const Eigen::Vector2d& hi) {
  Eigen::Vector2d best;
  double best_val = 1e300;
  // each coordinate: 0 = free, 1 = at lo, 2 = at hi
  for (int c0 = 0; c0 < 3; ++c0) {
    for (int c1 = 0; c1 < 3; ++c1) {
      int code[2] = {c0, c1};
      Eigen::Vector2d z;
      std::vector<int> free;
      for (int i = 0; i < 2; ++i) {
        if (code[i] == 1)
          z(i) = lo(i);
        else if (code[i] == 2)
          z(i) = hi(i);
        else
          free.push_back(i);
      }
      if (free.size() == 2) {
        z = h.ldlt().solve(-q);
      } else if (free.size() == 1) {
        int i = free[0], j = 1 - i;
        z(i) = -(q(i) + h(i, j) * z(j)) / h(i, i);
      }
      bool feasible = z(0) >= lo(0) - 1e-12 && z(0) <= hi(0) + 1e-12 &&
                      z(1) >= lo(1) - 1e-12 && z(1) <= hi(1) + 1e-12;
      if (!feasible) continue;
      // KKT: gradient components at bounds must push outward
      Eigen::Vector2d grad = h * z + q;
      bool kkt = true;
      for (int i = 0; i < 2; ++i) {
        if (code[i] == 0 && std::abs(grad(i)) > 1e-9) kkt = false;
        if (code[i] == 1 && grad(i) < -1e-9) kkt = false;
        if (code[i] == 2 && grad(i) > 1e-9) kkt = false;
      }
      if (!kkt) continue;
      double val = 0.5 * z.dot(h * z) + q.dot(z);
      if (val < best_val) {
        best_val = val;
        best = z;
      }
    }
  }
  REQUIRE(best_val < 1e300);
  return best;
}

Eigen::MatrixXd box_rows(Eigen::VectorXd& c, const Eigen::Vector2d& lo,
                         const Eigen::Vector2d& hi) {
  Eigen::MatrixXd d(4, 2);
  d << 1, 0, -1, 0, 0, 1, 0, -1;
  c = Eigen::VectorXd(4);
  c << hi(0), -lo(0), hi(1), -lo(1);
  return d;
}

}  // namespace

TEST_CASE("hessian floor") {
  SUBCASE("indefinite 2x2") {
    Eigen::Matrix2d q = Eigen::Vector2d(-1.0, 2.0).asDiagonal();
    Eigen::MatrixXd f = hessian_floor(q, 0.003);
    CHECK(f(0, 0) == doctest::Approx(0.003).epsilon(1e-12));
    CHECK(f(1, 1) == doctest::Approx(3.003).epsilon(1e-12));
  }
  SUBCASE("already positive definite is untouched") {
    Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
    CHECK((hessian_floor(id, 0.003) - id).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("random symmetric matrices get a floored spectrum") {
    std::mt19937_64 g(7);
    for (int k = 0; k < 300; ++k) {
      Eigen::Matrix3d a;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = oracle::uniform(g, -2.0, 2.0);
      Eigen::MatrixXd s = 0.5 * (a + a.transpose());
      Eigen::MatrixXd f = hessian_floor(s, 0.003);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f);
      CHECK(es.eigenvalues().minCoeff() >= 0.003 - 1e-12);
    }
  }
}

TEST_CASE("one-dimensional stage subproblems") {
  Eigen::MatrixXd h(1, 1);
  h << 1.0;
  Eigen::MatrixXd d(1, 1);
  d << 1.0;
  Eigen::VectorXd c(1);
  c << 1.0;
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(1);

  Eigen::VectorXd q(1);
  q << -5.0;  // min 1/2 u^2 - 5u, u <= 1 -> clipped at 1
  CHECK(stage_qp(h, q, d, c, {}, z0).z(0) == doctest::Approx(1.0).epsilon(1e-10));

  q << 0.5;  // interior at -0.5
  CHECK(stage_qp(h, q, d, c, {}, z0).z(0) == doctest::Approx(-0.5).epsilon(1e-10));
}

TEST_CASE("random 2-D box QPs match the KKT enumeration") {
  std::mt19937_64 g(13);
  for (int k = 0; k < 3000; ++k) {
    Eigen::Matrix2d a;
    for (int i = 0; i < 4; ++i) a(i / 2, i % 2) = oracle::uniform(g, -1.5, 1.5);
    Eigen::Matrix2d h = a * a.transpose() + 0.05 * Eigen::Matrix2d::Identity();
    Eigen::Vector2d q(oracle::uniform(g, -3.0, 3.0), oracle::uniform(g, -3.0, 3.0));
    Eigen::Vector2d lo(oracle::uniform(g, -2.0, 0.0), oracle::uniform(g, -2.0, 0.0));
    Eigen::Vector2d hi(oracle::uniform(g, 0.1, 2.0), oracle::uniform(g, 0.1, 2.0));

    Eigen::VectorXd c;
    Eigen::MatrixXd d = box_rows(c, lo, hi);
    Eigen::Vector2d z0 = 0.5 * (lo + hi);
    QpResult res = stage_qp(h, q, d, c, {}, z0);
    Eigen::Vector2d want = box_qp_enumerate(h, q, lo, hi);
    CHECK((res.z - want).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("general rows and degenerate geometry") {
  std::mt19937_64 g(29);
  for (int k = 0; k < 500; ++k) {
    Eigen::Matrix2d a;
    for (int i = 0; i < 4; ++i) a(i / 2, i % 2) = oracle::uniform(g, -1.0, 1.0);
    Eigen::Matrix2d h = a * a.transpose() + 0.1 * Eigen::Matrix2d::Identity();
    Eigen::Vector2d q(oracle::uniform(g, -2.0, 2.0), oracle::uniform(g, -2.0, 2.0));
    // box plus a diagonal cut through the origin neighborhood
    Eigen::MatrixXd d(5, 2);
    Eigen::VectorXd c(5);
    d << 1, 0, -1, 0, 0, 1, 0, -1, oracle::uniform(g, -1.0, 1.0),
        oracle::uniform(g, -1.0, 1.0);
    c << 1.5, 1.5, 1.5, 1.5, oracle::uniform(g, 0.2, 1.5);
    QpResult res = stage_qp(h, q, d, c, {}, Eigen::Vector2d::Zero());
    // feasibility and stationarity on the active set
    for (int i = 0; i < 5; ++i) CHECK(d.row(i).dot(res.z) <= c(i) + 1e-8);
    Eigen::Vector2d grad = h * res.z + q;
    // project the negative gradient onto feasible directions: must not improve
    for (int trial = 0; trial < 24; ++trial) {
      double ang = trial * M_PI / 12.0;
      Eigen::Vector2d step(std::cos(ang), std::sin(ang));
      Eigen::Vector2d cand = res.z + 1e-6 * step;
      bool ok = true;
      for (int i = 0; i < 5; ++i)
        if (d.row(i).dot(cand) > c(i)) ok = false;
      if (!ok) continue;
      double delta = grad.dot(1e-6 * step);
      CHECK(delta >= -1e-10);
    }
  }
}

TEST_CASE("soft rows relax instead of failing") {
  Eigen::MatrixXd h = Eigen::Matrix2d::Identity();
  Eigen::VectorXd q = Eigen::Vector2d::Zero();
  // contradictory state rows: z0 + z1 <= -5 and -z0 - z1 <= -3 (infeasible with box)
  Eigen::MatrixXd d(4, 2);
  Eigen::VectorXd c(4);
  d << 1, 1, -1, -1, 1, 0, -1, 0;
  c << -5.0, -3.0, 1.0, 1.0;
  std::vector<bool> soft = {true, true, false, false};
  QpResult res = solve_qp(h, q, d, c, soft, Eigen::Vector2d::Zero());
  CHECK(res.relaxed);
  CHECK(res.max_slack > 0.0);
  CHECK(res.z(0) >= -1.0 - 1e-9);
  CHECK(res.z(0) <= 1.0 + 1e-9);

  // hard infeasible start throws
  std::vector<bool> hard = {false, false, false, false};
  CHECK_THROWS_AS(static_cast<void>(solve_qp(h, q, d, c, hard, Eigen::Vector2d::Zero())),
                  std::runtime_error);
}
