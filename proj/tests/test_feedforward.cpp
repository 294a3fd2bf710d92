#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lqt/feedforward.hpp"
#include "lqt/riccati.hpp"
#include "lqt/scenario.hpp"

using lqt::Mat;
using lqt::Vec;

namespace {

lqt::Scenario scalar_T2() {
  auto s = lqt::scenario_scalar();
  s.cost.T = 2.0;
  s.cost.r = (Vec(1) << 0.5).finished();
  s.x0 = (Vec(1) << 2.0).finished();
  return s;
}

}  // namespace

TEST_CASE("stationary feedforward matches the scalar hand computation") {
  // a=-1, b=e=1, qbar=3, R=1, d=1, r=1: P=1, Abar=-2, rhs=3, f=-1.5, h=-0.5
  auto s = lqt::scenario_scalar();
  auto g = lqt::solve_gare(s.plant, s.cost, 1e-3);
  auto ss = lqt::steady_state_feedforward(s.plant, s.cost, g, s.disturbance.tail(), s.cost.r);
  REQUIRE(std::abs(ss.f_ss(0) + 1.5) < 1e-9);
  REQUIRE(std::abs(ss.h_ss(0) + 0.5) < 1e-9);
  REQUIRE(ss.residual < 1e-12);
}

TEST_CASE("solve_feedforward anchors the terminal pair exactly") {
  auto s = lqt::scenario_scalar();
  s.cost.T = 2.0;
  s.cost.P_T = (Mat(1, 1) << 2.0).finished();
  s.cost.r = (Vec(1) << 1.0).finished();
  auto rt = lqt::solve_grde(s.plant, s.cost, 1e-3);
  auto ft = lqt::solve_feedforward(s.plant, s.cost, rt, s.disturbance);
  REQUIRE(ft.f.back()(0) == -2.0);  // -P_T r
  REQUIRE(ft.H.back() == 1.0);      // 1/2 r' P_T r
  REQUIRE(ft.grid.size() == rt.grid.size());
}

TEST_CASE("long-horizon feedforward sits on the stationary plateau") {
  // scalar fixture: g(t) = F d + Q r equals 3 both before and after the step,
  // so f = -1.5 away from the terminal layer; h switches with d
  auto s = lqt::scenario_scalar();  // T = 10
  auto rt = lqt::solve_grde(s.plant, s.cost, 1e-3);
  auto ft = lqt::solve_feedforward(s.plant, s.cost, rt, s.disturbance);
  REQUIRE(std::abs(ft.f.front()(0) + 1.5) < 1e-8);
  REQUIRE(std::abs(ft.f[1000](0) + 1.5) < 1e-7);
  // halfway out, the terminal layer ~1.5 e^{-2(T-t)} is still visible
  REQUIRE(std::abs(ft.f[5000](0) + 1.5) < 1e-4);
  REQUIRE(std::abs(ft.h.front()(0) + 1.5) < 1e-8);   // d(0) = 0
  REQUIRE(std::abs(ft.h[1000](0) + 0.5) < 1e-7);     // d(1) = 1
  // algebraic h identity holds at every node
  for (size_t i = 0; i < ft.h.size(); i += 500) {
    const Vec want = s.plant.B.transpose() * ft.f[i] +
                     s.plant.B.transpose() * s.cost.R * s.plant.E * s.disturbance(ft.grid[i]);
    REQUIRE((ft.h[i] - want).norm() == 0.0);
  }
}

TEST_CASE("optimal cost formula on the short scalar fixture") {
  auto s = scalar_T2();
  auto rt = lqt::solve_grde(s.plant, s.cost, 1e-3);
  auto ft = lqt::solve_feedforward(s.plant, s.cost, rt, s.disturbance);
  const double J = 0.5 * s.x0.dot(rt.P.front() * s.x0) + s.x0.dot(ft.f.front()) + ft.H.front();
  REQUIRE(J == Catch::Approx(0.8892997869).margin(1e-6));
}

TEST_CASE("convolution form agrees with the ODE route on the catalogued plant") {
  auto s = lqt::scenario_example_a();
  auto g = lqt::solve_gare(s.plant, s.cost, 1e-3);
  const double dev = lqt::convolution_cross_check(s.plant, s.cost, g, s.disturbance, s.cost.T, 1e-3);
  REQUIRE(dev < 1e-4);
}

TEST_CASE("appendix forms are consistent with the closed loop") {
  auto s = lqt::scenario_example_a();
  auto g = lqt::solve_gare(s.plant, s.cost, 1e-3);
  auto forms = lqt::appendix_b_forms(s.plant, s.cost, g);
  REQUIRE((forms.Abar - g.A_cl.transpose()).norm() < 1e-9 * (1.0 + g.A_cl.norm()));
  const Mat Q = lqt::assemble_Q(s.plant, s.cost);
  REQUIRE((forms.Abar * forms.Rcal - Q).norm() < 1e-8 * Q.norm());
  const Mat wantF = (g.M.transpose() * g.UpsilonPinv * s.plant.B.transpose() * s.cost.R - g.P) * s.plant.E;
  REQUIRE((forms.F - wantF).norm() == 0.0);
}

TEST_CASE("unstable closed loop is rejected for stationary feedforward") {
  auto s = lqt::scenario_scalar();
  lqt::GareSolution g;
  g.P = (Mat(1, 1) << 1.0).finished();
  g.M = (Mat(1, 1) << 1.0).finished();
  g.Upsilon = (Mat(1, 1) << 1.0).finished();
  g.UpsilonPinv = (Mat(1, 1) << 1.0).finished();
  g.A_cl = (Mat(1, 1) << 1.0).finished();  // not Hurwitz
  try {
    lqt::steady_state_feedforward(s.plant, s.cost, g, s.disturbance.tail(), s.cost.r);
    FAIL("expected throw");
  } catch (const lqt::Error& e) {
    REQUIRE(e.code() == lqt::ErrorCode::SingularAbar);
  }
}

TEST_CASE("singular Abar is reported for the appendix forms") {
  lqt::PlantModel p;
  p.A = Mat::Zero(1, 1);
  p.B = (Mat(1, 1) << 1).finished();
  p.E = (Mat(1, 1) << 1).finished();
  p.c_o = (Mat(1, 1) << 1).finished();
  lqt::CostSpec cost;
  cost.Qbar = (Mat(1, 1) << 1.0).finished();
  cost.R = (Mat(1, 1) << 1.0).finished();
  cost.P_T = Mat::Zero(1, 1);
  cost.T = 1.0;
  cost.r = Vec::Zero(1);
  lqt::GareSolution g;  // P = M = 0 makes Abar = A' = 0
  g.P = Mat::Zero(1, 1);
  g.M = Mat::Zero(1, 1);
  g.Upsilon = (Mat(1, 1) << 1.0).finished();
  g.UpsilonPinv = (Mat(1, 1) << 1.0).finished();
  g.A_cl = Mat::Zero(1, 1);
  try {
    lqt::appendix_b_forms(p, cost, g);
    FAIL("expected throw");
  } catch (const lqt::Error& e) {
    REQUIRE(e.code() == lqt::ErrorCode::SingularAbar);
  }
}

TEST_CASE("horizon mismatch between riccati grid and cost is rejected") {
  auto s = lqt::scenario_scalar();
  s.cost.T = 1.0;
  auto rt = lqt::solve_grde(s.plant, s.cost, 1e-3);
  s.cost.T = 2.0;
  try {
    lqt::solve_feedforward(s.plant, s.cost, rt, s.disturbance);
    FAIL("expected throw");
  } catch (const lqt::Error& e) {
    REQUIRE(e.code() == lqt::ErrorCode::GridMismatch);
  }
}
