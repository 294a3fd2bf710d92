#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lqt/controller.hpp"
#include "lqt/scenario.hpp"
#include "lqt/simulator.hpp"

using lqt::Mat;
using lqt::Vec;

namespace {

std::unique_ptr<lqt::ControlLaw> zero_law(const lqt::PlantModel& p) {
  lqt::GesobcGains g;
  g.K_x = Mat::Zero(p.m(), p.n());
  g.K_d = Mat::Zero(p.m(), p.q());
  return lqt::make_gesobc_law(p, g);
}

}  // namespace

TEST_CASE("rk4 tracks the uncontrolled stable mode to integrator accuracy") {
  auto s = lqt::scenario_example_a();  // first state row is x' = -4x, decoupled
  auto law = zero_law(s.plant);
  auto log = lqt::simulate(s.plant, *law, s.disturbance, s.x0, s.cost.T, 1e-3);
  double worst = 0.0;
  for (size_t k = 0; k < log.x.size(); ++k)
    worst = std::max(worst, std::abs(log.x[k](0) - std::exp(-4.0 * log.times[k])));
  REQUIRE(worst < 1e-9);
  REQUIRE(log.times.back() == s.cost.T);
  REQUIRE(log.x.size() == 5001);
  REQUIRE(log.u.size() == log.x.size());  // trailing control sample present
  REQUIRE(log.d.size() == log.x.size());
  REQUIRE((log.d.back() - s.disturbance(s.cost.T)).norm() == 0.0);
  for (size_t k = 0; k < log.x.size(); k += 1000)
    REQUIRE((log.y[k] - s.plant.c_o * log.x[k]).norm() == 0.0);
}

TEST_CASE("state divergence is reported rather than logged as inf") {
  lqt::PlantModel p;
  p.A = (Mat(1, 1) << 10.0).finished();
  p.B = (Mat(1, 1) << 1.0).finished();
  p.E = (Mat(1, 1) << 1.0).finished();
  p.c_o = (Mat(1, 1) << 1.0).finished();
  auto law = zero_law(p);
  try {
    lqt::simulate(p, *law, lqt::Signal::constant(Vec::Zero(1)), (Vec(1) << 1.0).finished(), 100.0, 0.01);
    FAIL("expected throw");
  } catch (const lqt::Error& e) {
    REQUIRE(e.code() == lqt::ErrorCode::NonFiniteState);
  }
}

TEST_CASE("running cost integrates the quadratic integrand") {
  // x' = 1 from x0 = 0, u = 0: integrand = qbar t^2 / 2 + R/2, closed form t^3/3 + 1.5 t
  lqt::PlantModel p;
  p.A = Mat::Zero(1, 1);
  p.B = (Mat(1, 1) << 1.0).finished();
  p.E = (Mat(1, 1) << 1.0).finished();
  p.c_o = (Mat(1, 1) << 1.0).finished();
  lqt::CostSpec cost;
  cost.Qbar = (Mat(1, 1) << 2.0).finished();
  cost.R = (Mat(1, 1) << 3.0).finished();
  cost.P_T = (Mat(1, 1) << 4.0).finished();
  cost.T = 1.0;
  cost.r = Vec::Zero(1);
  auto law = zero_law(p);
  auto log = lqt::simulate(p, *law, lqt::Signal::constant((Vec(1) << 1.0).finished()),
                           Vec::Zero(1), 1.0, 1e-3, &cost);
  REQUIRE(log.running_cost.front() == 0.0);
  REQUIRE(log.running_cost[500] == Catch::Approx(0.125 / 3.0 + 0.75).margin(1e-6));
  REQUIRE(log.running_cost.back() == Catch::Approx(1.0 / 3.0 + 1.5).margin(1e-6));

  // evaluate_cost re-accumulates the same trapezoid and adds the terminal weight
  auto rep = lqt::evaluate_cost(p, cost, log);
  REQUIRE(rep.J_sim == Catch::Approx(log.running_cost.back() + 2.0).margin(1e-12));
  REQUIRE_FALSE(rep.J_formula.has_value());

  // without a cost spec the running cost stays zero
  auto bare = lqt::simulate(p, *law, lqt::Signal::constant((Vec(1) << 1.0).finished()),
                            Vec::Zero(1), 1.0, 1e-3);
  REQUIRE(bare.running_cost.back() == 0.0);
}

TEST_CASE("optimal law satisfies the fbde at the grid nodes") {
  auto s = lqt::scenario_scalar();
  auto rt = lqt::solve_grde(s.plant, s.cost, s.riccati_step);
  auto ft = lqt::solve_feedforward(s.plant, s.cost, rt, s.disturbance);
  auto law = lqt::make_finite_horizon_law(s.plant, s.cost, rt, ft);
  auto log = lqt::simulate(s.plant, *law, s.disturbance, s.x0, s.cost.T, s.riccati_step, &s.cost);
  auto res = lqt::fbde_residuals(s.plant, s.cost, log, rt, ft);
  // the sampled law cancels the stationarity condition algebraically at every node
  REQUIRE(res.stationarity_residual < 1e-12);
  REQUIRE(res.terminal_residual < 1e-12);
  // central differencing across the disturbance jump caps the adjoint residual
  REQUIRE(res.adjoint_ode_residual < 5e-3);
  REQUIRE(res.lambda.size() == log.x.size());

  auto rep = lqt::evaluate_cost(s.plant, s.cost, log, &rt, &ft);
  REQUIRE(rep.J_formula.has_value());
  REQUIRE(*rep.gap < 0.01);
}

TEST_CASE("fbde grids must match the log") {
  auto s = lqt::scenario_scalar();
  s.cost.T = 1.0;
  auto rt = lqt::solve_grde(s.plant, s.cost, 1e-3);
  auto ft = lqt::solve_feedforward(s.plant, s.cost, rt, s.disturbance);
  auto law = lqt::make_finite_horizon_law(s.plant, s.cost, rt, ft);
  auto log = lqt::simulate(s.plant, *law, s.disturbance, s.x0, s.cost.T, 2e-3);
  try {
    lqt::fbde_residuals(s.plant, s.cost, log, rt, ft);
    FAIL("expected throw");
  } catch (const lqt::Error& e) {
    REQUIRE(e.code() == lqt::ErrorCode::GridMismatch);
  }
}

TEST_CASE("simulate validates its inputs") {
  auto s = lqt::scenario_scalar();
  auto law = zero_law(s.plant);
  REQUIRE_THROWS_AS(lqt::simulate(s.plant, *law, s.disturbance, Vec::Zero(2), 1.0, 1e-3), lqt::Error);
  REQUIRE_THROWS_AS(
      lqt::simulate(s.plant, *law, lqt::Signal::constant(Vec::Zero(2)), s.x0, 1.0, 1e-3), lqt::Error);
  REQUIRE_THROWS_AS(lqt::simulate(s.plant, *law, s.disturbance, s.x0, 1.0, 0.3), lqt::Error);
}
