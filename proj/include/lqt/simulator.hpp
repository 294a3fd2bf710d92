#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "lqt/controller.hpp"
#include "lqt/error.hpp"
#include "lqt/feedforward.hpp"
#include "lqt/linalg.hpp"
#include "lqt/model.hpp"
#include "lqt/riccati.hpp"

namespace lqt {

struct SimulationLog {
  double step = 0.0;
  std::vector<double> times;
  std::vector<Vec> x;
  std::vector<Vec> u;
  std::vector<Vec> d;
  std::vector<Vec> y;                 // regulated outputs c_o x
  std::vector<double> running_cost;   // cumulative integral of the cost integrand
};

struct CostReport {
  double J_sim = 0.0;
  std::optional<double> J_formula;
  std::optional<double> gap;  // |J_sim - J_formula| / max(1, |J_formula|)
};

struct FbdeResidualReport {
  std::vector<Vec> lambda;           // P_t x_t + f_t on the log grid
  double stationarity_residual = 0.0;  // max_t ||Y u + B'RE d + B' lambda||
  double adjoint_ode_residual = 0.0;   // max_t ||lambda' - Q(r - x) + A' lambda||
  double terminal_residual = 0.0;      // ||lambda_T - P_T (x_T - r)||
};

namespace detail {

inline double cost_integrand(const PlantModel& plant, const CostSpec& cost, const Mat& Q,
                             const Vec& x, const Vec& u, const Vec& d) {
  const Vec e = x - cost.r;
  const Vec w = plant.B * u + plant.E * d;
  return 0.5 * e.dot(Q * e) + 0.5 * w.dot(cost.R * w);
}

}  // namespace detail

// Closed-loop integration with sampled control: u and d are held constant
// within each step at their step-start values, so stateful laws advance once
// per step and every law runs under the same hold semantics it would have on
// a sampled implementation.
inline SimulationLog simulate(const PlantModel& plant, ControlLaw& law, const Signal& d,
                              const Vec& x0, double T, double step,
                              const CostSpec* cost = nullptr) {
  if (x0.size() != plant.n()) raise(ErrorCode::DimensionMismatch, "x0 must have length n");
  if (d.dim() != plant.q()) raise(ErrorCode::DimensionMismatch, "disturbance dimension must match E");
  const Eigen::Index N = detail::step_count(T, step);
  law.reset();

  SimulationLog log;
  log.step = step;
  log.times.resize(static_cast<size_t>(N) + 1);
  log.x.resize(static_cast<size_t>(N) + 1);
  log.u.resize(static_cast<size_t>(N) + 1);
  log.d.resize(static_cast<size_t>(N) + 1);
  log.y.resize(static_cast<size_t>(N) + 1);

  Vec x = x0;
  log.times[0] = 0.0;
  log.x[0] = x;
  for (Eigen::Index k = 0; k < N; ++k) {
    const double t = static_cast<double>(k) * step;
    const Vec dc = d(t);
    const Vec u = law.control(t, x, dc);
    log.u[static_cast<size_t>(k)] = u;
    log.d[static_cast<size_t>(k)] = dc;

    const Vec bu_ed = plant.B * u + plant.E * dc;
    const auto rhs = [&](const Vec& xx) -> Vec { return plant.A * xx + bu_ed; };
    const Vec k1 = rhs(x);
    const Vec k2 = rhs(x + 0.5 * step * k1);
    const Vec k3 = rhs(x + 0.5 * step * k2);
    const Vec k4 = rhs(x + step * k3);
    x = x + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite())
      raise(ErrorCode::NonFiniteState,
            "state diverged at t = " + std::to_string(t + step) + " (closed loop unstable?)");
    log.times[static_cast<size_t>(k + 1)] = static_cast<double>(k + 1) * step;
    log.x[static_cast<size_t>(k + 1)] = x;
  }
  log.times.back() = T;
  // Trailing control/disturbance sample so all channels share the grid.
  log.d.back() = d(T);
  log.u.back() = law.control(T, x, log.d.back());
  for (size_t k = 0; k < log.x.size(); ++k) log.y[k] = plant.c_o * log.x[k];

  log.running_cost.assign(log.x.size(), 0.0);
  if (cost != nullptr) {
    const Mat Q = assemble_Q(plant, *cost);
    double acc = 0.0;
    double prev = detail::cost_integrand(plant, *cost, Q, log.x[0], log.u[0], log.d[0]);
    for (size_t k = 1; k < log.x.size(); ++k) {
      const double cur = detail::cost_integrand(plant, *cost, Q, log.x[k], log.u[k], log.d[k]);
      acc += 0.5 * step * (prev + cur);
      log.running_cost[k] = acc;
      prev = cur;
    }
  }
  return log;
}

// Trapezoid quadrature of the quadratic cost over the log, plus the terminal
// term; when Riccati/feedforward data is supplied the closed-form optimum
// 1/2 x0'P0 x0 + x0'f0 + H0 and the relative gap are reported as well.
inline CostReport evaluate_cost(const PlantModel& plant, const CostSpec& cost, const SimulationLog& log,
                                const RiccatiTrajectory* rt = nullptr,
                                const FeedforwardTrajectory* ft = nullptr) {
  const Mat Q = assemble_Q(plant, cost);
  CostReport out;
  double acc = 0.0;
  double prev = detail::cost_integrand(plant, cost, Q, log.x[0], log.u[0], log.d[0]);
  for (size_t k = 1; k < log.x.size(); ++k) {
    const double cur = detail::cost_integrand(plant, cost, Q, log.x[k], log.u[k], log.d[k]);
    acc += 0.5 * log.step * (prev + cur);
    prev = cur;
  }
  const Vec e_T = log.x.back() - cost.r;
  out.J_sim = acc + 0.5 * e_T.dot(cost.P_T * e_T);
  if (rt != nullptr && ft != nullptr) {
    const Vec& x0 = log.x.front();
    out.J_formula = 0.5 * x0.dot(rt->P.front() * x0) + x0.dot(ft->f.front()) + ft->H.front();
    out.gap = std::abs(out.J_sim - *out.J_formula) / std::max(1.0, std::abs(*out.J_formula));
  }
  return out;
}

// FBDE residuals of a logged trajectory against the paired Riccati and
// feedforward solutions; lambda' is taken by central differences on the grid.
inline FbdeResidualReport fbde_residuals(const PlantModel& plant, const CostSpec& cost,
                                         const SimulationLog& log, const RiccatiTrajectory& rt,
                                         const FeedforwardTrajectory& ft) {
  if (log.x.size() != rt.P.size() || log.x.size() != ft.f.size() ||
      std::abs(log.step - rt.step) > 1e-15)
    raise(ErrorCode::GridMismatch, "log and riccati/feedforward grids differ");
  const Mat Q = assemble_Q(plant, cost);
  const Mat BtRE = plant.B.transpose() * cost.R * plant.E;
  FbdeResidualReport out;
  const size_t N = log.x.size() - 1;
  out.lambda.resize(N + 1);
  for (size_t k = 0; k <= N; ++k) out.lambda[k] = rt.P[k] * log.x[k] + ft.f[k];

  for (size_t k = 0; k <= N; ++k) {
    const Vec res = rt.Upsilon * log.u[k] + BtRE * log.d[k] + plant.B.transpose() * out.lambda[k];
    out.stationarity_residual = std::max(out.stationarity_residual, res.norm());
  }
  for (size_t k = 1; k < N; ++k) {
    const Vec lam_dot = (out.lambda[k + 1] - out.lambda[k - 1]) / (2.0 * log.step);
    const Vec res = lam_dot - Q * (cost.r - log.x[k]) + plant.A.transpose() * out.lambda[k];
    out.adjoint_ode_residual = std::max(out.adjoint_ode_residual, res.norm());
  }
  out.terminal_residual = (out.lambda[N] - cost.P_T * (log.x[N] - cost.r)).norm();
  return out;
}

}  // namespace lqt
