#pragma once

#include <cmath>
#include <vector>

#include "lqt/error.hpp"
#include "lqt/linalg.hpp"
#include "lqt/model.hpp"
#include "lqt/riccati.hpp"

namespace lqt {

// Backward feedforward system paired with a Riccati trajectory:
//   f' = M' Y^+ h - A' f - P E d + Q r,   f_T = -P_T r,
//   h  = B' f + B' R E d                  (algebraic, never integrated),
//   H' = 1/2 h' Y^+ h - d' E' f - 1/2 r' Q r - 1/2 d' E' R E d.
// The terminal H is 1/2 r' P_T r: that is the value that makes
// 1/2 x'P x + x'f + H equal the terminal cost 1/2 (x-r)' P_T (x-r) at t = T,
// as the completion-of-squares identity requires.
struct FeedforwardTrajectory {
  double step = 0.0;
  std::vector<double> grid;
  std::vector<Vec> f;
  std::vector<Vec> h;
  std::vector<double> H;
};

struct SteadyStateFeedforward {
  Vec f_ss;
  Vec h_ss;
  double residual = 0.0;
};

struct AppendixBForms {
  Mat Abar;  // A' - M' Y^+ B'  (transpose of the closed-loop matrix)
  Mat F;     // (M' Y^+ B' R - P) E
  Mat Rcal;  // integrated kernel against Q: Abar^{-1} Q (stationary r-channel)
};

inline FeedforwardTrajectory solve_feedforward(const PlantModel& plant, const CostSpec& cost,
                                               const RiccatiTrajectory& rt, const Signal& d) {
  if (rt.grid.size() < 2) raise(ErrorCode::GridMismatch, "riccati trajectory has no grid");
  if (std::abs(rt.T() - cost.T) > 1e-9)
    raise(ErrorCode::GridMismatch, "riccati grid horizon differs from the cost horizon");
  if (d.dim() != plant.q())
    raise(ErrorCode::DimensionMismatch, "disturbance dimension must match E");
  const Mat Q = assemble_Q(plant, cost);
  const Mat BtRE = plant.B.transpose() * cost.R * plant.E;
  const Mat At = plant.A.transpose();
  const size_t N = rt.grid.size() - 1;
  const double dt = rt.step;

  FeedforwardTrajectory ft;
  ft.step = dt;
  ft.grid = rt.grid;
  ft.f.resize(N + 1);
  ft.h.resize(N + 1);
  ft.H.resize(N + 1);

  ft.f[N] = -cost.P_T * cost.r;
  ft.H[N] = 0.5 * cost.r.dot(cost.P_T * cost.r);

  const auto f_rhs = [&](const Vec& f, const Mat& P, const Mat& M, const Vec& dc) -> Vec {
    const Vec h = plant.B.transpose() * f + BtRE * dc;
    return M.transpose() * (rt.UpsilonPinv * h) - At * f - P * (plant.E * dc) + Q * cost.r;
  };
  const auto H_rhs = [&](const Vec& f, const Vec& dc) -> double {
    const Vec h = plant.B.transpose() * f + BtRE * dc;
    return 0.5 * h.dot(rt.UpsilonPinv * h) - dc.dot(plant.E.transpose() * f) -
           0.5 * cost.r.dot(Q * cost.r) - 0.5 * dc.dot(plant.E.transpose() * (cost.R * (plant.E * dc)));
  };

  // Joint backward RK4 over (f, H); d is held at the interval's left node,
  // matching the simulator's zero-order-hold convention, and P, M midpoints
  // come from linear interpolation between grid nodes.
  for (size_t i = N; i > 0; --i) {
    const Vec dc = d(rt.grid[i - 1]);
    const Mat& Pa = rt.P[i];
    const Mat Pm = 0.5 * (rt.P[i] + rt.P[i - 1]);
    const Mat& Pb = rt.P[i - 1];
    const Mat& Ma = rt.M[i];
    const Mat Mm = 0.5 * (rt.M[i] + rt.M[i - 1]);
    const Mat& Mb = rt.M[i - 1];

    const Vec& f0 = ft.f[i];
    const double H0 = ft.H[i];
    const Vec kf1 = f_rhs(f0, Pa, Ma, dc);
    const double kH1 = H_rhs(f0, dc);
    const Vec kf2 = f_rhs(f0 - 0.5 * dt * kf1, Pm, Mm, dc);
    const double kH2 = H_rhs(f0 - 0.5 * dt * kf1, dc);
    const Vec kf3 = f_rhs(f0 - 0.5 * dt * kf2, Pm, Mm, dc);
    const double kH3 = H_rhs(f0 - 0.5 * dt * kf2, dc);
    const Vec kf4 = f_rhs(f0 - dt * kf3, Pb, Mb, dc);
    const double kH4 = H_rhs(f0 - dt * kf3, dc);

    ft.f[i - 1] = f0 - dt / 6.0 * (kf1 + 2.0 * kf2 + 2.0 * kf3 + kf4);
    ft.H[i - 1] = H0 - dt / 6.0 * (kH1 + 2.0 * kH2 + 2.0 * kH3 + kH4);
  }
  for (size_t i = 0; i <= N; ++i)
    ft.h[i] = plant.B.transpose() * ft.f[i] + BtRE * d(rt.grid[i]);
  return ft;
}

// Stationary feedforward for a constant disturbance tail:
//   (A' - M' Y^+ B') f_ss = M' Y^+ B' R E d - P E d + Q r.
inline SteadyStateFeedforward steady_state_feedforward(const PlantModel& plant, const CostSpec& cost,
                                                       const GareSolution& g, const Vec& d_const,
                                                       const Vec& r) {
  if (d_const.size() != plant.q())
    raise(ErrorCode::DimensionMismatch, "constant disturbance dimension must match E");
  if (r.size() != plant.n()) raise(ErrorCode::DimensionMismatch, "reference must have length n");
  if (!is_hurwitz(g.A_cl))
    raise(ErrorCode::SingularAbar, "closed loop is not asymptotically stable; stationary feedforward undefined");
  const Mat Q = assemble_Q(plant, cost);
  const Mat Abar = plant.A.transpose() - g.M.transpose() * g.UpsilonPinv * plant.B.transpose();
  const Vec rhs = g.M.transpose() * (g.UpsilonPinv * (plant.B.transpose() * (cost.R * (plant.E * d_const)))) -
                  g.P * (plant.E * d_const) + Q * r;
  Eigen::FullPivLU<Mat> lu(Abar);
  if (!lu.isInvertible()) raise(ErrorCode::SingularAbar, "A' - M'Y^+B' is singular");
  SteadyStateFeedforward out;
  out.f_ss = lu.solve(rhs);
  out.residual = (Abar * out.f_ss - rhs).norm();
  out.h_ss = plant.B.transpose() * out.f_ss + plant.B.transpose() * (cost.R * (plant.E * d_const));
  return out;
}

inline AppendixBForms appendix_b_forms(const PlantModel& plant, const CostSpec& cost,
                                       const GareSolution& g) {
  AppendixBForms out;
  out.Abar = plant.A.transpose() - g.M.transpose() * g.UpsilonPinv * plant.B.transpose();
  out.F = (g.M.transpose() * g.UpsilonPinv * plant.B.transpose() * cost.R - g.P) * plant.E;
  Eigen::FullPivLU<Mat> lu(out.Abar);
  if (!lu.isInvertible()) raise(ErrorCode::SingularAbar, "A' - M'Y^+B' is singular");
  out.Rcal = lu.solve(assemble_Q(plant, cost));
  return out;
}

// Cross-check of the stationary-gain feedforward against its explicit
// matrix-exponential convolution form.  Writing g(s) = F d_s + Q r, the
// bounded solution of f' = -Abar f + g is
//   f(t) = -int_t^inf e^{Abar (s-t)} g(s) ds,
// evaluated here over [0, horizon] with the constant tail of d integrated in
// closed form.  The kernel integral is taken interval-by-interval; on each
// interval d is constant (zero-order hold), so the segment integral
// Abar^{-1}(e^{Abar dt} - I) g_i is exact and the comparison isolates the
// ODE-route integration error.  Returns max_t ||f_conv(t) - f_ode(t)||.
inline double convolution_cross_check(const PlantModel& plant, const CostSpec& cost,
                                      const GareSolution& g, const Signal& d, double horizon,
                                      double step = 1e-3) {
  if (!(horizon > 0.0)) raise(ErrorCode::NonpositiveHorizon, "horizon must be positive");
  if (!is_hurwitz(g.A_cl)) raise(ErrorCode::SingularAbar, "closed loop must be stable for the convolution form");
  const Eigen::Index N = detail::step_count(horizon, step);
  const Mat Q = assemble_Q(plant, cost);
  const Mat Abar = plant.A.transpose() - g.M.transpose() * g.UpsilonPinv * plant.B.transpose();
  Eigen::FullPivLU<Mat> lu(Abar);
  if (!lu.isInvertible()) raise(ErrorCode::SingularAbar, "A' - M'Y^+B' is singular");
  const auto gfun = [&](const Vec& dc) -> Vec { return (g.M.transpose() * g.UpsilonPinv * plant.B.transpose() * cost.R - g.P) * (plant.E * dc) + Q * cost.r; };

  // ODE route: stationary-P feedforward integrated backward by RK4 from the
  // steady state of the tail.
  const auto tail_ss = steady_state_feedforward(plant, cost, g, d.tail(), cost.r);
  std::vector<Vec> f_ode(static_cast<size_t>(N) + 1);
  f_ode[static_cast<size_t>(N)] = tail_ss.f_ss;
  for (Eigen::Index i = N; i > 0; --i) {
    const Vec dc = d(static_cast<double>(i - 1) * step);
    const Vec gc = gfun(dc);
    const auto rhs = [&](const Vec& f) -> Vec { return -Abar * f + gc; };
    const Vec& f0 = f_ode[static_cast<size_t>(i)];
    const Vec k1 = rhs(f0);
    const Vec k2 = rhs(f0 - 0.5 * step * k1);
    const Vec k3 = rhs(f0 - 0.5 * step * k2);
    const Vec k4 = rhs(f0 - step * k3);
    f_ode[static_cast<size_t>(i - 1)] = f0 - step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  // Convolution route, evaluated by the backward recursion
  //   f(t_i) = e^{Abar dt} f(t_{i+1}) - int_{t_i}^{t_{i+1}} e^{Abar (s-t_i)} g(s) ds,
  // anchored at f(horizon) = Abar^{-1} g(tail).
  const Mat ek = expm(Abar * step);
  const Mat seg = lu.solve(ek - Mat::Identity(plant.n(), plant.n()));  // int_0^dt e^{Abar s} ds
  Vec f_conv = lu.solve(gfun(d.tail()));
  double max_dev = (f_conv - f_ode[static_cast<size_t>(N)]).norm();
  for (Eigen::Index i = N; i > 0; --i) {
    const Vec dc = d(static_cast<double>(i - 1) * step);
    f_conv = ek * f_conv - seg * gfun(dc);
    max_dev = std::max(max_dev, (f_conv - f_ode[static_cast<size_t>(i - 1)]).norm());
  }
  return max_dev;
}

}  // namespace lqt
