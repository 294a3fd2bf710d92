#pragma once

#include <cmath>
#include <vector>

#include "lqt/error.hpp"
#include "lqt/linalg.hpp"
#include "lqt/model.hpp"
#include "lqt/riccati.hpp"

namespace lqt {

// Discrete restatement of the tracking problem for the brute-force verifier.
// A_d, B_d, E_d are the exact zero-order-hold discretization of (A, B, E);
// the stage cost is the Eq.-of-motion integrand sampled at the interval's
// left endpoint and scaled by the step.
struct DiscreteTrackingProblem {
  Mat A_d, B_d, E_d;
  Mat Q, R, P_T, Upsilon, BtRE;
  Mat B, E;  // continuous maps, kept for the stage cost (B u + E d)' R (B u + E d)
  double dt = 0.0;
  Eigen::Index N = 0;
  std::vector<Vec> d_seq;  // d at each step start
  Vec r;
};

struct DpSolution {
  std::vector<Vec> u;  // N controls
  std::vector<Vec> x;  // N+1 states
  double J = 0.0;
};

inline DiscreteTrackingProblem make_discrete_problem(const PlantModel& plant, const CostSpec& cost,
                                                     const Signal& d, double dt) {
  validate_system(plant, cost);
  if (d.dim() != plant.q()) raise(ErrorCode::DimensionMismatch, "disturbance dimension must match E");
  DiscreteTrackingProblem p;
  p.N = detail::step_count(cost.T, dt);
  p.dt = dt;
  const Eigen::Index n = plant.n(), m = plant.m(), q = plant.q();
  Mat aug = Mat::Zero(n + m + q, n + m + q);
  aug.topLeftCorner(n, n) = plant.A;
  aug.block(0, n, n, m) = plant.B;
  aug.block(0, n + m, n, q) = plant.E;
  const Mat phi = expm(aug * dt);
  p.A_d = phi.topLeftCorner(n, n);
  p.B_d = phi.block(0, n, n, m);
  p.E_d = phi.block(0, n + m, n, q);
  p.Q = assemble_Q(plant, cost);
  p.R = cost.R;
  p.P_T = symmetrize(cost.P_T);
  p.Upsilon = symmetrize(plant.B.transpose() * cost.R * plant.B);
  p.BtRE = plant.B.transpose() * cost.R * plant.E;
  p.B = plant.B;
  p.E = plant.E;
  p.r = cost.r;
  p.d_seq.resize(static_cast<size_t>(p.N));
  for (Eigen::Index k = 0; k < p.N; ++k)
    p.d_seq[static_cast<size_t>(k)] = d(static_cast<double>(k) * dt);
  return p;
}

// Exact minimizer of the discretized cost by backward recursion on the
// quadratic value function V_k(x) = 1/2 x'S x + s'x + c.
inline DpSolution solve_discrete_dp(const DiscreteTrackingProblem& p, const Vec& x0) {
  const auto N = static_cast<size_t>(p.N);
  const double dt = p.dt;

  Mat S = p.P_T;
  Vec s = -p.P_T * p.r;
  double c = 0.5 * p.r.dot(p.P_T * p.r);

  std::vector<Mat> K(N);
  std::vector<Vec> g(N);
  for (size_t kk = N; kk > 0; --kk) {
    const size_t k = kk - 1;
    const Vec& dk = p.d_seq[k];
    const Mat W = symmetrize(dt * p.Upsilon + p.B_d.transpose() * S * p.B_d);
    Eigen::FullPivLU<Mat> lu(W);
    if (!lu.isInvertible())
      raise(ErrorCode::SingularStageHessian, "stage Hessian singular at step " + std::to_string(k));
    const Vec Edd = p.E_d * dk;
    const Vec v = dt * (p.BtRE * dk) + p.B_d.transpose() * (S * Edd) + p.B_d.transpose() * s;
    K[k] = lu.solve(p.B_d.transpose() * S * p.A_d);
    g[k] = lu.solve(v);

    const Vec Ed_cont = p.E * dk;
    const Mat S_new = symmetrize(dt * p.Q + p.A_d.transpose() * S * p.A_d - K[k].transpose() * W * K[k]);
    const Vec s_new = -dt * (p.Q * p.r) + p.A_d.transpose() * (S * Edd) + p.A_d.transpose() * s -
                      K[k].transpose() * (W * g[k]);
    const double c_new = 0.5 * dt * p.r.dot(p.Q * p.r) + 0.5 * dt * Ed_cont.dot(p.R * Ed_cont) +
                         0.5 * Edd.dot(S * Edd) + s.dot(Edd) + c - 0.5 * g[k].dot(W * g[k]);
    S = S_new;
    s = s_new;
    c = c_new;
  }

  DpSolution sol;
  sol.u.resize(N);
  sol.x.resize(N + 1);
  sol.x[0] = x0;
  double J = 0.0;
  for (size_t k = 0; k < N; ++k) {
    const Vec& dk = p.d_seq[k];
    sol.u[k] = -K[k] * sol.x[k] - g[k];
    const Vec e = sol.x[k] - p.r;
    const Vec w = p.B * sol.u[k] + p.E * dk;
    J += dt * (0.5 * e.dot(p.Q * e) + 0.5 * w.dot(p.R * w));
    sol.x[k + 1] = p.A_d * sol.x[k] + p.B_d * sol.u[k] + p.E_d * dk;
  }
  const Vec e_T = sol.x[N] - p.r;
  sol.J = J + 0.5 * e_T.dot(p.P_T * e_T);
  return sol;
}

// Total discretized cost of an arbitrary control sequence under the same
// stage model; used by the convexity self-check.
inline double discrete_cost(const DiscreteTrackingProblem& p, const Vec& x0,
                            const std::vector<Vec>& u) {
  const auto N = static_cast<size_t>(p.N);
  if (u.size() != N) raise(ErrorCode::GridMismatch, "control sequence length must equal N");
  Vec x = x0;
  double J = 0.0;
  for (size_t k = 0; k < N; ++k) {
    const Vec& dk = p.d_seq[k];
    const Vec e = x - p.r;
    const Vec w = p.B * u[k] + p.E * dk;
    J += p.dt * (0.5 * e.dot(p.Q * e) + 0.5 * w.dot(p.R * w));
    x = p.A_d * x + p.B_d * u[k] + p.E_d * dk;
  }
  const Vec e_T = x - p.r;
  return J + 0.5 * e_T.dot(p.P_T * e_T);
}

}  // namespace lqt
