#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "lqt/error.hpp"
#include "lqt/linalg.hpp"
#include "lqt/model.hpp"

namespace lqt {

// Backward solution of the generalized Riccati differential equation
//   -P' = P A + A' P + Q - M' Y^+ M,   M = B' P,   Y = B' R B,
// on a uniform grid t_0 = 0 .. t_N = T with terminal value P_T.
struct RiccatiTrajectory {
  double step = 0.0;
  std::vector<double> grid;
  std::vector<Mat> P;  // P[i] at grid[i]
  std::vector<Mat> M;  // M[i] = B' P[i]
  Mat Upsilon;
  Mat UpsilonPinv;

  double T() const { return grid.empty() ? 0.0 : grid.back(); }
  Eigen::Index nodes() const { return static_cast<Eigen::Index>(grid.size()); }
};

struct GareSolution {
  Mat P;
  Mat M;
  Mat Upsilon;
  Mat UpsilonPinv;
  Mat A_cl;  // A - B Y^+ M
  double residual = 0.0;
};

struct RegularCheck {
  bool pass = false;
  double defect = 0.0;
};

struct DetectabilityReport {
  bool detectable = false;
  std::vector<std::complex<double>> offending;  // unstable eigenvalues failing the rank test
};

inline RegularCheck check_regular_condition(const Mat& Upsilon, const Mat& UpsilonPinv, const Mat& M) {
  RegularCheck out;
  out.defect = (Upsilon * UpsilonPinv * M - M).norm();
  out.pass = out.defect <= 1e-9;
  return out;
}

inline RegularCheck check_regular_condition(const Mat& Upsilon, const Mat& M) {
  return check_regular_condition(Upsilon, pinv(Upsilon), M);
}

namespace detail {

inline Mat grde_rhs(const Mat& P, const Mat& A, const Mat& B, const Mat& Q, const Mat& UpsilonPinv) {
  const Mat M = B.transpose() * P;
  // dP/dt = M' Y^+ M - P A - A' P - Q  (backward equation written forward in t)
  return M.transpose() * UpsilonPinv * M - P * A - A.transpose() * P - Q;
}

inline Mat grde_step_back(const Mat& P, double dt, const Mat& A, const Mat& B, const Mat& Q,
                          const Mat& UpsilonPinv) {
  const Mat k1 = grde_rhs(P, A, B, Q, UpsilonPinv);
  const Mat k2 = grde_rhs(P - 0.5 * dt * k1, A, B, Q, UpsilonPinv);
  const Mat k3 = grde_rhs(P - 0.5 * dt * k2, A, B, Q, UpsilonPinv);
  const Mat k4 = grde_rhs(P - dt * k3, A, B, Q, UpsilonPinv);
  return symmetrize(P - dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

inline Eigen::Index step_count(double T, double step) {
  if (!(step > 0.0)) raise(ErrorCode::StepInvalid, "step must be positive");
  const double ratio = T / step;
  const auto N = static_cast<Eigen::Index>(std::llround(ratio));
  if (N < 1 || std::abs(ratio - static_cast<double>(N)) > 1e-6)
    raise(ErrorCode::StepInvalid, "step must divide the horizon");
  return N;
}

}  // namespace detail

inline RiccatiTrajectory solve_grde(const PlantModel& plant, const CostSpec& cost, double step = 1e-3) {
  validate_system(plant, cost);
  const Eigen::Index N = detail::step_count(cost.T, step);
  const Mat Q = assemble_Q(plant, cost);

  RiccatiTrajectory rt;
  rt.step = step;
  rt.Upsilon = symmetrize(plant.B.transpose() * cost.R * plant.B);
  rt.UpsilonPinv = pinv(rt.Upsilon);
  rt.grid.resize(static_cast<size_t>(N) + 1);
  rt.P.resize(static_cast<size_t>(N) + 1);
  rt.M.resize(static_cast<size_t>(N) + 1);

  for (Eigen::Index i = 0; i <= N; ++i) rt.grid[static_cast<size_t>(i)] = static_cast<double>(i) * step;
  rt.grid.back() = cost.T;

  rt.P.back() = symmetrize(cost.P_T);
  rt.M.back() = plant.B.transpose() * rt.P.back();
  for (Eigen::Index i = N; i > 0; --i) {
    rt.P[static_cast<size_t>(i - 1)] =
        detail::grde_step_back(rt.P[static_cast<size_t>(i)], step, plant.A, plant.B, Q, rt.UpsilonPinv);
    rt.M[static_cast<size_t>(i - 1)] = plant.B.transpose() * rt.P[static_cast<size_t>(i - 1)];
    if (!all_finite(rt.P[static_cast<size_t>(i - 1)]))
      raise(ErrorCode::NoConvergence, "GRDE solution diverged during backward integration");
  }

  for (size_t i = 0; i < rt.M.size(); ++i) {
    const auto rc = check_regular_condition(rt.Upsilon, rt.UpsilonPinv, rt.M[i]);
    if (!rc.pass)
      raise(ErrorCode::RegularConditionViolated,
            "regular condition fails at t = " + std::to_string(rt.grid[i]) +
                " (defect " + std::to_string(rc.defect) + ")");
  }
  return rt;
}

// Infinite-horizon solution by integrating the GRDE backward from P = 0 until
// the iterate is stationary.  A limit that exists but fails to stabilize the
// closed loop (e.g. an unobserved unstable mode with Q = 0) is reported as
// NoConvergence, matching the convergence characterization it implements.
inline GareSolution solve_gare(const PlantModel& plant, const CostSpec& cost, double step = 1e-3) {
  CostSpec probe = cost;
  probe.T = 1.0;  // validate_system needs a positive horizon; T itself is unused here
  validate_system(plant, probe);
  if (!(step > 0.0)) raise(ErrorCode::StepInvalid, "step must be positive");
  const Mat Q = assemble_Q(plant, cost);

  GareSolution g;
  g.Upsilon = symmetrize(plant.B.transpose() * cost.R * plant.B);
  g.UpsilonPinv = pinv(g.Upsilon);

  const double horizon_cap = 1e4;
  const double stationary_tol = 1e-10;
  Mat P = Mat::Zero(plant.n(), plant.n());
  double t = 0.0;
  bool stationary = false;
  while (t < horizon_cap) {
    const Mat P_next = detail::grde_step_back(P, step, plant.A, plant.B, Q, g.UpsilonPinv);
    if (!all_finite(P_next))
      raise(ErrorCode::NoConvergence, "GRDE iterate diverged; stabilizability premise fails");
    const double rate = (P_next - P).norm() / step;
    P = P_next;
    t += step;
    if (rate <= stationary_tol) {
      stationary = true;
      break;
    }
  }
  if (!stationary)
    raise(ErrorCode::NoConvergence, "GRDE did not reach stationarity within the horizon cap");

  g.P = P;
  g.M = plant.B.transpose() * P;
  const auto rc = check_regular_condition(g.Upsilon, g.UpsilonPinv, g.M);
  if (!rc.pass)
    raise(ErrorCode::RegularConditionViolated,
          "regular condition fails at the stationary solution (defect " + std::to_string(rc.defect) + ")");
  g.A_cl = plant.A - plant.B * g.UpsilonPinv * g.M;
  g.residual = (P * plant.A + plant.A.transpose() * P + Q -
                g.M.transpose() * g.UpsilonPinv * g.M)
                   .norm();
  if (!is_hurwitz(g.A_cl))
    raise(ErrorCode::NoConvergence,
          "stationary GRDE limit is not stabilizing (closed loop has an unstable mode)");
  return g;
}

// Hautus test: every eigenvalue of A with nonnegative real part must satisfy
// rank([A - lambda I; Q^{1/2}]) = n.
inline DetectabilityReport check_detectability(const PlantModel& plant, const Mat& Q) {
  if (Q.rows() != plant.n() || Q.cols() != plant.n())
    raise(ErrorCode::DimensionMismatch, "Q must be n x n");
  DetectabilityReport out;
  const Eigen::Index n = plant.n();
  const Mat Qh = sqrt_psd(Q);
  using CMat = Eigen::MatrixXcd;
  for (const auto& ev : eigenvalues(plant.A)) {
    if (ev.real() < 0.0) continue;
    CMat stacked(2 * n, n);
    stacked.topRows(n) = plant.A.cast<std::complex<double>>() -
                         ev * CMat::Identity(n, n);
    stacked.bottomRows(n) = Qh.cast<std::complex<double>>();
    Eigen::JacobiSVD<CMat> svd(stacked);
    const auto& sv = svd.singularValues();
    const double cut = (sv.size() > 0 ? sv(0) : 0.0) * static_cast<double>(n) * 1e-12;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > cut) ++rank;
    if (rank < n) out.offending.push_back(ev);
  }
  out.detectable = out.offending.empty();
  return out;
}

inline std::vector<std::complex<double>> closed_loop_spectrum(const GareSolution& g) {
  auto evs = eigenvalues(g.A_cl);
  std::sort(evs.begin(), evs.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return evs;
}

}  // namespace lqt
