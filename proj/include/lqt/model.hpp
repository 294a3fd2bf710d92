#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lqt/error.hpp"
#include "lqt/linalg.hpp"

namespace lqt {

// Plant  x' = A x + B u + E d,  regulated output y = c_o x.
struct PlantModel {
  Mat A;    // n x n
  Mat B;    // n x m
  Mat E;    // n x q
  Mat c_o;  // l x n

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  Eigen::Index q() const { return E.cols(); }
  Eigen::Index l() const { return c_o.rows(); }
};

// Piecewise-constant (zero-order-hold) vector signal.  The value at time t is
// the value of the last sample at or before t; after the final sample time the
// constant `tail` applies (which by default repeats the final sample, but may
// encode a distinct limit value).  Before the first sample time the first
// sample's value is held backward.
class Signal {
 public:
  Signal() = default;

  Signal(std::vector<double> times, std::vector<Vec> values, std::optional<Vec> tail = std::nullopt) {
    if (times.size() != values.size())
      raise(ErrorCode::DimensionMismatch, "signal needs one value per sample time");
    for (size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1]))
        raise(ErrorCode::DimensionMismatch, "signal sample times must be strictly increasing");
    if (values.empty() && !tail)
      raise(ErrorCode::DimensionMismatch, "signal needs at least one sample or a tail value");
    const Eigen::Index dim = values.empty() ? tail->size() : values.front().size();
    for (const auto& v : values)
      if (v.size() != dim) raise(ErrorCode::DimensionMismatch, "signal sample dimensions differ");
    if (tail && tail->size() != dim)
      raise(ErrorCode::DimensionMismatch, "signal tail dimension differs from samples");
    times_ = std::move(times);
    values_ = std::move(values);
    tail_ = tail ? *tail : values_.back();
  }

  static Signal constant(const Vec& v) { return Signal({}, {}, v); }

  // Step from `before` to `after` at time t_step (value `after` for t >= t_step).
  static Signal step(double t_step, const Vec& before, const Vec& after) {
    return Signal({0.0, t_step}, {before, after}, after);
  }

  Eigen::Index dim() const { return tail_.size(); }

  Vec operator()(double t) const {
    if (times_.empty() || t < times_.front()) return values_.empty() ? tail_ : values_.front();
    if (t >= times_.back()) return tail_;
    // last sample with sample-time <= t
    size_t lo = 0, hi = times_.size() - 1;
    while (lo + 1 < hi) {
      size_t mid = (lo + hi) / 2;
      if (times_[mid] <= t)
        lo = mid;
      else
        hi = mid;
    }
    return times_[hi] <= t ? values_[hi] : values_[lo];
  }

  const std::vector<double>& sample_times() const { return times_; }
  const std::vector<Vec>& sample_values() const { return values_; }
  const Vec& tail() const { return tail_; }

 private:
  std::vector<double> times_;
  std::vector<Vec> values_;
  Vec tail_;
};

// Cost  J = 1/2 integral (x-r)'Q(x-r) + (Bu+Ed)'R(Bu+Ed) dt
//          + 1/2 (x_T - r)' P_T (x_T - r),   Q = c_o' Qbar c_o.
struct CostSpec {
  Mat Qbar;  // l x l
  Mat R;     // n x n
  Mat P_T;   // n x n
  double T = 0.0;
  Vec r;     // n
};

enum class DisturbanceKind { Matched, Mismatched };

struct DisturbanceClassification {
  DisturbanceKind kind = DisturbanceKind::Mismatched;
  std::optional<Mat> gamma;  // m x q with B*gamma == E when matched
  Eigen::Index rank_B = 0;
  Eigen::Index rank_BE = 0;
};

namespace detail {

inline void require_psd_weight(const Mat& w, const char* name) {
  if (w.rows() != w.cols()) raise(ErrorCode::DimensionMismatch, std::string(name) + " must be square");
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    raise(ErrorCode::NotPSD, std::string(name) + " is not symmetric");
  if (min_symmetric_eigenvalue(w) < -1e-10)
    raise(ErrorCode::NotPSD, std::string(name) + " has an eigenvalue below -1e-10");
}

}  // namespace detail

inline std::pair<const PlantModel&, const CostSpec&> validate_system(const PlantModel& plant,
                                                                     const CostSpec& cost) {
  const Eigen::Index n = plant.A.rows();
  if (n < 1 || plant.B.cols() < 1 || plant.E.cols() < 1 || plant.c_o.rows() < 1)
    raise(ErrorCode::DimensionMismatch, "plant dimensions must all be at least 1");
  if (plant.A.cols() != n) raise(ErrorCode::DimensionMismatch, "A must be square");
  if (plant.B.rows() != n) raise(ErrorCode::DimensionMismatch, "B row count must match A");
  if (plant.E.rows() != n) raise(ErrorCode::DimensionMismatch, "E row count must match A");
  if (plant.c_o.cols() != n) raise(ErrorCode::DimensionMismatch, "c_o column count must match A");
  if (cost.Qbar.rows() != plant.l()) raise(ErrorCode::DimensionMismatch, "Qbar must be l x l");
  if (cost.R.rows() != n || cost.R.cols() != n)
    raise(ErrorCode::DimensionMismatch, "R must be n x n (it weights Bu + Ed)");
  if (cost.P_T.rows() != n || cost.P_T.cols() != n)
    raise(ErrorCode::DimensionMismatch, "P_T must be n x n");
  if (cost.r.size() != n) raise(ErrorCode::DimensionMismatch, "reference r must have length n");
  detail::require_psd_weight(cost.Qbar, "Qbar");
  detail::require_psd_weight(cost.R, "R");
  detail::require_psd_weight(cost.P_T, "P_T");
  if (!(cost.T > 0.0)) raise(ErrorCode::NonpositiveHorizon, "horizon T must be positive");
  return {plant, cost};
}

inline DisturbanceClassification classify_disturbance(const PlantModel& plant) {
  DisturbanceClassification out;
  out.rank_B = numeric_rank(plant.B);
  Mat be(plant.B.rows(), plant.B.cols() + plant.E.cols());
  be << plant.B, plant.E;
  out.rank_BE = numeric_rank(be);
  if (out.rank_BE == out.rank_B) {
    Mat gamma = pinv(plant.B) * plant.E;  // least-squares candidate
    if ((plant.B * gamma - plant.E).norm() <= 1e-9) {
      out.kind = DisturbanceKind::Matched;
      out.gamma = gamma;
      return out;
    }
  }
  out.kind = DisturbanceKind::Mismatched;
  return out;
}

inline Mat assemble_Q(const PlantModel& plant, const CostSpec& cost) {
  return symmetrize(plant.c_o.transpose() * cost.Qbar * plant.c_o);
}

// Lift a regulated-output target y* to a full-state reference r = c_o^+ y*.
// The cost depends on r only through c_o r, so the pseudo-inverse lift is
// cost-equivalent to any other choice.
inline Vec lift_reference(const PlantModel& plant, const Vec& target) {
  if (target.size() != plant.l())
    raise(ErrorCode::DimensionMismatch, "target dimension must match regulated output");
  return pinv(plant.c_o) * target;
}

}  // namespace lqt
