#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "lqt/error.hpp"
#include "lqt/feedforward.hpp"
#include "lqt/linalg.hpp"
#include "lqt/model.hpp"
#include "lqt/riccati.hpp"

namespace lqt {

enum class LawKind { FiniteHorizon, PseudoInverse, InfiniteHorizon, RecedingHorizon, Pid, Gesobc };

inline const char* to_string(LawKind k) {
  switch (k) {
    case LawKind::FiniteHorizon: return "finite_horizon";
    case LawKind::PseudoInverse: return "pseudo_inverse";
    case LawKind::InfiniteHorizon: return "infinite_horizon";
    case LawKind::RecedingHorizon: return "receding_horizon";
    case LawKind::Pid: return "pid";
    case LawKind::Gesobc: return "gesobc";
  }
  return "unknown";
}

// Uniform control-law interface: u = law(t, x, d_t).  Laws with internal state
// (PID history, receding-horizon cache) are reset() before each simulation and
// must stay confined to a single simulation at a time.
class ControlLaw {
 public:
  virtual ~ControlLaw() = default;
  virtual Vec control(double t, const Vec& x, const Vec& d) = 0;
  virtual void reset() {}
  virtual LawKind kind() const = 0;
};

struct PidGains {
  double K_p = 0.0;
  double K_i = 0.0;
  double K_d = 0.0;
};

struct GesobcGains {
  Mat K_x;  // m x n state feedback
  Mat K_d;  // m x q disturbance compensation
};

namespace detail {

// Linear interpolation over a uniform grid with constant extrapolation
// beyond the ends.
template <typename T>
T interp_grid(const std::vector<T>& values, double step, double t) {
  const size_t N = values.size() - 1;
  if (t <= 0.0) return values.front();
  const double s = t / step;
  const auto i = static_cast<size_t>(s);
  if (i >= N) return values.back();
  const double a = s - static_cast<double>(i);
  return (1.0 - a) * values[i] + a * values[i + 1];
}

}  // namespace detail

// Shared implementation of the finite-horizon law u = -W M_t x - W h_t with
// W either the inverse (Theorem-1 mode) or the pseudo-inverse (Lemma-2 mode)
// of Upsilon; h_t is rebuilt from f_t and the current disturbance so the law
// stays consistent at off-node times.
class GainScheduleLaw final : public ControlLaw {
 public:
  GainScheduleLaw(const PlantModel& plant, const CostSpec& cost, const RiccatiTrajectory& rt,
                  const FeedforwardTrajectory& ft, LawKind kind)
      : kind_(kind), step_(rt.step), M_(rt.M), f_(ft.f), Bt_(plant.B.transpose()),
        BtRE_(plant.B.transpose() * cost.R * plant.E) {
    if (rt.grid.size() != ft.grid.size() || std::abs(rt.step - ft.step) > 1e-15)
      raise(ErrorCode::GridMismatch, "riccati and feedforward grids differ");
    if (kind == LawKind::FiniteHorizon) {
      if (min_symmetric_eigenvalue(rt.Upsilon) < 1e-10)
        raise(ErrorCode::UpsilonSingular,
              "Upsilon is not positive definite; the finite-horizon law is not uniquely solvable");
      W_ = rt.Upsilon.inverse();
    } else {
      for (size_t i = 0; i < rt.M.size(); ++i) {
        const auto rc = check_regular_condition(rt.Upsilon, rt.UpsilonPinv, rt.M[i]);
        if (!rc.pass)
          raise(ErrorCode::RegularConditionViolated,
                "regular condition fails at node " + std::to_string(i));
      }
      W_ = rt.UpsilonPinv;
    }
  }

  Vec control(double t, const Vec& x, const Vec& d) override {
    const Mat M = detail::interp_grid(M_, step_, t);
    const Vec f = detail::interp_grid(f_, step_, t);
    const Vec h = Bt_ * f + BtRE_ * d;
    return -W_ * (M * x + h);
  }

  LawKind kind() const override { return kind_; }

 private:
  LawKind kind_;
  double step_;
  std::vector<Mat> M_;
  std::vector<Vec> f_;
  Mat Bt_, BtRE_, W_;
};

class InfiniteHorizonLaw final : public ControlLaw {
 public:
  InfiniteHorizonLaw(const GareSolution& g, const Vec& h_ss)
      : K_(g.UpsilonPinv * g.M), u_ff_(-(g.UpsilonPinv * h_ss)) {}

  Vec control(double, const Vec& x, const Vec&) override { return -K_ * x + u_ff_; }
  LawKind kind() const override { return LawKind::InfiniteHorizon; }

  const Mat& feedback_gain() const { return K_; }
  const Vec& feedforward_term() const { return u_ff_; }

 private:
  Mat K_;
  Vec u_ff_;
};

// Receding-horizon law: at every control instant the finite-horizon problem is
// re-solved on a sliding window [t, t+tau] with the currently measured
// disturbance held constant, and the window-start gains are applied.  The
// plant is time-invariant, so the window Riccati solution is identical at
// every instant and is computed once; the window feedforward depends only on
// the frozen disturbance value and is memoized on it.
class RecedingHorizonLaw final : public ControlLaw {
 public:
  RecedingHorizonLaw(const PlantModel& plant, const CostSpec& cost, double tau, double inner_step)
      : plant_(plant), cost_(cost), tau_(tau), inner_(inner_step) {
    if (!(tau > 0.0)) raise(ErrorCode::NonpositiveHorizon, "window length must be positive");
    CostSpec window = cost;
    window.T = tau;
    window_rt_ = solve_grde(plant, window, inner_step);
    if (min_symmetric_eigenvalue(window_rt_.Upsilon) < 1e-10)
      raise(ErrorCode::UpsilonSingular, "Upsilon is not positive definite");
    Ui_ = window_rt_.Upsilon.inverse();
    K_ = Ui_ * window_rt_.M.front();
    BtRE_ = plant.B.transpose() * cost.R * plant.E;
    Q_ = assemble_Q(plant, cost);
  }

  Vec control(double, const Vec& x, const Vec& d) override {
    const bool hit = cached_d_ && cached_d_->size() == d.size() && (*cached_d_ - d).isZero(0.0);
    if (!hit) {
      cached_h0_ = window_feedforward(d);
      cached_d_ = d;
    }
    return -K_ * x - Ui_ * *cached_h0_;
  }

  void reset() override {
    cached_d_.reset();
    cached_h0_.reset();
  }

  LawKind kind() const override { return LawKind::RecedingHorizon; }

  const Mat& feedback_gain() const { return K_; }
  Vec feedforward_term(const Vec& d) { return -Ui_ * window_feedforward(d); }

 private:
  // Window-start h for the frozen disturbance: integrate the feedforward ODE
  // backward across the cached window Riccati trajectory.
  Vec window_feedforward(const Vec& d) {
    const size_t N = window_rt_.grid.size() - 1;
    const double dt = window_rt_.step;
    const Mat At = plant_.A.transpose();
    const Vec Ed = plant_.E * d;
    const Vec BtREd = BtRE_ * d;
    const Vec Qr = Q_ * cost_.r;
    const auto rhs = [&](const Vec& f, const Mat& M, const Mat& P) -> Vec {
      const Vec h = plant_.B.transpose() * f + BtREd;
      return M.transpose() * (Ui_ * h) - At * f - P * Ed + Qr;
    };
    Vec f = -cost_.P_T * cost_.r;
    for (size_t i = N; i > 0; --i) {
      const Mat& Pa = window_rt_.P[i];
      const Mat Pm = 0.5 * (window_rt_.P[i] + window_rt_.P[i - 1]);
      const Mat& Pb = window_rt_.P[i - 1];
      const Mat& Ma = window_rt_.M[i];
      const Mat Mm = 0.5 * (window_rt_.M[i] + window_rt_.M[i - 1]);
      const Mat& Mb = window_rt_.M[i - 1];
      const Vec k1 = rhs(f, Ma, Pa);
      const Vec k2 = rhs(f - 0.5 * dt * k1, Mm, Pm);
      const Vec k3 = rhs(f - 0.5 * dt * k2, Mm, Pm);
      const Vec k4 = rhs(f - dt * k3, Mb, Pb);
      f = f - dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return plant_.B.transpose() * f + BtREd;
  }

  PlantModel plant_;
  CostSpec cost_;
  double tau_, inner_;
  RiccatiTrajectory window_rt_;
  Mat Ui_, K_, BtRE_, Q_;
  std::optional<Vec> cached_d_;
  std::optional<Vec> cached_h0_;
};

class PidLaw final : public ControlLaw {
 public:
  PidLaw(const PlantModel& plant, const PidGains& gains, double target, double step)
      : gains_(gains), target_(target), step_(step), c_o_(plant.c_o) {
    if (plant.l() != 1)
      raise(ErrorCode::NotScalarOutput, "pid law needs a scalar regulated output");
    if (plant.m() != 1)
      raise(ErrorCode::NotScalarOutput, "pid law needs a scalar control channel");
    if (!(step > 0.0)) raise(ErrorCode::StepInvalid, "pid sample step must be positive");
  }

  Vec control(double, const Vec& x, const Vec&) override {
    const double e = target_ - (c_o_ * x)(0);
    double deriv = 0.0;
    if (has_prev_) {
      integral_ += 0.5 * step_ * (prev_e_ + e);
      deriv = (e - prev_e_) / step_;
    } else {
      integral_ += 0.5 * step_ * e;  // trapezoid from a zero-error virtual past sample
      has_prev_ = true;
    }
    prev_e_ = e;
    Vec u(1);
    u(0) = gains_.K_p * e + gains_.K_i * integral_ + gains_.K_d * deriv;
    return u;
  }

  void reset() override {
    integral_ = 0.0;
    prev_e_ = 0.0;
    has_prev_ = false;
  }

  LawKind kind() const override { return LawKind::Pid; }

 private:
  PidGains gains_;
  double target_;
  double step_;
  Mat c_o_;
  double integral_ = 0.0;
  double prev_e_ = 0.0;
  bool has_prev_ = false;
};

// Simplified GESOBC baseline: state feedback plus direct compensation of the
// measured disturbance (the ideal limit of the extended-state-observer
// estimate).
class GesobcLaw final : public ControlLaw {
 public:
  GesobcLaw(const PlantModel& plant, const GesobcGains& gains) : K_x_(gains.K_x), K_d_(gains.K_d) {
    if (K_x_.cols() != plant.n() || K_x_.rows() != plant.m())
      raise(ErrorCode::DimensionMismatch, "K_x must be m x n");
    if (K_d_.cols() != plant.q() || K_d_.rows() != plant.m())
      raise(ErrorCode::DimensionMismatch, "K_d must be m x q");
  }

  Vec control(double, const Vec& x, const Vec& d) override { return K_x_ * x + K_d_ * d; }
  LawKind kind() const override { return LawKind::Gesobc; }

 private:
  Mat K_x_, K_d_;
};

// Wraps a law with an additive open-loop perturbation u = base(t,x,d) + delta(t);
// used by the completion-of-squares checks.
class PerturbedLaw final : public ControlLaw {
 public:
  PerturbedLaw(std::unique_ptr<ControlLaw> base, std::function<Vec(double)> delta)
      : base_(std::move(base)), delta_(std::move(delta)) {}

  Vec control(double t, const Vec& x, const Vec& d) override {
    return base_->control(t, x, d) + delta_(t);
  }
  void reset() override { base_->reset(); }
  LawKind kind() const override { return base_->kind(); }

 private:
  std::unique_ptr<ControlLaw> base_;
  std::function<Vec(double)> delta_;
};

inline std::unique_ptr<ControlLaw> make_finite_horizon_law(const PlantModel& plant, const CostSpec& cost,
                                                           const RiccatiTrajectory& rt,
                                                           const FeedforwardTrajectory& ft) {
  return std::make_unique<GainScheduleLaw>(plant, cost, rt, ft, LawKind::FiniteHorizon);
}

inline std::unique_ptr<ControlLaw> make_pseudo_inverse_law(const PlantModel& plant, const CostSpec& cost,
                                                           const RiccatiTrajectory& rt,
                                                           const FeedforwardTrajectory& ft) {
  return std::make_unique<GainScheduleLaw>(plant, cost, rt, ft, LawKind::PseudoInverse);
}

inline std::unique_ptr<ControlLaw> make_infinite_horizon_law(const GareSolution& g,
                                                             const SteadyStateFeedforward& ss) {
  return std::make_unique<InfiniteHorizonLaw>(g, ss.h_ss);
}

inline std::unique_ptr<ControlLaw> make_receding_horizon_law(const PlantModel& plant, const CostSpec& cost,
                                                             double tau, double inner_step) {
  return std::make_unique<RecedingHorizonLaw>(plant, cost, tau, inner_step);
}

inline std::unique_ptr<ControlLaw> make_pid_law(const PlantModel& plant, const PidGains& gains,
                                                double target, double step) {
  return std::make_unique<PidLaw>(plant, gains, target, step);
}

inline std::unique_ptr<ControlLaw> make_gesobc_law(const PlantModel& plant, const GesobcGains& gains) {
  return std::make_unique<GesobcLaw>(plant, gains);
}

}  // namespace lqt
