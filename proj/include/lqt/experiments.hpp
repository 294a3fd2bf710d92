#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "lqt/controller.hpp"
#include "lqt/csv.hpp"
#include "lqt/feedforward.hpp"
#include "lqt/model.hpp"
#include "lqt/oracle.hpp"
#include "lqt/riccati.hpp"
#include "lqt/scenario.hpp"
#include "lqt/simulator.hpp"
#include "lqt/svg.hpp"

namespace lqt {

// Closed-loop equilibrium of the stationary optimal law before the
// disturbance step: solves A_cl x = B u_ff_neg + ... with d held at d(0).
inline Vec pre_disturbance_steady_state(const PlantModel& plant, const CostSpec& cost,
                                        const GareSolution& g, const Vec& d0, const Vec& r) {
  SteadyStateFeedforward ss = steady_state_feedforward(plant, cost, g, d0, r);
  // 0 = A_cl x - B Y^+ h_ss + E d0
  Vec rhs = plant.B * (g.UpsilonPinv * ss.h_ss) - plant.E * d0;
  return g.A_cl.fullPivLu().solve(rhs);
}

struct ControllerResult {
  std::string name;
  bool failed = false;
  std::string message;
  double J_sim = std::numeric_limits<double>::quiet_NaN();
  double ise = std::numeric_limits<double>::quiet_NaN();
  double settle_time = std::numeric_limits<double>::quiet_NaN();
  double max_abs_u = std::numeric_limits<double>::quiet_NaN();
};

struct RunArtifacts {
  std::filesystem::path directory;
  std::vector<ControllerResult> results;
  std::vector<std::string> files;  // relative to directory, in creation order
};

namespace detail {

// Integrated squared tracking error of the regulated output.
inline double integrated_squared_error(const SimulationLog& log, const Vec& target) {
  double ise = 0.0;
  for (size_t k = 0; k + 1 < log.times.size(); ++k) {
    const double e0 = (log.y[k] - target).squaredNorm();
    const double e1 = (log.y[k + 1] - target).squaredNorm();
    ise += 0.5 * (e0 + e1) * (log.times[k + 1] - log.times[k]);
  }
  return ise;
}

// First time after which every regulated channel stays inside the 2% band
// around its target (band floor 0.02 for zero targets); NaN if never.
inline double settle_time_2pct(const SimulationLog& log, const Vec& target) {
  Vec band = target.cwiseAbs() * 0.02;
  for (Eigen::Index i = 0; i < band.size(); ++i) band(i) = std::max(band(i), 0.02);
  size_t first_ok = log.times.size();
  for (size_t k = log.times.size(); k-- > 0;) {
    bool inside = true;
    for (Eigen::Index i = 0; i < target.size(); ++i)
      if (std::abs(log.y[k](i) - target(i)) > band(i)) inside = false;
    if (!inside) break;
    first_ok = k;
  }
  if (first_ok == log.times.size()) return std::numeric_limits<double>::quiet_NaN();
  return log.times[first_ok];
}

inline double max_abs_control(const SimulationLog& log) {
  double m = 0.0;
  for (const Vec& u : log.u) m = std::max(m, u.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace detail

inline std::unique_ptr<ControlLaw> build_controller(const Scenario& s, const ControllerSpec& cs) {
  if (cs.kind == "finite_horizon" || cs.kind == "pseudo_inverse") {
    RiccatiTrajectory rt = solve_grde(s.plant, s.cost, s.riccati_step);
    FeedforwardTrajectory ft = solve_feedforward(s.plant, s.cost, rt, s.disturbance);
    return cs.kind == "finite_horizon" ? make_finite_horizon_law(s.plant, s.cost, rt, ft)
                                       : make_pseudo_inverse_law(s.plant, s.cost, rt, ft);
  }
  if (cs.kind == "infinite_horizon") {
    GareSolution g = solve_gare(s.plant, s.cost, s.riccati_step);
    SteadyStateFeedforward ss =
        steady_state_feedforward(s.plant, s.cost, g, s.disturbance.tail(), s.cost.r);
    return make_infinite_horizon_law(g, ss);
  }
  if (cs.kind == "receding_horizon") {
    if (cs.tau <= 0.0) raise(ErrorCode::ScenarioInvalid, "receding_horizon needs tau > 0");
    return make_receding_horizon_law(s.plant, s.cost, cs.tau,
                                     cs.inner_step > 0 ? cs.inner_step : s.riccati_step);
  }
  if (cs.kind == "pid") return make_pid_law(s.plant, cs.pid, s.target(0), s.step);
  if (cs.kind == "gesobc") {
    GesobcGains gg{cs.K_x, cs.K_d};
    return make_gesobc_law(s.plant, gg);
  }
  raise(ErrorCode::ScenarioInvalid, "unknown controller kind '" + cs.kind + "'");
}

inline Vec resolve_initial_state(const Scenario& s, const ControllerSpec& cs) {
  if (cs.x0_override) {
    if (cs.x0_override->size() != s.plant.n())
      raise(ErrorCode::DimensionMismatch, "controller x0 has wrong length");
    return *cs.x0_override;
  }
  if (cs.x0_steady_state) {
    GareSolution g = solve_gare(s.plant, s.cost, s.riccati_step);
    return pre_disturbance_steady_state(s.plant, s.cost, g, s.disturbance(0.0), s.cost.r);
  }
  return s.x0;
}

inline RunArtifacts run_scenario(const Scenario& s, const std::filesystem::path& out_dir,
                                 double step_override = 0.0) {
  if (s.controllers.empty())
    raise(ErrorCode::ScenarioInvalid, "scenario '" + s.name + "' has no controllers");
  const double step = step_override > 0.0 ? step_override : s.step;

  RunArtifacts art;
  art.directory = out_dir / s.name;
  std::filesystem::create_directories(art.directory);

  std::vector<SimulationLog> logs(s.controllers.size());
  std::vector<bool> ok(s.controllers.size(), false);

  for (size_t i = 0; i < s.controllers.size(); ++i) {
    const ControllerSpec& cs = s.controllers[i];
    ControllerResult res;
    res.name = cs.name;
    try {
      std::unique_ptr<ControlLaw> law = build_controller(s, cs);
      Vec x0 = resolve_initial_state(s, cs);
      logs[i] = simulate(s.plant, *law, s.disturbance, x0, s.cost.T, step, &s.cost);
      ok[i] = true;
      res.J_sim = evaluate_cost(s.plant, s.cost, logs[i]).J_sim;
      res.ise = detail::integrated_squared_error(logs[i], s.target);
      res.settle_time = detail::settle_time_2pct(logs[i], s.target);
      res.max_abs_u = detail::max_abs_control(logs[i]);
      const std::string fname = cs.name + ".csv";
      write_simulation_csv(logs[i], (art.directory / fname).string());
      art.files.push_back(fname);
    } catch (const Error& e) {
      res.failed = true;
      res.message = e.what();
      const std::string fname = cs.name + ".FAILED";
      std::ofstream marker(art.directory / fname);
      marker << e.what() << "\n";
      art.files.push_back(fname);
    }
    art.results.push_back(std::move(res));
  }

  // Solver-state artifacts for the scenario's optimal finite-horizon problem.
  try {
    RiccatiTrajectory rt = solve_grde(s.plant, s.cost, s.riccati_step);
    FeedforwardTrajectory ft = solve_feedforward(s.plant, s.cost, rt, s.disturbance);
    write_riccati_csv(rt, (art.directory / "riccati.csv").string());
    art.files.push_back("riccati.csv");
    write_feedforward_csv(ft, (art.directory / "feedforward.csv").string());
    art.files.push_back("feedforward.csv");
  } catch (const Error&) {
    // e.g. unstabilizable scenario: per-controller markers already tell the story
  }

  // Overlay plots: one per regulated channel and one per control channel.
  auto overlay = [&](const std::string& stem, const std::string& y_label, Eigen::Index channel,
                     bool control_channel) {
    std::vector<PlotSeries> series;
    for (size_t i = 0; i < s.controllers.size(); ++i) {
      if (!ok[i]) continue;
      PlotSeries ps;
      ps.label = s.controllers[i].name;
      ps.x = logs[i].times;
      ps.y.reserve(logs[i].times.size());
      const auto& src = control_channel ? logs[i].u : logs[i].y;
      for (const Vec& v : src) ps.y.push_back(v(channel));
      series.push_back(std::move(ps));
    }
    if (series.empty()) return;
    const std::string fname = stem + ".svg";
    write_svg_plot(s.name + " " + y_label, "t", y_label, series, (art.directory / fname).string());
    art.files.push_back(fname);
  };
  for (Eigen::Index c = 0; c < s.plant.l(); ++c)
    overlay("channel_y" + std::to_string(c + 1), "y" + std::to_string(c + 1), c, false);
  for (Eigen::Index c = 0; c < s.plant.m(); ++c)
    overlay("channel_u" + std::to_string(c + 1), "u" + std::to_string(c + 1), c, true);

  // Summary table.
  {
    std::ofstream out(art.directory / "summary.csv");
    out << "controller,status,J_sim,ise,settle_time,max_abs_u\n";
    for (const ControllerResult& r : art.results) {
      out << r.name << "," << (r.failed ? "failed" : "ok") << "," << format_number(r.J_sim) << ","
          << format_number(r.ise) << "," << format_number(r.settle_time) << ","
          << format_number(r.max_abs_u) << "\n";
    }
    art.files.push_back("summary.csv");
  }
  return art;
}

// --- verification suite -----------------------------------------------------

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::string scenario;
  std::vector<VerifyCheck> checks;
  bool all_pass = true;

  void add(const std::string& name, bool pass, const std::string& detail) {
    checks.push_back({name, pass, detail});
    all_pass = all_pass && pass;
  }
};

namespace detail {

inline std::string fmt(double v) { return format_number(v); }

// Closed-form solution of the scalar Riccati ODE at t = 0, integrated
// backward from p(T) = p_T:  dp/dt = k (p - p+)(p - p-), k = b^2/upsilon.
inline double scalar_riccati_closed_form(double a, double b, double q, double upsilon, double p_T,
                                         double T) {
  const double k = b * b / upsilon;
  const double disc = std::sqrt(a * a + q * k);
  const double p_plus = (a + disc) / k;
  const double p_minus = (a - disc) / k;
  if (std::abs(p_T - p_minus) < 1e-300) return p_minus;
  const double w_T = (p_T - p_plus) / (p_T - p_minus);
  const double w0 = w_T * std::exp(-k * (p_plus - p_minus) * T);
  return (p_plus - p_minus * w0) / (1.0 - w0);
}

// Smooth random control perturbation: sum of three sinusoids per channel.
inline std::function<Vec(double)> random_smooth_perturbation(std::mt19937& rng, Eigen::Index m) {
  std::uniform_real_distribution<double> amp(0.1, 0.6);
  std::uniform_real_distribution<double> freq(0.5, 6.0);
  std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
  struct Term {
    double a, w, p;
  };
  std::vector<std::vector<Term>> terms(static_cast<size_t>(m));
  for (auto& ch : terms)
    for (int j = 0; j < 3; ++j) ch.push_back({amp(rng), freq(rng), phase(rng)});
  return [terms, m](double t) {
    Vec v(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      double s = 0.0;
      for (const auto& tm : terms[static_cast<size_t>(i)]) s += tm.a * std::sin(tm.w * t + tm.p);
      v(i) = s;
    }
    return v;
  };
}

}  // namespace detail

// Empirical completion-of-squares probe: for feedback perturbations
// u = u*(t,x) + delta(t) the cost identity J(u) - J(u*) = 1/2 int delta' Y delta
// holds exactly in continuous time; this measures the worst relative deviation
// over `trials` random smooth perturbations (relative to the quadratic term).
struct CompletionOfSquaresResult {
  double max_rel_dev = 0.0;
  double min_quadratic = std::numeric_limits<double>::infinity();
};

inline CompletionOfSquaresResult completion_of_squares_probe(const PlantModel& plant,
                                                             const CostSpec& cost,
                                                             const RiccatiTrajectory& rt,
                                                             const FeedforwardTrajectory& ft,
                                                             const Signal& d, const Vec& x0,
                                                             int trials, unsigned seed,
                                                             double sim_step = 0.0) {
  // The identity is a continuous-time statement; the sampled-control
  // simulation contributes an O(step) cross term, so probe on a finer grid
  // than the gain tables by default.
  const double step = sim_step > 0.0 ? sim_step : rt.step / 10.0;
  std::mt19937 rng(seed);
  std::unique_ptr<ControlLaw> base_law = make_finite_horizon_law(plant, cost, rt, ft);
  const SimulationLog base = simulate(plant, *base_law, d, x0, cost.T, step, &cost);
  const CostReport base_cost = evaluate_cost(plant, cost, base);

  CompletionOfSquaresResult out;
  for (int trial = 0; trial < trials; ++trial) {
    auto delta = detail::random_smooth_perturbation(rng, plant.m());
    PerturbedLaw law(make_finite_horizon_law(plant, cost, rt, ft), delta);
    const SimulationLog plog = simulate(plant, law, d, x0, cost.T, step, &cost);
    const CostReport pert_cost = evaluate_cost(plant, cost, plog);

    // 1/2 int delta' Upsilon delta, trapezoid on the simulation grid
    double quad = 0.0;
    for (size_t k = 0; k < plog.times.size(); ++k) {
      const Vec dv = delta(plog.times[k]);
      const double w = (k == 0 || k + 1 == plog.times.size()) ? 0.5 : 1.0;
      quad += w * dv.dot(rt.Upsilon * dv);
    }
    quad *= 0.5 * step;

    const double dev = std::abs((pert_cost.J_sim - base_cost.J_sim) - quad);
    out.max_rel_dev = std::max(out.max_rel_dev, dev / quad);
    out.min_quadratic = std::min(out.min_quadratic, quad);
  }
  return out;
}

inline VerifyReport verify_scenario(const Scenario& s, unsigned seed = 42) {
  VerifyReport rep;
  rep.scenario = s.name;

  // 1. structural validation
  try {
    validate_system(s.plant, s.cost);
    rep.add("validate_system", true, "dimensions and weights accepted");
  } catch (const Error& e) {
    rep.add("validate_system", false, e.what());
    return rep;  // nothing else is meaningful
  }

  // 2. disturbance classification (informational)
  {
    DisturbanceClassification cls = classify_disturbance(s.plant);
    std::string d = cls.kind == DisturbanceKind::Matched ? "matched" : "mismatched";
    rep.add("classify_disturbance", true,
            d + " (rank B = " + std::to_string(cls.rank_B) +
                ", rank [B E] = " + std::to_string(cls.rank_BE) + ")");
  }

  // 3. detectability of (A, Q^(1/2))
  {
    Mat Q = assemble_Q(s.plant, s.cost);
    DetectabilityReport det = check_detectability(s.plant, Q);
    std::string d = det.detectable
                        ? "all unstable modes observable"
                        : "undetectable mode at Re = " +
                              detail::fmt(det.offending.empty() ? 0.0 : det.offending.front().real());
    rep.add("detectability", det.detectable, d);
  }

  // 4. finite-horizon Riccati solve + regular condition
  RiccatiTrajectory rt;
  bool have_rt = false;
  try {
    rt = solve_grde(s.plant, s.cost, s.riccati_step);
    have_rt = true;
    double worst = 0.0;
    for (size_t k = 0; k < rt.M.size(); ++k) {
      RegularCheck rc = check_regular_condition(rt.Upsilon, rt.UpsilonPinv, rt.M[k]);
      worst = std::max(worst, rc.defect);
    }
    rep.add("regular_condition", worst <= 1e-9, "max defect " + detail::fmt(worst));
  } catch (const Error& e) {
    rep.add("regular_condition", false, e.what());
  }

  // 5. scalar closed form (only meaningful for first-order plants)
  if (s.plant.n() == 1 && have_rt) {
    const Mat Q = assemble_Q(s.plant, s.cost);
    const double p0_ref = detail::scalar_riccati_closed_form(
        s.plant.A(0, 0), s.plant.B(0, 0), Q(0, 0), rt.Upsilon(0, 0), s.cost.P_T(0, 0), s.cost.T);
    const double err = std::abs(rt.P.front()(0, 0) - p0_ref);
    rep.add("scalar_closed_form", err <= 1e-6,
            "|P_0 - closed form| = " + detail::fmt(err));
  }

  // 6. stationary solve: algebraic residual and closed-loop spectrum
  GareSolution gare;
  bool have_gare = false;
  try {
    gare = solve_gare(s.plant, s.cost, s.riccati_step);
    have_gare = true;
    const bool hurwitz = is_hurwitz(gare.A_cl);
    rep.add("gare_residual", gare.residual <= 1e-8 && hurwitz,
            "residual " + detail::fmt(gare.residual) + (hurwitz ? ", A_cl Hurwitz" : ", A_cl NOT Hurwitz"));
  } catch (const Error& e) {
    rep.add("gare_residual", false, e.what());
  }

  // 7. FBDE residuals along the optimal finite-horizon trajectory
  if (have_rt) {
    try {
      FeedforwardTrajectory ft = solve_feedforward(s.plant, s.cost, rt, s.disturbance);
      std::unique_ptr<ControlLaw> law = make_finite_horizon_law(s.plant, s.cost, rt, ft);
      SimulationLog log =
          simulate(s.plant, *law, s.disturbance, s.x0, s.cost.T, rt.step, &s.cost);
      FbdeResidualReport fr = fbde_residuals(s.plant, s.cost, log, rt, ft);
      const bool pass = fr.stationarity_residual <= 1e-4 && fr.adjoint_ode_residual <= 1e-4 &&
                        fr.terminal_residual <= 1e-4;
      rep.add("fbde_residuals", pass,
              "stationarity " + detail::fmt(fr.stationarity_residual) + ", adjoint " +
                  detail::fmt(fr.adjoint_ode_residual) + ", terminal " +
                  detail::fmt(fr.terminal_residual));

      // 8. completion of squares: J(u*+delta) - J(u*) = 1/2 int delta' Y delta
      CompletionOfSquaresResult cos = completion_of_squares_probe(
          s.plant, s.cost, rt, ft, s.disturbance, s.x0, 20, seed);
      rep.add("completion_of_squares", cos.max_rel_dev <= 0.01,
              "worst identity deviation " + detail::fmt(cos.max_rel_dev) +
                  " of the quadratic term");
    } catch (const Error& e) {
      rep.add("fbde_residuals", false, e.what());
    }
  }

  // 9. discrete dynamic-programming oracle vs continuous machinery
  if (have_rt) {
    try {
      FeedforwardTrajectory ft = solve_feedforward(s.plant, s.cost, rt, s.disturbance);
      std::unique_ptr<ControlLaw> law = make_finite_horizon_law(s.plant, s.cost, rt, ft);
      SimulationLog log =
          simulate(s.plant, *law, s.disturbance, s.x0, s.cost.T, rt.step, &s.cost);
      CostReport cr = evaluate_cost(s.plant, s.cost, log, &rt, &ft);
      DiscreteTrackingProblem dp =
          make_discrete_problem(s.plant, s.cost, s.disturbance, rt.step);
      DpSolution sol = solve_discrete_dp(dp, s.x0);
      const double scale = std::max(1.0, std::abs(*cr.J_formula));
      const double gap = std::abs(sol.J - *cr.J_formula) / scale;
      rep.add("dp_oracle_gap", gap <= 0.01,
              "DP " + detail::fmt(sol.J) + " vs formula " + detail::fmt(*cr.J_formula) +
                  " (relative gap " + detail::fmt(gap) + ")");
    } catch (const Error& e) {
      rep.add("dp_oracle_gap", false, e.what());
    }
  }

  // 10. stationary feedforward: ODE integration vs convolution form.  The
  // threshold scales with the feedforward magnitude so plants with large
  // state targets are not judged against an absolute bound.
  if (have_gare) {
    try {
      const double horizon = std::min(s.cost.T, 5.0);
      const double dev =
          convolution_cross_check(s.plant, s.cost, gare, s.disturbance, horizon, 1e-3);
      SteadyStateFeedforward ss =
          steady_state_feedforward(s.plant, s.cost, gare, s.disturbance.tail(), s.cost.r);
      const double scale = std::max(1.0, ss.f_ss.norm());
      rep.add("convolution_cross_check", dev <= 1e-4 * scale,
              "max deviation " + detail::fmt(dev) + " (feedforward scale " + detail::fmt(scale) + ")");
    } catch (const Error& e) {
      rep.add("convolution_cross_check", false, e.what());
    }
  }

  return rep;
}

inline void print_verify_report(const VerifyReport& rep, std::FILE* out = stdout) {
  std::fprintf(out, "verify %s\n", rep.scenario.c_str());
  for (const VerifyCheck& c : rep.checks)
    std::fprintf(out, "  [%s] %-24s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                 c.detail.c_str());
  std::fprintf(out, "%s\n", rep.all_pass ? "all checks passed" : "SOME CHECKS FAILED");
}

inline void print_run_summary(const Scenario& s, const RunArtifacts& art, std::FILE* out = stdout) {
  std::fprintf(out, "scenario %s (T = %s, step = %s)\n", s.name.c_str(),
               format_number(s.cost.T).c_str(), format_number(s.step).c_str());
  std::fprintf(out, "  %-12s %-8s %14s %14s %12s %12s\n", "controller", "status", "J_sim", "ISE",
               "settle_2pct", "max|u|");
  for (const ControllerResult& r : art.results) {
    if (r.failed) {
      std::fprintf(out, "  %-12s %-8s %s\n", r.name.c_str(), "failed", r.message.c_str());
    } else {
      std::fprintf(out, "  %-12s %-8s %14s %14s %12s %12s\n", r.name.c_str(), "ok",
                   format_number(r.J_sim).c_str(), format_number(r.ise).c_str(),
                   format_number(r.settle_time).c_str(), format_number(r.max_abs_u).c_str());
    }
  }
  std::fprintf(out, "  artifacts in %s\n", art.directory.string().c_str());
}

}  // namespace lqt
