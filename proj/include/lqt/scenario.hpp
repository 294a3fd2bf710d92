#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lqt/controller.hpp"
#include "lqt/error.hpp"
#include "lqt/model.hpp"

namespace lqt {

struct ControllerSpec {
  std::string name;
  std::string kind;  // finite_horizon | pseudo_inverse | infinite_horizon | receding_horizon | pid | gesobc
  double tau = 0.0;
  double inner_step = 0.0;
  PidGains pid;
  Mat K_x, K_d;
  std::optional<Vec> x0_override;
  bool x0_steady_state = false;  // start at the pre-disturbance closed-loop steady state
};

struct Scenario {
  std::string name;
  PlantModel plant;
  CostSpec cost;      // cost.r holds the lifted reference
  Vec target;         // regulated-output target y*
  Signal disturbance;
  Vec x0;
  double step = 1e-3;          // simulation step
  double riccati_step = 1e-3;  // backward-integration step
  std::vector<ControllerSpec> controllers;
};

namespace detail {

inline Mat mat_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    raise(ErrorCode::ScenarioInvalid, what + " must be a nested array (matrix rows)");
  const size_t rows = j.size(), cols = j[0].size();
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      raise(ErrorCode::ScenarioInvalid, what + " rows must have equal length");
    for (size_t k = 0; k < cols; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
  }
  return m;
}

inline Vec vec_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) raise(ErrorCode::ScenarioInvalid, what + " must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& j) {
  Scenario s;
  try {
    s.name = j.at("name").get<std::string>();
    const auto& pj = j.at("plant");
    s.plant.A = detail::mat_from_json(pj.at("A"), "plant.A");
    s.plant.B = detail::mat_from_json(pj.at("B"), "plant.B");
    s.plant.E = detail::mat_from_json(pj.at("E"), "plant.E");
    s.plant.c_o = detail::mat_from_json(pj.at("c_o"), "plant.c_o");

    const auto& cj = j.at("cost");
    s.cost.Qbar = detail::mat_from_json(cj.at("Qbar"), "cost.Qbar");
    s.cost.R = detail::mat_from_json(cj.at("R"), "cost.R");
    s.cost.P_T = detail::mat_from_json(cj.at("P_T"), "cost.P_T");
    s.cost.T = cj.at("T").get<double>();
    s.target = detail::vec_from_json(cj.at("target"), "cost.target");
    s.cost.r = lift_reference(s.plant, s.target);

    const auto& dj = j.at("disturbance");
    std::vector<double> times;
    std::vector<Vec> values;
    for (const auto& t : dj.at("times")) times.push_back(t.get<double>());
    for (const auto& v : dj.at("values")) values.push_back(detail::vec_from_json(v, "disturbance value"));
    std::optional<Vec> tail;
    if (dj.contains("tail")) tail = detail::vec_from_json(dj.at("tail"), "disturbance.tail");
    s.disturbance = Signal(times, values, tail);

    s.x0 = detail::vec_from_json(j.at("x0"), "x0");
    s.step = j.value("step", 1e-3);
    s.riccati_step = j.value("riccati_step", s.step);

    if (!j.contains("controllers") || !j.at("controllers").is_array() || j.at("controllers").empty())
      raise(ErrorCode::ScenarioInvalid, "scenario needs a non-empty controller list");
    for (const auto& cjj : j.at("controllers")) {
      ControllerSpec cs;
      cs.kind = cjj.at("kind").get<std::string>();
      cs.name = cjj.value("name", cs.kind);
      cs.tau = cjj.value("tau", 0.0);
      cs.inner_step = cjj.value("inner_step", s.riccati_step);
      cs.pid.K_p = cjj.value("kp", 0.0);
      cs.pid.K_i = cjj.value("ki", 0.0);
      cs.pid.K_d = cjj.value("kd", 0.0);
      if (cjj.contains("K_x")) cs.K_x = detail::mat_from_json(cjj.at("K_x"), "controller.K_x");
      if (cjj.contains("K_d")) cs.K_d = detail::mat_from_json(cjj.at("K_d"), "controller.K_d");
      if (cjj.contains("x0")) {
        if (cjj.at("x0").is_string() && cjj.at("x0").get<std::string>() == "steady_state")
          cs.x0_steady_state = true;
        else
          cs.x0_override = detail::vec_from_json(cjj.at("x0"), "controller.x0");
      }
      s.controllers.push_back(std::move(cs));
    }
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::ScenarioInvalid, std::string("scenario parse error: ") + e.what());
  }
  validate_system(s.plant, s.cost);
  return s;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::ScenarioInvalid, "cannot read scenario file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::ScenarioInvalid, std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return parse_scenario(j);
}

// --- built-in scenarios -----------------------------------------------------

// Third-order plant with a disturbance channel that no input direction can
// cancel; regulated output x3, step disturbance of 3 from t = 0.5 s.
inline Scenario scenario_example_a() {
  Scenario s;
  s.name = "example_a";
  s.plant.A = (Mat(3, 3) << -4, 0, 0, 0, 3, 1, 0, -2, -1).finished();
  s.plant.B = (Mat(3, 1) << 0, 1, 0).finished();
  s.plant.E = (Mat(3, 1) << 0, 0, 1).finished();
  s.plant.c_o = (Mat(1, 3) << 0, 0, 1).finished();
  s.cost.Qbar = (Mat(1, 1) << 1e4).finished();
  s.cost.R = Mat::Identity(3, 3);
  s.cost.P_T = Mat::Zero(3, 3);
  s.cost.T = 5.0;
  s.target = Vec::Zero(1);
  s.cost.r = lift_reference(s.plant, s.target);
  s.disturbance = Signal::step(0.5, Vec::Zero(1), (Vec(1) << 3.0).finished());
  s.x0 = (Vec(3) << 1, 1, 0).finished();
  s.step = 1e-3;
  s.riccati_step = 1e-3;
  ControllerSpec rh;
  rh.name = "proposed";
  rh.kind = "receding_horizon";
  rh.tau = 0.05;
  rh.inner_step = 1e-3;
  s.controllers.push_back(rh);
  ControllerSpec pid;
  pid.name = "pid";
  pid.kind = "pid";
  pid.pid = {80.0, 400.0, 10.0};
  s.controllers.push_back(pid);
  return s;
}

// Second-order motor-style plant (implemented exactly as catalogued, although
// the open loop is unstable); speed target 60, load step of 5 from t = 0.6 s.
inline Scenario scenario_example_b() {
  Scenario s;
  s.name = "example_b";
  s.plant.A = (Mat(2, 2) << -0.42, 106.16, 41.67, 41.67).finished();
  s.plant.B = (Mat(2, 1) << 0, 83.33).finished();
  s.plant.E = (Mat(2, 1) << -212.31, 0).finished();
  s.plant.c_o = (Mat(1, 2) << 1, 0).finished();
  s.cost.Qbar = (Mat(1, 1) << 1e4).finished();
  s.cost.R = Mat::Identity(2, 2);
  s.cost.P_T = Mat::Zero(2, 2);
  s.cost.T = 1.2;
  s.target = (Vec(1) << 60.0).finished();
  s.cost.r = lift_reference(s.plant, s.target);
  s.disturbance = Signal::step(0.6, Vec::Zero(1), (Vec(1) << 5.0).finished());
  s.x0 = (Vec(2) << 60.0, 0.0).finished();
  s.step = 1e-4;
  s.riccati_step = 1e-4;
  ControllerSpec fh;
  fh.name = "proposed";
  fh.kind = "finite_horizon";
  fh.x0_steady_state = true;
  s.controllers.push_back(fh);
  ControllerSpec pid;
  pid.name = "pid";
  pid.kind = "pid";
  pid.pid = {0.1, 2.5, 0.09};
  s.controllers.push_back(pid);
  ControllerSpec ges;
  ges.name = "gesobc";
  ges.kind = "gesobc";
  ges.K_x = (Mat(1, 2) << -0.8, -0.5).finished();
  ges.K_d = (Mat(1, 1) << 2.0).finished();
  s.controllers.push_back(ges);
  return s;
}

// Scalar plant with a closed-form Riccati solution; useful as a smoke test
// for every solver stage.
inline Scenario scenario_scalar() {
  Scenario s;
  s.name = "scalar";
  s.plant.A = (Mat(1, 1) << -1).finished();
  s.plant.B = (Mat(1, 1) << 1).finished();
  s.plant.E = (Mat(1, 1) << 1).finished();
  s.plant.c_o = (Mat(1, 1) << 1).finished();
  s.cost.Qbar = (Mat(1, 1) << 3.0).finished();
  s.cost.R = (Mat(1, 1) << 1.0).finished();
  s.cost.P_T = Mat::Zero(1, 1);
  s.cost.T = 10.0;
  s.target = (Vec(1) << 1.0).finished();
  s.cost.r = lift_reference(s.plant, s.target);
  s.disturbance = Signal::step(0.5, Vec::Zero(1), (Vec(1) << 1.0).finished());
  s.x0 = (Vec(1) << 2.0).finished();
  s.step = 1e-3;
  s.riccati_step = 1e-3;
  ControllerSpec fh;
  fh.name = "proposed";
  fh.kind = "finite_horizon";
  s.controllers.push_back(fh);
  ControllerSpec ih;
  ih.name = "stationary";
  ih.kind = "infinite_horizon";
  s.controllers.push_back(ih);
  ControllerSpec pid;
  pid.name = "pid";
  pid.kind = "pid";
  pid.pid = {2.0, 1.0, 0.0};
  s.controllers.push_back(pid);
  return s;
}

struct BuiltinInfo {
  std::string name;
  std::string description;
};

inline std::vector<BuiltinInfo> list_builtin_scenarios() {
  return {
      {"scalar", "first-order plant with closed-form Riccati solution (smoke test)"},
      {"example_a", "third-order plant, mismatched step disturbance, receding-horizon vs PID"},
      {"example_b", "motor-style speed tracking under load step, finite-horizon vs PID vs GESOBC"},
  };
}

inline Scenario load_scenario(const std::string& name_or_path) {
  if (name_or_path == "scalar") return scenario_scalar();
  if (name_or_path == "example_a") return scenario_example_a();
  if (name_or_path == "example_b") return scenario_example_b();
  return load_scenario_file(name_or_path);
}

}  // namespace lqt
