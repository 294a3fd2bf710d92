#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "lqt/error.hpp"
#include "lqt/feedforward.hpp"
#include "lqt/oracle.hpp"
#include "lqt/riccati.hpp"
#include "lqt/simulator.hpp"

namespace lqt {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace detail {

inline void append_vec(std::string& line, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    line += ',';
    line += format_number(v(i));
  }
}

}  // namespace detail

// Columns: t, x1..xn, u1..um, d1..dq, y1..yl, running_cost
inline void write_simulation_csv(const SimulationLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(ErrorCode::ScenarioInvalid, "cannot open " + path + " for writing");
  std::string head = "t";
  for (Eigen::Index i = 0; i < log.x.front().size(); ++i) head += ",x" + std::to_string(i + 1);
  for (Eigen::Index i = 0; i < log.u.front().size(); ++i) head += ",u" + std::to_string(i + 1);
  for (Eigen::Index i = 0; i < log.d.front().size(); ++i) head += ",d" + std::to_string(i + 1);
  for (Eigen::Index i = 0; i < log.y.front().size(); ++i) head += ",y" + std::to_string(i + 1);
  out << head << ",running_cost\n";
  for (size_t k = 0; k < log.times.size(); ++k) {
    std::string line = format_number(log.times[k]);
    detail::append_vec(line, log.x[k]);
    detail::append_vec(line, log.u[k]);
    detail::append_vec(line, log.d[k]);
    detail::append_vec(line, log.y[k]);
    line += ',';
    line += format_number(log.running_cost[k]);
    out << line << '\n';
  }
}

// Columns: t, vec(P_t) row-major
inline void write_riccati_csv(const RiccatiTrajectory& rt, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(ErrorCode::ScenarioInvalid, "cannot open " + path + " for writing");
  const Eigen::Index n = rt.P.front().rows();
  std::string head = "t";
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      head += ",P" + std::to_string(i + 1) + std::to_string(j + 1);
  out << head << '\n';
  for (size_t k = 0; k < rt.grid.size(); ++k) {
    std::string line = format_number(rt.grid[k]);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        line += ',';
        line += format_number(rt.P[k](i, j));
      }
    out << line << '\n';
  }
}

// Columns: t, f components, h components, H
inline void write_feedforward_csv(const FeedforwardTrajectory& ft, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(ErrorCode::ScenarioInvalid, "cannot open " + path + " for writing");
  std::string head = "t";
  for (Eigen::Index i = 0; i < ft.f.front().size(); ++i) head += ",f" + std::to_string(i + 1);
  for (Eigen::Index i = 0; i < ft.h.front().size(); ++i) head += ",h" + std::to_string(i + 1);
  out << head << ",H\n";
  for (size_t k = 0; k < ft.grid.size(); ++k) {
    std::string line = format_number(ft.grid[k]);
    detail::append_vec(line, ft.f[k]);
    detail::append_vec(line, ft.h[k]);
    line += ',';
    line += format_number(ft.H[k]);
    out << line << '\n';
  }
}

// Columns: t, u1..um, x1..xn
inline void write_dp_csv(const DiscreteTrackingProblem& p, const DpSolution& sol,
                         const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(ErrorCode::ScenarioInvalid, "cannot open " + path + " for writing");
  std::string head = "t";
  for (Eigen::Index i = 0; i < sol.u.front().size(); ++i) head += ",u" + std::to_string(i + 1);
  for (Eigen::Index i = 0; i < sol.x.front().size(); ++i) head += ",x" + std::to_string(i + 1);
  out << head << '\n';
  for (size_t k = 0; k < sol.u.size(); ++k) {
    std::string line = format_number(static_cast<double>(k) * p.dt);
    detail::append_vec(line, sol.u[k]);
    detail::append_vec(line, sol.x[k]);
    out << line << '\n';
  }
}

}  // namespace lqt
