// Command-line front end: run scenarios to CSV/SVG artifacts, verify the
// solver stack against a scenario, or list the built-in scenarios.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lqt/experiments.hpp"
#include "lqt/scenario.hpp"

namespace {

std::vector<std::string> default_scenarios() { return {"scalar", "example_a", "example_b"}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linear-quadratic tracking disturbance-rejection toolkit"};
  app.require_subcommand(1);

  std::string out_dir = "out";
  double step = 0.0;
  unsigned seed = 42;
  std::vector<std::string> names;

  CLI::App* run = app.add_subcommand("run", "simulate a scenario and write CSV/SVG artifacts");
  run->add_option("scenario", names, "built-in scenario names or JSON scenario files");
  run->add_option("--out-dir", out_dir, "artifact directory (default: out)");
  run->add_option("--step", step, "override the simulation step");
  run->add_option("--seed", seed, "random seed (unused by run; accepted for uniformity)");

  CLI::App* verify = app.add_subcommand("verify", "check solver invariants on a scenario");
  verify->add_option("scenario", names, "built-in scenario names or JSON scenario files");
  verify->add_option("--seed", seed, "seed for the randomized optimality probes");
  verify->add_option("--step", step, "override the backward-integration step");

  CLI::App* list = app.add_subcommand("list", "list built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& info : lqt::list_builtin_scenarios())
        std::printf("%-12s %s\n", info.name.c_str(), info.description.c_str());
      return 0;
    }

    if (names.empty()) names = default_scenarios();

    if (run->parsed()) {
      for (const auto& name : names) {
        lqt::Scenario s = lqt::load_scenario(name);
        lqt::RunArtifacts art = lqt::run_scenario(s, out_dir, step);
        lqt::print_run_summary(s, art);
      }
      return 0;
    }

    // verify
    bool all = true;
    for (const auto& name : names) {
      lqt::Scenario s = lqt::load_scenario(name);
      if (step > 0.0) {
        s.riccati_step = step;
        s.step = step;
      }
      lqt::VerifyReport rep = lqt::verify_scenario(s, seed);
      lqt::print_verify_report(rep);
      all = all && rep.all_pass;
    }
    return all ? 0 : 1;
  } catch (const lqt::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", lqt::to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
