#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "experiments.hpp"
#include "nsv/error.hpp"
#include "nsv/parallel.hpp"

int main(int argc, char** argv) {
  using namespace nsv::app;
  CLI::App app{"Stochastic Navier-Stokes-Voigt solver and verification harness"};
  app.require_subcommand(1, 1);

  std::string config_path, out_dir = "out";
  std::vector<std::string> overrides;
  std::int64_t seed = -1;
  int paths = -1;
  app.add_subcommand("keys", "print every accepted configuration key");

  for (const auto& name : experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("-c,--config", config_path, "key=value configuration file");
    sub->add_option("-o,--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override the master seed");
    sub->add_option("--paths", paths, "override the number of Monte-Carlo paths");
    sub->add_option("--set,--override", overrides, "key=value override (repeatable)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (app.got_subcommand("keys")) {
    for (const auto& k : config_keys()) std::cout << k << '\n';
    return 0;
  }

  try {
    const std::string experiment = app.get_subcommands().front()->get_name();
    overrides.insert(overrides.begin(), "experiment=" + experiment);
    if (seed >= 0) overrides.push_back("seed=" + std::to_string(seed));
    if (paths >= 0) overrides.push_back("paths=" + std::to_string(paths));
    const SimConfig cfg = config_path.empty() ? parse_config("", overrides, "<defaults>")
                                              : load_config(config_path, overrides);
    const RunReport rep = run_experiment(cfg, out_dir, nsv::worker_count());
    for (const auto& c : rep.criteria)
      std::cout << to_string(c.status) << "  " << c.name << (c.detail.empty() ? "" : "  (" + c.detail + ")") << '\n';
    std::cout << (rep.passed() ? "PASS" : "FAIL") << "  " << experiment << "  report: " << out_dir << "/report.json\n";
    return rep.passed() ? 0 : 1;
  } catch (const nsv::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const nsv::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 3;
  } catch (const nsv::DivergenceError& e) {
    std::cerr << "divergence at step " << e.step() << ": " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 5;
  }
}
