#pragma once

// Flat key=value configuration with dotted sections, e.g.
//   p = 1.5
//   noise.family = linear
// Lines starting with '#' are comments.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nsv/analysis.hpp"

namespace nsv::app {

enum class Experiment { simulate, energy_audit, moments, uniqueness, alpha_sweep, pressure, propcheck, bogovskii };

Experiment parse_experiment(const std::string& s);
std::string to_string(Experiment e);
const std::vector<std::string>& experiment_names();

struct SimConfig {
  Experiment experiment = Experiment::simulate;
  Scenario scenario;
  std::string forcing_spec = "zero";
  std::int64_t steps = 0;
  int paths = 1;
  double gamma = 2.0;
  int output_every = 1;

  // moments
  int moments_n_prime = 0;  // 0: twice n_modes
  // alpha-sweep
  std::vector<double> sweep_alphas{0.25, 0.125, 0.0625, 0.03125};
  // uniqueness
  double twin_delta = 1e-3;
  int twin_calibration_samples = 200;
  // pressure
  int pressure_slice_every = 1;
  // propcheck
  int propcheck_pairs = 10000;
  std::vector<double> propcheck_exponents{1.2, 1.5, 2.0, 3.0, 4.0};
  int propcheck_fields = 100;
  int propcheck_noise_samples = 10000;
  int solvability_samples = 1000;
  double solvability_radius = 5.0;
  // bogovskii
  std::vector<int> bogovskii_resolutions{32, 64, 128};
  int bogovskii_count = 20;

  // Normalised key -> value as given (after overrides), for the report echo.
  std::map<std::string, std::string> echo;
};

// Parses text (file contents) and then applies overrides ("key=value").
// Throws ConfigError naming the offending key or the violated condition.
SimConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {},
                       const std::string& origin = "<config>");
SimConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

// Every accepted key.
const std::vector<std::string>& config_keys();

}  // namespace nsv::app
