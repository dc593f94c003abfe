#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace nsv::app {

enum class Status { pass, fail, skipped };
std::string to_string(Status s);

struct Criterion {
  std::string name;
  std::string invariant;  // what was tested, in words
  Status status = Status::fail;
  std::string detail;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
};

struct RunReport {
  Experiment experiment = Experiment::simulate;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<Criterion> criteria;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  std::vector<std::string> artifacts;  // relative to the output directory

  bool passed() const;
  const Criterion* find(const std::string& name) const;
  nlohmann::ordered_json to_json() const;
};

// Runs the configured experiment, writes its artifacts and report.json into
// out_dir (created if missing).  Wall-clock goes to timing.json so that
// report.json depends only on the configuration.
RunReport run_experiment(const SimConfig& config, const std::string& out_dir, unsigned threads);

// %.17g
std::string format_double(double v);

}  // namespace nsv::app
