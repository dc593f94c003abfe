// One line per acceptance criterion.  Each criterion runs the pinned
// configuration from configs/ through run_experiment and requires the named
// report entries to pass (skipped does not count).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "experiments.hpp"
#include "nsv/parallel.hpp"

#ifndef NSV_CONFIG_DIR
#error "NSV_CONFIG_DIR must point at the configs directory"
#endif

using namespace nsv::app;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = NSV_CONFIG_DIR;
fs::path g_work;
unsigned g_threads = 1;

struct Outcome {
  bool pass = true;
  std::string detail;
};

RunReport run(const std::string& cfg, const std::string& tag, const std::vector<std::string>& overrides = {},
              unsigned threads = 0) {
  const SimConfig c = load_config((kConfigs / cfg).string(), overrides);
  return run_experiment(c, (g_work / tag).string(), threads ? threads : g_threads);
}

std::string metric(const Criterion& c, const char* key) {
  if (!c.metrics.contains(key)) return "?";
  const auto& v = c.metrics[key];
  return v.is_number_float() ? format_double(v.get<double>()) : v.dump();
}

// Requires each named entry to exist with Status::pass; appends key metrics.
void require(Outcome& o, const RunReport& rep, const std::string& name, std::vector<const char*> keys = {}) {
  const Criterion* c = rep.find(name);
  if (!c) {
    o.pass = false;
    o.detail += " " + name + "=missing";
    return;
  }
  if (c->status != Status::pass) o.pass = false;
  o.detail += " " + name + "=" + to_string(c->status);
  for (const char* k : keys) o.detail += " " + std::string(k) + "=" + metric(*c, k);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Every file except timing.json, compared byte for byte.
bool same_tree(const fs::path& a, const fs::path& b, std::string& why, int& files) {
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file() || e.path().filename() == "timing.json") continue;
    const fs::path rel = fs::relative(e.path(), a);
    ++files;
    if (!fs::exists(b / rel) || slurp(e.path()) != slurp(b / rel)) {
      why = rel.string();
      return false;
    }
  }
  return true;
}

RunReport g_propcheck;

}  // namespace

int main() {
  g_threads = nsv::worker_count();
  g_work = fs::temp_directory_path() / "nsv_acceptance";
  fs::remove_all(g_work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"monotonicity sweeps", [] {
         Outcome o;
         g_propcheck = run("propcheck.cfg", "propcheck");
         require(o, g_propcheck, "monotonicity-sweep", {"pairs_per_exponent"});
         return o;
       }},
      {"Korn identity", [] {
         Outcome o;
         require(o, g_propcheck, "korn", {"fields", "worst_relative_error"});
         return o;
       }},
      {"Euler-Voigt conservation", [] {
         Outcome o;
         require(o, run("euler_voigt.cfg", "euler_shear"), "euler-voigt-conservation", {"relative_drift"});
         // The shear datum is steady, so the refinement ratio is measured on a random datum.
         require(o, run("euler_voigt.cfg", "euler_random", {"ic.kind=random", "ic.energy=1"}),
                 "conservation-first-order", {"ratio"});
         return o;
       }},
      {"deterministic energy law", [] {
         Outcome o;
         const RunReport r = run("energy_law.cfg", "energy_law");
         require(o, r, "energy-nonincreasing", {"max_energy_increase"});
         require(o, r, "dissipation-identity-first-order", {"ratio"});
         return o;
       }},
      {"Ito energy balance", [] {
         Outcome o;
         require(o, run("ito_balance.cfg", "ito"), "ito-balance", {"paths", "worst_z"});
         return o;
       }},
      {"uniform moment estimate", [] {
         Outcome o;
         const RunReport r = run("moments.cfg", "moments");
         require(o, r, "moment-bound");
         require(o, r, "uniform-in-n", {"n", "n_prime", "sup_energy_gap", "sup_energy_tolerance"});
         require(o, r, "uniform-in-alpha", {"sup_energy_gap", "sup_energy_tolerance"});
         return o;
       }},
      {"alpha sweep", [] {
         Outcome o;
         const RunReport r = run("alpha_sweep.cfg", "alpha_sweep");
         require(o, r, "stabilizer-decreasing");
         require(o, r, "reference-distance-decreasing");
         return o;
       }},
      {"pressure recovery", [] {
         Outcome o;
         const RunReport r = run("pressure.cfg", "pressure");
         require(o, r, "taylor-green", {"max_error"});
         require(o, r, "recombination", {"max_residual"});
         require(o, r, "stochastic-linearity");
         return o;
       }},
      {"Bogovskii refinement", [] {
         Outcome o;
         const RunReport r = run("bogovskii.cfg", "bogovskii");
         require(o, r, "residual-decreasing");
         require(o, r, "gradient-bounded", {"constant"});
         return o;
       }},
      {"weak-form residual", [] {
         Outcome o;
         const RunReport r = run("simulate.cfg", "weak_form");
         require(o, r, "weak-form", {"relative"});
         require(o, r, "weak-form-sensitivity", {"ratio"});
         return o;
       }},
      {"twin-path uniqueness", [] {
         Outcome o;
         const RunReport r = run("uniqueness.cfg", "twin");
         require(o, r, "twin-identical");
         require(o, r, "gronwall-bound", {"C", "mean_ratio"});
         require(o, r, "gronwall-constant-stable", {"factor"});
         return o;
       }},
      {"reproducibility", [] {
         Outcome o;
         int files = 0;
         for (const auto& [cfg, extra] : std::vector<std::pair<std::string, std::vector<std::string>>>{
                  {"simulate.cfg", {}}, {"ito_balance.cfg", {"paths=40"}}}) {
           const std::string tag = fs::path(cfg).stem().string();
           run(cfg, "repro_" + tag + "_1", extra, 1);
           run(cfg, "repro_" + tag + "_3", extra, 3);
           std::string why;
           if (!same_tree(g_work / ("repro_" + tag + "_1"), g_work / ("repro_" + tag + "_3"), why, files)) {
             o.pass = false;
             o.detail += " differs:" + tag + "/" + why;
           }
         }
         o.detail += " files_compared=" + std::to_string(files) + " threads=1,3";
         return o;
       }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string(" error: ") + e.what();
    }
    failed += !o.pass;
    std::printf("criterion %2zu %s: %s |%s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
