#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "config.hpp"
#include "experiments.hpp"
#include "nsv/error.hpp"

using namespace nsv;
using namespace nsv::app;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text, const std::vector<std::string>& ov = {}) {
  try {
    parse_config(text, ov);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nsv_app_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, DefaultsAreValid) {
  const SimConfig c = parse_config("");
  EXPECT_EQ(c.experiment, Experiment::simulate);
  EXPECT_EQ(c.steps, 100);
}

TEST(Config, ParsesSectionsAndComments) {
  const SimConfig c = parse_config(
      "# comment\nexperiment = moments\np = 3\nnoise.family = saturating\nnoise.amplitude=0.25\nnoise.modes = 6\n"
      "ic.kind = taylor_green\nsweep.alphas = 0.5, 0.25\ngamma = 4\n");
  EXPECT_EQ(c.experiment, Experiment::moments);
  EXPECT_DOUBLE_EQ(c.scenario.params.p, 3.0);
  EXPECT_EQ(c.scenario.noise.family, NoiseFamily::saturating);
  EXPECT_EQ(c.scenario.noise.modes, 6);
  EXPECT_EQ(c.scenario.ic.kind, InitialKind::taylor_green);
  EXPECT_EQ(c.sweep_alphas, (std::vector<double>{0.5, 0.25}));
  EXPECT_DOUBLE_EQ(c.gamma, 4.0);
}

TEST(Config, QConstraintInactiveAtZeroAlpha) { EXPECT_EQ(error_of("p = 2\nq = 3\nalpha = 0\n"), ""); }

TEST(Config, RejectsPBelowOneCitingCondition) {
  EXPECT_NE(error_of("p = 0.9\n").find("power-law index condition"), std::string::npos);
}

TEST(Config, RejectsInsufficientStabilizerExponent) {
  const std::string e = error_of("p = 1.5\nalpha = 0.1\nq = 5\n");
  EXPECT_NE(e.find("max{2p', 3} = 6"), std::string::npos) << e;
}

TEST(Config, UnknownKeyNamesLocation) {
  const std::string e = error_of("p = 2\nbogus = 1\n");
  EXPECT_NE(e.find("bogus"), std::string::npos);
  EXPECT_NE(e.find(":2"), std::string::npos) << e;
  EXPECT_NE(error_of("", {"noise.colour=red"}).find("noise.colour"), std::string::npos);
}

TEST(Config, StepsDtHorizonConsistency) {
  EXPECT_NE(error_of("dt = 0.01\nT = 1\nsteps = 99\n").find("step count condition"), std::string::npos);
  EXPECT_NE(error_of("dt = 0.3\nT = 1\n").find("step count condition"), std::string::npos);
  const SimConfig c = parse_config("dt = 0.01\nsteps = 50\n");
  EXPECT_DOUBLE_EQ(c.scenario.T, 0.5);
  const SimConfig d = parse_config("T = 2\nsteps = 40\n");
  EXPECT_DOUBLE_EQ(d.scenario.dt, 0.05);
}

TEST(Config, GammaBelowTwoRejected) {
  EXPECT_NE(error_of("gamma = 1.5\n").find("moment exponent condition"), std::string::npos);
}

TEST(Config, OverridesWinOverFile) {
  const SimConfig c = parse_config("seed = 3\nnu = 0.1\n", {"seed=9", "nu = 0.2"});
  EXPECT_EQ(c.scenario.seed, 9u);
  EXPECT_DOUBLE_EQ(c.scenario.params.nu, 0.2);
  EXPECT_EQ(c.echo.at("seed"), "9");
}

TEST(Config, MalformedValuesRejected) {
  EXPECT_NE(error_of("p = abc\n").find("'p'"), std::string::npos);
  EXPECT_NE(error_of("pin_mean = maybe\n").find("pin_mean"), std::string::npos);
  EXPECT_NE(error_of("novalue\n").find("key=value"), std::string::npos);
  EXPECT_NE(error_of("experiment = dance\n").find("unknown experiment"), std::string::npos);
  EXPECT_NE(error_of("grid = 48\n").find("power of two"), std::string::npos);
}

TEST(Config, MissingFileIsReported) { EXPECT_THROW(load_config("/nonexistent/nsv.cfg"), ConfigError); }

TEST(Config, ExperimentNamesRoundTrip) {
  for (const auto& n : experiment_names()) EXPECT_EQ(to_string(parse_experiment(n)), n);
  EXPECT_EQ(parse_experiment("energy-audit"), Experiment::energy_audit);
}

TEST(Format, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(RunExperiment, ZeroInitialDataNoNoiseGivesZeroTrajectory) {
  const SimConfig c = parse_config("experiment = simulate\nic.kind = zero\nn_modes = 16\ngrid = 16\ndt = 0.01\nT = 0.1\n");
  const fs::path out = scratch("zero");
  const RunReport rep = run_experiment(c, out.string(), 1);
  EXPECT_TRUE(rep.passed());
  for (const auto& cr : rep.criteria) EXPECT_FALSE(cr.invariant.empty()) << cr.name;
  std::ifstream is(out / "trajectory.csv");
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("t,l2,", 0), 0u);
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_NE(line.find(",0,0,"), std::string::npos) << line;
  }
  EXPECT_EQ(rows, 11);
  EXPECT_TRUE(fs::exists(out / "report.json"));
  EXPECT_TRUE(fs::exists(out / "fields" / "u_final.bin"));
  EXPECT_EQ(slurp(out / "report.json").find("wall_seconds"), std::string::npos);
}

TEST(RunExperiment, ReportJsonCarriesCriteriaAndConfig) {
  const SimConfig c = parse_config("experiment = simulate\nn_modes = 16\ngrid = 16\ndt = 0.01\nT = 0.05\nnu = 0.07\n");
  const fs::path out = scratch("json");
  const RunReport rep = run_experiment(c, out.string(), 2);
  const auto j = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_EQ(j["experiment"], "simulate");
  EXPECT_EQ(j["config"]["nu"], "0.07");
  EXPECT_EQ(j["criteria"].size(), rep.criteria.size());
  EXPECT_EQ(j["pass"], rep.passed());
  const auto t = nlohmann::json::parse(slurp(out / "timing.json"));
  EXPECT_EQ(t["threads"], 2);
}

TEST(RunExperiment, EulerVoigtShearSkipsUndefinedRatio) {
  const SimConfig c = parse_config(
      "experiment = energy-audit\nnu = 0\nic.kind = shear\nn_modes = 16\ngrid = 16\ndt = 0.01\nT = 0.1\n");
  const RunReport rep = run_experiment(c, scratch("shear").string(), 1);
  EXPECT_TRUE(rep.passed());
  ASSERT_NE(rep.find("conservation-first-order"), nullptr);
  EXPECT_EQ(rep.find("conservation-first-order")->status, Status::skipped);
}

TEST(RunExperiment, OutputsAreByteIdenticalAcrossThreadCounts) {
  const SimConfig c = parse_config(
      "experiment = energy-audit\nn_modes = 16\ngrid = 16\ndt = 0.01\nT = 0.1\nnoise.family = linear\n"
      "noise.amplitude = 0.5\nnoise.modes = 4\npaths = 12\noutput_every = 2\n");
  const fs::path a = scratch("t1"), b = scratch("t4");
  run_experiment(c, a.string(), 1);
  run_experiment(c, b.string(), 4);
  for (const char* f : {"report.json", "ledger.csv", "trajectory.csv", "ensemble.csv"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}
