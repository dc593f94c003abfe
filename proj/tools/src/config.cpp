#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "nsv/error.hpp"
#include "nsv/snapshot.hpp"

namespace nsv::app {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& v, const char* what) {
  throw ConfigError("invalid value '" + v + "' for key '" + key + "': expected " + what);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) bad_value(key, v, "a real number");
    return d;
  } catch (const std::logic_error&) {
    bad_value(key, v, "a real number");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (pos != v.size()) bad_value(key, v, "an integer");
    return d;
  } catch (const std::logic_error&) {
    bad_value(key, v, "an integer");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  if (v.empty() || v[0] == '-') bad_value(key, v, "a non-negative 64-bit integer");
  try {
    std::size_t pos = 0;
    const auto d = std::stoull(v, &pos);
    if (pos != v.size()) bad_value(key, v, "a non-negative 64-bit integer");
    return d;
  } catch (const std::logic_error&) {
    bad_value(key, v, "a non-negative 64-bit integer");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int to_positive(const std::string& key, const std::string& v) {
  const long long n = to_int(key, v);
  if (n < 1 || n > (1LL << 30)) bad_value(key, v, "a positive integer");
  return static_cast<int>(n);
}

// Spectral copy of f on an n-grid, keeping whatever modes the grid can hold.
SpectralField regrid(const SpectralField& f, int n) {
  if (f.grid_size() == n) return f;
  const int k = std::min(f.k_max(), (n - 2) / 2);
  SpectralField g(n, k);
  for (int kx = -k; kx <= k; ++kx)
    for (int ky = -k; ky <= k; ++ky)
      for (int c = 0; c < 2; ++c) g.at(c, kx, ky) = f.at(c, kx, ky);
  return g;
}

Forcing load_forcing(const std::string& spec, int grid) {
  if (spec.empty() || spec == "zero") return Forcing::zero();
  if (spec.rfind("file:", 0) == 0) return Forcing::constant(regrid(read_snapshot(spec.substr(5)), grid));
  if (spec.rfind("sequence:", 0) == 0) {
    const std::string rest = spec.substr(9);
    std::vector<std::string> files;
    namespace fs = std::filesystem;
    if (fs::is_directory(rest)) {
      for (const auto& e : fs::directory_iterator(rest))
        if (e.is_regular_file() && e.path().extension() == ".bin") files.push_back(e.path().string());
      std::sort(files.begin(), files.end());
    } else {
      files = split_list(rest);
    }
    if (files.empty()) throw ConfigError("forcing sequence '" + rest + "' names no snapshot files");
    std::vector<SpectralField> fs_;
    for (const auto& f : files) fs_.push_back(regrid(read_snapshot(f), grid));
    return Forcing::sequence(std::move(fs_));
  }
  throw ConfigError("invalid forcing spec '" + spec + "': expected zero, file:PATH or sequence:DIR|PATH,PATH,...");
}

using Setter = std::function<void(SimConfig&, const std::string& key, const std::string& value)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"experiment", [](SimConfig& c, auto&, auto& v) { c.experiment = parse_experiment(v); }},
      {"p", [](SimConfig& c, auto& k, auto& v) { c.scenario.params.p = to_double(k, v); }},
      {"q", [](SimConfig& c, auto& k, auto& v) { c.scenario.params.q = to_double(k, v); }},
      {"nu", [](SimConfig& c, auto& k, auto& v) { c.scenario.params.nu = to_double(k, v); }},
      {"kappa", [](SimConfig& c, auto& k, auto& v) { c.scenario.params.kappa = to_double(k, v); }},
      {"alpha", [](SimConfig& c, auto& k, auto& v) { c.scenario.params.alpha = to_double(k, v); }},
      {"n_modes", [](SimConfig& c, auto& k, auto& v) { c.scenario.n_modes = to_positive(k, v); }},
      {"grid", [](SimConfig& c, auto& k, auto& v) { c.scenario.grid = to_positive(k, v); }},
      {"pin_mean", [](SimConfig& c, auto& k, auto& v) { c.scenario.pin_mean = to_bool(k, v); }},
      {"convection", [](SimConfig& c, auto& k, auto& v) { c.scenario.convection = to_bool(k, v); }},
      {"dt", [](SimConfig& c, auto& k, auto& v) { c.scenario.dt = to_double(k, v); }},
      {"T", [](SimConfig& c, auto& k, auto& v) { c.scenario.T = to_double(k, v); }},
      {"steps", [](SimConfig& c, auto& k, auto& v) {
         c.steps = to_int(k, v);
         if (c.steps < 0) bad_value(k, v, "a non-negative integer");
       }},
      {"seed", [](SimConfig& c, auto& k, auto& v) { c.scenario.seed = to_u64(k, v); }},
      {"paths", [](SimConfig& c, auto& k, auto& v) { c.paths = to_positive(k, v); }},
      {"gamma", [](SimConfig& c, auto& k, auto& v) { c.gamma = to_double(k, v); }},
      {"output_every", [](SimConfig& c, auto& k, auto& v) { c.output_every = to_positive(k, v); }},
      {"stop_threshold", [](SimConfig& c, auto& k, auto& v) { c.scenario.stop_threshold = to_double(k, v); }},
      {"forcing", [](SimConfig& c, auto&, auto& v) { c.forcing_spec = v; }},
      {"noise.family", [](SimConfig& c, auto&, auto& v) { c.scenario.noise.family = parse_noise_family(v); }},
      {"noise.amplitude", [](SimConfig& c, auto& k, auto& v) { c.scenario.noise.amplitude = to_double(k, v); }},
      {"noise.modes", [](SimConfig& c, auto& k, auto& v) {
         const long long n = to_int(k, v);
         if (n < 0 || n > 1000000) bad_value(k, v, "a non-negative integer");
         c.scenario.noise.modes = static_cast<int>(n);
       }},
      {"ic.kind", [](SimConfig& c, auto&, auto& v) { c.scenario.ic.kind = parse_initial_kind(v); }},
      {"ic.amplitude", [](SimConfig& c, auto& k, auto& v) { c.scenario.ic.amplitude = to_double(k, v); }},
      {"ic.energy", [](SimConfig& c, auto& k, auto& v) { c.scenario.ic.energy = to_double(k, v); }},
      {"ic.modes", [](SimConfig& c, auto& k, auto& v) { c.scenario.ic.modes = to_positive(k, v); }},
      {"ic.seed", [](SimConfig& c, auto& k, auto& v) { c.scenario.ic.seed = to_u64(k, v); }},
      {"ic.file", [](SimConfig& c, auto&, auto& v) { c.scenario.ic.file = v; }},
      {"moments.n_prime", [](SimConfig& c, auto& k, auto& v) { c.moments_n_prime = to_positive(k, v); }},
      {"sweep.alphas", [](SimConfig& c, auto& k, auto& v) {
         c.sweep_alphas.clear();
         for (const auto& s : split_list(v)) c.sweep_alphas.push_back(to_double(k, s));
       }},
      {"twin.delta", [](SimConfig& c, auto& k, auto& v) { c.twin_delta = to_double(k, v); }},
      {"twin.calibration_samples",
       [](SimConfig& c, auto& k, auto& v) { c.twin_calibration_samples = to_positive(k, v); }},
      {"pressure.slice_every", [](SimConfig& c, auto& k, auto& v) { c.pressure_slice_every = to_positive(k, v); }},
      {"propcheck.pairs", [](SimConfig& c, auto& k, auto& v) { c.propcheck_pairs = to_positive(k, v); }},
      {"propcheck.exponents", [](SimConfig& c, auto& k, auto& v) {
         c.propcheck_exponents.clear();
         for (const auto& s : split_list(v)) c.propcheck_exponents.push_back(to_double(k, s));
       }},
      {"propcheck.fields", [](SimConfig& c, auto& k, auto& v) { c.propcheck_fields = to_positive(k, v); }},
      {"propcheck.noise_samples",
       [](SimConfig& c, auto& k, auto& v) { c.propcheck_noise_samples = to_positive(k, v); }},
      {"solvability.samples", [](SimConfig& c, auto& k, auto& v) { c.solvability_samples = to_positive(k, v); }},
      {"solvability.radius", [](SimConfig& c, auto& k, auto& v) { c.solvability_radius = to_double(k, v); }},
      {"bogovskii.resolutions", [](SimConfig& c, auto& k, auto& v) {
         c.bogovskii_resolutions.clear();
         for (const auto& s : split_list(v)) c.bogovskii_resolutions.push_back(to_positive(k, s));
       }},
      {"bogovskii.count", [](SimConfig& c, auto& k, auto& v) {
         const long long n = to_int(k, v);
         if (n < 0 || n > 100000) bad_value(k, v, "a non-negative integer");
         c.bogovskii_count = static_cast<int>(n);
       }},
  };
  return table;
}

void apply(SimConfig& c, const std::string& key, const std::string& value, const std::string& where) {
  for (const auto& [name, set] : setters())
    if (name == key) {
      set(c, key, value);
      c.echo[key] = value;
      return;
    }
  throw ConfigError("unknown configuration key '" + key + "'" + (where.empty() ? "" : " at " + where));
}

std::pair<std::string, std::string> split_assignment(const std::string& line, const std::string& where) {
  const auto eq = line.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value at " + where + ", got '" + line + "'");
  const std::string key = trim(line.substr(0, eq));
  if (key.empty()) throw ConfigError("empty key at " + where);
  return {key, trim(line.substr(eq + 1))};
}

void finalize(SimConfig& c) {
  auto& sc = c.scenario;
  const bool has_dt = c.echo.count("dt") > 0, has_T = c.echo.count("T") > 0, has_steps = c.echo.count("steps") > 0;
  if (has_steps && has_dt && !has_T) sc.T = static_cast<double>(c.steps) * sc.dt;
  if (has_steps && has_T && !has_dt) {
    if (c.steps == 0) throw ConfigError("steps=0 with T given leaves dt undetermined");
    sc.dt = sc.T / static_cast<double>(c.steps);
  }
  if (!(sc.dt > 0.0)) throw ConfigError("time step must be positive");
  if (has_steps) {
    if (std::abs(static_cast<double>(c.steps) * sc.dt - sc.T) > 1e-12 * std::max(1.0, std::abs(sc.T))) {
      std::ostringstream os;
      os.precision(17);
      os << "step count condition violated: steps*dt = " << static_cast<double>(c.steps) * sc.dt << " differs from T = "
         << sc.T;
      throw ConfigError(os.str());
    }
  } else {
    c.steps = step_count(sc.T, sc.dt);
  }
  if (!(c.gamma >= 2.0)) {
    std::ostringstream os;
    os << "moment exponent condition violated: gamma=" << c.gamma << " < 2";
    throw ConfigError(os.str());
  }
  sc.params.validate();
  sc.noise.validate();
  validate_grid(sc.grid, 0);
  if (sc.ic.kind == InitialKind::file && sc.ic.file.empty()) throw ConfigError("ic.kind=file requires ic.file");
  sc.forcing = load_forcing(c.forcing_spec, sc.grid);
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"simulate", "energy-audit", "moments",   "uniqueness",
                                                 "alpha-sweep", "pressure",  "propcheck", "bogovskii"};
  return names;
}

Experiment parse_experiment(const std::string& s) {
  const auto& n = experiment_names();
  for (std::size_t i = 0; i < n.size(); ++i)
    if (n[i] == s) return static_cast<Experiment>(i);
  std::string all;
  for (const auto& x : n) all += (all.empty() ? "" : ", ") + x;
  throw ConfigError("unknown experiment '" + s + "' (expected one of " + all + ")");
}

std::string to_string(Experiment e) { return experiment_names()[static_cast<std::size_t>(e)]; }

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, set] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

SimConfig parse_config(const std::string& text, const std::vector<std::string>& overrides, const std::string& origin) {
  SimConfig c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    const auto [k, v] = split_assignment(line, where);
    apply(c, k, v, where);
  }
  for (const auto& o : overrides) {
    const auto [k, v] = split_assignment(o, "--override");
    apply(c, k, v, "--override");
  }
  finalize(c);
  return c;
}

SimConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read configuration file '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), overrides, path);
}

}  // namespace nsv::app
