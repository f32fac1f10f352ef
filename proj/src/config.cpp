#include "fnls/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fnls/field_io.hpp"

namespace fnls {

using nlohmann::json;

json default_config() {
  return {
      {"problem",
       {{"dim", 1},
        {"epsilon", 1e-4},
        {"alpha", 4e-4},
        {"omegas", {std::sqrt(2.0)}},
        {"forcing", "bundled"},
        {"gevrey", {{"c", 0.25}, {"weight_factor", 2.0}}}}},
      {"constants",
       {{"M", 2},
        {"c", 0.25},
        {"C1", 8.0},
        {"C2", 2.5},
        {"C3", 5.0},
        {"delta", 0.2},
        {"j0", nullptr},
        {"paper_faithful", false},
        {"rho", 0.25},
        {"q_measure", 2.0},
        {"neumann_max_box", 8},
        {"regime", "auto"},
        {"cell_size", 0.0}}},
      {"driver",
       {{"j_max", 6},
        {"min_advances", 3},
        {"residual_target", 1e-12},
        {"dense_oracle_max_rows", 2500},
        {"exclusion_cell_cap", 10000},
        {"lipschitz_probe", false},
        {"lipschitz_h", 1e-8},
        {"norm_dense_cap", 1024}}},
      {"sweep", {{"epsilons", {1e-3, 1e-4, 1e-5}}, {"stages", 3}}},
      {"verify", {{"grid", 0}, {"tolerance", 1e-9}}},
      {"testing", {{"nonlinearity", 1.0}}},
      {"output_dir", "fnls_out"},
      {"seed", 24301},
  };
}

namespace {

bool opaque(const std::string& path) { return path == "problem.forcing"; }

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void merge(json& into, const json& user, const std::string& path) {
  if (!user.is_object())
    throw ConfigError("config: '" + (path.empty() ? std::string("<root>") : path) + "' must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string p = join(path, key);
    if (!into.contains(key)) throw ConfigError("config: unknown key '" + p + "'");
    if (into[key].is_object() && !opaque(p))
      merge(into[key], value, p);
    else
      into[key] = value;
  }
}

const json& at(const json& cfg, const std::string& path) {
  const json* node = &cfg;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) node = &node->at(part);
  return *node;
}

double num(const json& cfg, const std::string& path) {
  const json& v = at(cfg, path);
  if (!v.is_number()) throw ConfigError("config: '" + path + "' must be a number");
  return v.get<double>();
}

int integer(const json& cfg, const std::string& path) {
  const json& v = at(cfg, path);
  if (!v.is_number_integer()) throw ConfigError("config: '" + path + "' must be an integer");
  return v.get<int>();
}

bool boolean(const json& cfg, const std::string& path) {
  const json& v = at(cfg, path);
  if (!v.is_boolean()) throw ConfigError("config: '" + path + "' must be true or false");
  return v.get<bool>();
}

std::string text(const json& cfg, const std::string& path) {
  const json& v = at(cfg, path);
  if (!v.is_string()) throw ConfigError("config: '" + path + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& cfg, const std::string& path) {
  const json& v = at(cfg, path);
  if (!v.is_array()) throw ConfigError("config: '" + path + "' must be an array of numbers");
  std::vector<double> out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      throw ConfigError("config: '" + path + "[" + std::to_string(i) + "]' must be a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError("config: '" + path + "' " + what);
}

FourierField load_forcing(const json& f, int dim) {
  FourierField P;
  if (f.is_string()) {
    const std::string s = f.get<std::string>();
    if (s == "bundled")
      P = bundled_forcing(dim);
    else if (s == "zero")
      P = FourierField(dim, 1).with_real_flag(true);
    else
      throw ConfigError("config: 'problem.forcing' must be \"bundled\", \"zero\", a field or {\"file\": path}");
  } else if (f.is_object()) {
    try {
      if (f.contains("file")) {
        if (f.size() != 1 || !f["file"].is_string())
          throw ConfigError("config: 'problem.forcing.file' must be the only key and a string");
        P = read_field(f["file"].get<std::string>());
      } else {
        P = field_from_json(f);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: 'problem.forcing': ") + e.what());
    }
  } else {
    throw ConfigError("config: 'problem.forcing' must be a string or an object");
  }
  require(P.dim() == dim, "problem.forcing", "has dimension " + std::to_string(P.dim()) +
                                                 " but problem.dim is " + std::to_string(dim));
  require(P.real_valued(), "problem.forcing", "must be flagged real_valued");
  return P;
}

}  // namespace

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not of the form path=value");
  const std::string path = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &cfg;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw ConfigError("override '" + path + "' walks through a non-object");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError("override '" + path + "' walks through a non-object");
  (*node)[parts.back()] = value;
}

RunConfig parse_config(const json& user) {
  json cfg = default_config();
  merge(cfg, user, "");
  RunConfig rc;
  rc.echo = cfg;

  ProblemParams& p = rc.problem;
  p.dim = integer(cfg, "problem.dim");
  require(p.dim >= 1 && p.dim <= kMaxSpatialDim, "problem.dim", "must lie in 1..3");
  p.epsilon = num(cfg, "problem.epsilon");
  require(p.epsilon > 0 && p.epsilon < 1, "problem.epsilon", "must lie in (0,1)");
  p.alpha = num(cfg, "problem.alpha");
  require(p.alpha >= 0 && p.alpha < 1, "problem.alpha", "must lie in [0,1)");
  rc.omegas = numbers(cfg, "problem.omegas");
  for (double w : rc.omegas) require(w >= kOmegaMin && w <= kOmegaMax, "problem.omegas", "entries must lie in [1,2]");
  p.omega = rc.omegas.empty() ? 1.5 : rc.omegas.front();
  p.gevrey.c = num(cfg, "problem.gevrey.c");
  p.gevrey.weight_factor = num(cfg, "problem.gevrey.weight_factor");
  require(p.gevrey.c > 0 && p.gevrey.c < 1, "problem.gevrey.c", "must lie in (0,1)");
  require(p.gevrey.weight_factor > 0, "problem.gevrey.weight_factor", "must be positive");
  p.forcing = load_forcing(at(cfg, "problem.forcing"), p.dim);
  p.nonlinearity = num(cfg, "testing.nonlinearity");

  ScaleConstants& sc = rc.constants;
  sc.M = integer(cfg, "constants.M");
  sc.c = num(cfg, "constants.c");
  sc.C1 = num(cfg, "constants.C1");
  sc.C2 = num(cfg, "constants.C2");
  sc.C3 = num(cfg, "constants.C3");
  sc.delta = num(cfg, "constants.delta");
  if (at(cfg, "constants.j0").is_null()) {
    sc.j0 = -1;
  } else {
    sc.j0 = integer(cfg, "constants.j0");
    require(sc.j0 >= 0, "constants.j0", "must be null or >= 0");
  }
  sc.paper_faithful = boolean(cfg, "constants.paper_faithful");
  sc.rho = num(cfg, "constants.rho");
  sc.q_measure = num(cfg, "constants.q_measure");
  sc.neumann_max_box = integer(cfg, "constants.neumann_max_box");
  const std::string regime = text(cfg, "constants.regime");
  if (regime == "auto")
    sc.regime = RegimeChoice::kAuto;
  else if (regime == "neumann")
    sc.regime = RegimeChoice::kNeumann;
  else if (regime == "multiscale")
    sc.regime = RegimeChoice::kMultiscale;
  else
    throw ConfigError("config: 'constants.regime' must be auto, neumann or multiscale");
  sc.cell_size = num(cfg, "constants.cell_size");
  try {
    sc.validate(p.dim, p.alpha);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: 'constants': ") + e.what());
  }
  if (sc.paper_faithful) {
    auto v = p.violations();
    if (!v.empty()) throw ConfigError("config: 'problem' violates the theorem hypotheses: " + v.front());
  }

  DriverOptions& d = rc.driver;
  d.j_max = integer(cfg, "driver.j_max");
  d.min_advances = integer(cfg, "driver.min_advances");
  d.residual_target = num(cfg, "driver.residual_target");
  d.dense_oracle_max_rows = static_cast<size_t>(integer(cfg, "driver.dense_oracle_max_rows"));
  d.exclusion_cell_cap = static_cast<size_t>(integer(cfg, "driver.exclusion_cell_cap"));
  d.lipschitz_probe = boolean(cfg, "driver.lipschitz_probe");
  d.lipschitz_h = num(cfg, "driver.lipschitz_h");
  d.norm.dense_cap = static_cast<size_t>(integer(cfg, "driver.norm_dense_cap"));
  require(d.j_max >= 0, "driver.j_max", "must be >= 0");
  require(d.min_advances >= 0, "driver.min_advances", "must be >= 0");
  require(d.residual_target > 0, "driver.residual_target", "must be positive");
  require(d.exclusion_cell_cap >= 1, "driver.exclusion_cell_cap", "must be >= 1");

  rc.sweep_epsilons = numbers(cfg, "sweep.epsilons");
  for (double e : rc.sweep_epsilons) require(e > 0 && e < 1, "sweep.epsilons", "entries must lie in (0,1)");
  rc.sweep_stages = integer(cfg, "sweep.stages");
  require(rc.sweep_stages >= 0, "sweep.stages", "must be >= 0");
  rc.collocation_grid = integer(cfg, "verify.grid");
  require(rc.collocation_grid >= 0, "verify.grid", "must be >= 0");
  rc.verify_tolerance = num(cfg, "verify.tolerance");
  rc.output_dir = text(cfg, "output_dir");
  const json& seed = at(cfg, "seed");
  require(seed.is_number_unsigned() || (seed.is_number_integer() && seed.get<long long>() >= 0), "seed",
          "must be a non-negative integer");
  rc.seed = seed.get<uint64_t>();
  d.norm.seed = rc.seed;
  return rc;
}

RunConfig config_from_text(const std::string& text, const std::vector<std::string>& overrides) {
  json user;
  try {
    user = text.empty() ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  for (const auto& o : overrides) apply_override(user, o);
  return parse_config(user);
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_text(ss.str(), overrides);
}

}  // namespace fnls
