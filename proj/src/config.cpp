#include "pslab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "pslab/csv.hpp"
#include "pslab/errors.hpp"

namespace pslab {

const std::vector<std::string>& experiments() {
  static const std::vector<std::string> e{"spectrum",  "resolvent",  "psi-scan",  "envelope",
                                          "semigroup", "coercivity", "f-compare", "audit"};
  return e;
}

Model parse_model(const std::string& s, const std::string& field) {
  if (s == "kolmogorov") return Model::kolmogorov;
  if (s == "oseen") return Model::oseen;
  throw ConfigError(field, "unknown model '" + s + "'");
}

void validate(const RunConfig& c) {
  auto need = [](bool ok, const char* field, const std::string& what) {
    if (!ok) throw ConfigError(field, what);
  };
  need(c.schema_version == kSchemaVersion, "schema_version",
       "unsupported version " + std::to_string(c.schema_version));
  need(std::find(experiments().begin(), experiments().end(), c.experiment) != experiments().end(), "experiment",
       "unknown experiment '" + c.experiment + "'");
  need(c.l != 0, "operator.l", "must be nonzero");
  need(!c.alphas.empty(), "operator.alpha", "at least one value required");
  for (double a : c.alphas) need(std::isfinite(a), "operator.alpha", "values must be finite");
  if (c.modes) need(*c.modes >= 8, "operator.modes", "must be >= 8");
  need(c.h > 0.0 && c.h <= 0.05, "operator.h", "must lie in (0, 0.05]");
  need(c.R >= 12.0, "operator.R", "must be >= 12");
  need(c.mu_min < c.mu_max, "sweep.mu_min", "must be below sweep.mu_max");
  need(c.coarse_points >= 64, "sweep.coarse_points", "must be >= 64");
  need(c.golden_tol > 0.0, "sweep.golden_tol", "must be positive");
  need(c.psi_rel_tol > 0.0, "sweep.psi_rel_tol", "must be positive");
  need(c.probes >= 1, "semigroup.probes", "must be >= 1");
  need(c.dunford_t > 0.0, "semigroup.dunford_t", "must be positive");
  need(c.max_semigroup_modes >= 8, "semigroup.max_modes", "must be >= 8");
  need(c.kappa > 0.0 && c.kappa < 1.0, "coercivity.kappa", "must lie in (0, 1)");
  need(c.m >= 1.0, "coercivity.m", "must be >= 1");
  need(!c.mus.empty(), "coercivity.mu", "at least one value required");
  need(c.grid_decades >= 4, "coercivity.grid_decades", "must be >= 4");
  need(c.f_grid >= 2, "coercivity.f_grid", "must be >= 2");
  need(!c.out_dir.empty(), "output.dir", "must be nonempty");
  if (c.experiment == "semigroup") need(c.model == Model::kolmogorov, "model", "semigroup runs only for kolmogorov");
  if (c.model == Model::oseen && c.experiment == "coercivity") need(c.m >= 100.0, "coercivity.m", "oseen needs m >= 100");
}

namespace {

template <class T>
T get(const YAML::Node& n, const std::string& path) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, "wrong type");
  }
}

std::vector<double> get_list(const YAML::Node& n, const std::string& path) {
  if (n.IsScalar()) return {get<double>(n, path)};
  if (!n.IsSequence()) throw ConfigError(path, "expected a number or a list");
  std::vector<double> v;
  for (std::size_t i = 0; i < n.size(); ++i) v.push_back(get<double>(n[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

void check_keys(const YAML::Node& n, const std::string& prefix, const std::set<std::string>& allowed) {
  if (!n.IsMap()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected a mapping");
  for (const auto& kv : n) {
    const std::string k = kv.first.as<std::string>();
    if (!allowed.count(k)) throw ConfigError(prefix.empty() ? k : prefix + "." + k, "unknown key");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<file>", std::string("YAML parse error: ") + e.what());
  }
  RunConfig c;
  if (root.IsNull()) throw ConfigError("schema_version", "missing");
  check_keys(root, "", {"schema_version", "experiment", "model", "seed", "operator", "sweep", "semigroup",
                        "coercivity", "output"});
  if (!root["schema_version"]) throw ConfigError("schema_version", "missing");
  c.schema_version = get<int>(root["schema_version"], "schema_version");
  if (root["experiment"]) c.experiment = get<std::string>(root["experiment"], "experiment");
  if (root["model"]) c.model = parse_model(get<std::string>(root["model"], "model"));
  if (root["seed"]) c.seed = get<std::uint64_t>(root["seed"], "seed");
  if (auto op = root["operator"]) {
    check_keys(op, "operator", {"l", "alpha", "modes", "h", "R"});
    if (op["l"]) c.l = get<int>(op["l"], "operator.l");
    if (op["alpha"]) c.alphas = get_list(op["alpha"], "operator.alpha");
    if (op["modes"]) {
      const auto s = get<std::string>(op["modes"], "operator.modes");
      if (s == "auto") c.modes.reset();
      else c.modes = get<int>(op["modes"], "operator.modes");
    }
    if (op["h"]) c.h = get<double>(op["h"], "operator.h");
    if (op["R"]) c.R = get<double>(op["R"], "operator.R");
  }
  if (auto s = root["sweep"]) {
    check_keys(s, "sweep", {"mu_min", "mu_max", "coarse_points", "golden_tol", "psi_rel_tol"});
    if (s["mu_min"]) c.mu_min = get<double>(s["mu_min"], "sweep.mu_min");
    if (s["mu_max"]) c.mu_max = get<double>(s["mu_max"], "sweep.mu_max");
    if (s["coarse_points"]) c.coarse_points = get<int>(s["coarse_points"], "sweep.coarse_points");
    if (s["golden_tol"]) c.golden_tol = get<double>(s["golden_tol"], "sweep.golden_tol");
    if (s["psi_rel_tol"]) c.psi_rel_tol = get<double>(s["psi_rel_tol"], "sweep.psi_rel_tol");
  }
  if (auto s = root["semigroup"]) {
    check_keys(s, "semigroup", {"probes", "dunford_t", "max_modes"});
    if (s["probes"]) c.probes = get<int>(s["probes"], "semigroup.probes");
    if (s["dunford_t"]) c.dunford_t = get<double>(s["dunford_t"], "semigroup.dunford_t");
    if (s["max_modes"]) c.max_semigroup_modes = get<int>(s["max_modes"], "semigroup.max_modes");
  }
  if (auto s = root["coercivity"]) {
    check_keys(s, "coercivity", {"kappa", "m", "mu", "grid_decades", "f_grid"});
    if (s["kappa"]) c.kappa = get<double>(s["kappa"], "coercivity.kappa");
    if (s["m"]) c.m = get<double>(s["m"], "coercivity.m");
    if (s["mu"]) c.mus = get_list(s["mu"], "coercivity.mu");
    if (s["grid_decades"]) c.grid_decades = get<int>(s["grid_decades"], "coercivity.grid_decades");
    if (s["f_grid"]) c.f_grid = get<int>(s["f_grid"], "coercivity.f_grid");
  }
  if (auto s = root["output"]) {
    check_keys(s, "output", {"dir", "csv", "json", "svg"});
    if (s["dir"]) c.out_dir = get<std::string>(s["dir"], "output.dir");
    if (s["csv"]) c.csv = get<bool>(s["csv"], "output.csv");
    if (s["json"]) c.json = get<bool>(s["json"], "output.json");
    if (s["svg"]) c.svg = get<bool>(s["svg"], "output.svg");
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    throw ConfigError("--config", "cannot read " + path.string());
  }
  return parse_config(text);
}

namespace {

std::string num(double x) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", x);
  std::string s = b;
  // Keep YAML from reading integral doubles back as ints; both parse as double.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + "]";
}

std::string dump_impl(const RunConfig& c, bool with_location) {
  std::string o;
  auto kv = [&o](const std::string& indent, const std::string& k, const std::string& v) {
    o += indent + k + ": " + v + "\n";
  };
  auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  kv("", "schema_version", std::to_string(c.schema_version));
  kv("", "experiment", c.experiment);
  kv("", "model", to_string(c.model));
  kv("", "seed", std::to_string(c.seed));
  o += "operator:\n";
  kv("  ", "l", std::to_string(c.l));
  kv("  ", "alpha", list(c.alphas));
  kv("  ", "modes", c.modes ? std::to_string(*c.modes) : "auto");
  kv("  ", "h", num(c.h));
  kv("  ", "R", num(c.R));
  o += "sweep:\n";
  kv("  ", "mu_min", num(c.mu_min));
  kv("  ", "mu_max", num(c.mu_max));
  kv("  ", "coarse_points", std::to_string(c.coarse_points));
  kv("  ", "golden_tol", num(c.golden_tol));
  kv("  ", "psi_rel_tol", num(c.psi_rel_tol));
  o += "semigroup:\n";
  kv("  ", "probes", std::to_string(c.probes));
  kv("  ", "dunford_t", num(c.dunford_t));
  kv("  ", "max_modes", std::to_string(c.max_semigroup_modes));
  o += "coercivity:\n";
  kv("  ", "kappa", num(c.kappa));
  kv("  ", "m", num(c.m));
  kv("  ", "mu", list(c.mus));
  kv("  ", "grid_decades", std::to_string(c.grid_decades));
  kv("  ", "f_grid", std::to_string(c.f_grid));
  o += "output:\n";
  if (with_location) kv("  ", "dir", "\"" + c.out_dir + "\"");
  kv("  ", "csv", b(c.csv));
  kv("  ", "json", b(c.json));
  kv("  ", "svg", b(c.svg));
  return o;
}

}  // namespace

std::string dump_config(const RunConfig& c) { return dump_impl(c, true); }

void apply_overrides(RunConfig& c, const CliOverrides& o) {
  if (o.experiment) c.experiment = *o.experiment;
  if (o.model) c.model = parse_model(*o.model, "--model");
  if (o.alphas) c.alphas = *o.alphas;
  if (o.l) c.l = *o.l;
  if (o.modes) c.modes = *o.modes;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.svg) c.svg = *o.svg;
  if (o.seed) c.seed = *o.seed;
  validate(c);
}

std::string config_hash(const RunConfig& c) {
  const std::string text = dump_impl(c, false);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

}  // namespace pslab
