#pragma once

// Declarative run configuration (YAML). Precedence, lowest to highest:
// built-in defaults, the config file, command-line flags.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pslab/resolvent_lab.hpp"

namespace pslab {

constexpr int kSchemaVersion = 1;

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::string experiment = "spectrum";
  Model model = Model::kolmogorov;

  // operator
  int l = 1;
  std::vector<double> alphas{1e4};
  std::optional<int> modes;  ///< unset: sizing rule
  double h = 0.01;
  double R = 16.0;

  // sweep
  double mu_min = -1.5;
  double mu_max = 1.5;
  int coarse_points = 129;
  double golden_tol = 1e-4;
  double psi_rel_tol = 1e-3;

  // semigroup
  int probes = 3;
  double dunford_t = 0.2;
  int max_semigroup_modes = 1024;

  // coercivity and F machinery
  double kappa = 0.5;
  double m = 100.0;
  std::vector<double> mus{0.0, 0.5, 0.9, 1.0, 1.1};
  int grid_decades = 4;
  int f_grid = 20;

  // output
  std::string out_dir = "out";
  bool csv = true;
  bool json = true;
  bool svg = false;
  std::uint64_t seed = 1;

  bool operator==(const RunConfig&) const = default;
};

/// Flags that override file keys.
struct CliOverrides {
  std::optional<std::string> experiment;
  std::optional<std::string> model;
  std::optional<std::vector<double>> alphas;
  std::optional<int> l;
  std::optional<int> modes;
  std::optional<std::string> out_dir;
  std::optional<bool> svg;
  std::optional<std::uint64_t> seed;
};

const std::vector<std::string>& experiments();

Model parse_model(const std::string& s, const std::string& field = "model");

/// Throws ConfigError naming the offending field path.
void validate(const RunConfig& c);

RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::filesystem::path& path);
std::string dump_config(const RunConfig& c);

void apply_overrides(RunConfig& c, const CliOverrides& o);

/// SHA-256 of the canonical serialization with output-location keys removed,
/// so the same experiment hashes identically wherever it is written.
std::string config_hash(const RunConfig& c);

}  // namespace pslab
