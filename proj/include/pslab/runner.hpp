#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "pslab/config.hpp"

namespace pslab {

std::string toolkit_version();

struct RunOptions {
  bool no_cache = false;
};

struct ResultRecord {
  std::string config_hash;
  std::string version;
  double wall_time = 0.0;
  bool from_cache = false;
  nlohmann::json payload;
  /// Output files (name -> contents) as written under the output directory.
  std::map<std::string, std::string> files;
};

/// Runs one experiment. Outputs land in config.out_dir; results are cached
/// under out_dir/.cache/<hash>. Holds an exclusive lock on out_dir/.lock for
/// the duration of the run.
ResultRecord run(const RunConfig& config, const RunOptions& opt = {});

/// 0 success, 2 configuration error, 3 numerical failure.
int exit_code_for(const std::exception& e);

}  // namespace pslab
