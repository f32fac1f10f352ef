#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fnls/newton.hpp"

namespace fnls {

struct RunConfig {
  ProblemParams problem;
  std::vector<double> omegas;  // tracked frequencies
  ScaleConstants constants;
  DriverOptions driver;
  std::vector<double> sweep_epsilons;
  int sweep_stages = 3;
  int collocation_grid = 0;
  double verify_tolerance = 1e-9;
  std::string output_dir = "fnls_out";
  uint64_t seed = 0x5eed;
  nlohmann::json echo;  // fully resolved configuration
};

// Every accepted key with its default value.
nlohmann::json default_config();

// Applies "dotted.path=value"; the value is parsed as JSON, else kept as a string.
void apply_override(nlohmann::json& cfg, const std::string& assignment);

// Merges `user` over the defaults, rejecting unknown keys and bad types with a
// path in the message (ConfigError).
RunConfig parse_config(const nlohmann::json& user);
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});
RunConfig config_from_text(const std::string& text, const std::vector<std::string>& overrides = {});

}  // namespace fnls
