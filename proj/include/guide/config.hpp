#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "guide/sim.hpp"

namespace guide::config {

struct RunConfig {
  std::vector<std::string> scenes;  // as written; relative paths resolve against base_dir
  std::vector<sim::Method> methods{sim::Method::Planner, sim::Method::LeadOnly};
  std::size_t trials = 50;
  std::uint64_t seed_base = 1;
  std::string output_dir = "results";
  sim::SimConfig sim;
  std::filesystem::path base_dir;  // not serialized

  std::vector<std::filesystem::path> scene_paths() const;
  void validate() const;
};

/// Every tunable, addressable by name.
const std::vector<std::string>& parameter_names();
nlohmann::json get_parameter(const sim::SimConfig& cfg, std::string_view name);
void set_parameter(sim::SimConfig& cfg, std::string_view name, const nlohmann::json& value);
/// Applies "name=value" where value is parsed as JSON, or taken as a string when it does not parse.
void apply_override(sim::SimConfig& cfg, std::string_view assignment);

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace guide::config
