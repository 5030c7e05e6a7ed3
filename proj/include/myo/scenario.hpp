#pragma once

#include "myo/types.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace myo {

// Scripted closed-loop run: plant + reflex stack + optional EKF estimation and
// schema-based anomaly detection, driven by a JSON timeline. Writes telemetry
// CSV and a summary JSON into out_dir; unknown config keys are rejected.
struct ScenarioResult {
  nlohmann::json summary;
  std::string telemetry_path;
  std::string summary_path;
};

ScenarioResult run_scenario(const nlohmann::json& config, const std::string& base_dir,
                            const std::string& out_dir);

ScenarioResult run_scenario_file(const std::string& scenario_path, const std::string& out_dir);

// Dotted-key override ("sim.dt=0.0005") applied to a JSON tree. Values parse
// as JSON when possible, else as strings.
void apply_override(nlohmann::json& root, const std::string& dotted_key, const std::string& value);

}  // namespace myo
