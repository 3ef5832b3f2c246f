#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rrmlab/offline.hpp"
#include "rrmlab/online.hpp"
#include "rrmlab/scenario.hpp"

namespace rrm {

struct DatasetConfig {
    std::uint64_t n_transitions = 1000000;
    std::uint64_t env_seed = 7;
    std::uint64_t policy_seed = 11;
    std::uint64_t mix_seed = 13;
};

/// Full experiment configuration; the on-disk form is a JSON object with the sections
/// env, radio, metric, policies, online, offline, dataset.
struct ExperimentConfig {
    Scenario scenario;
    OnlineConfig online;
    OfflineConfig offline;
    DatasetConfig dataset;
};

nlohmann::json to_json(const EnvConfig& c);
nlohmann::json to_json(const RadioConfig& c);
nlohmann::json to_json(const ExperimentConfig& c);

/// Overlays the keys present in `j` onto the defaults; unknown sections or keys are errors.
ExperimentConfig experiment_from_json(const nlohmann::json& j);

/// Sets `section.key` in `j` from a command-line string (parsed as JSON when possible).
void apply_override(nlohmann::json& j, const std::string& dotted_path, const std::string& value);

/// Reads a config file (empty path = defaults) and applies overrides in order.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides = {});

}  // namespace rrm
