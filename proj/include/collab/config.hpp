#pragma once

#include <collab/harness.hpp>

#include <json.hpp>

#include <string>

namespace collab {

using Json = nlohmann::json;

// Config files are JSON objects. Keys:
//   means, std_devs, correlations   model (or nested under "model")
//   alpha, E, T                     resources
//   scenario (1-3), replications, seed, threads, output
//   metric_grid                     list of slots, or {"step": n}
//   policies                        list of names ("UCB-Z", "ARM-2", "optimal")
//                                   or objects {"name", "probs" | "a" | "eta" |
//                                   "explore_until" | "level" | "arm_one_reward"}
// Any malformed or missing value raises Error(InvalidConfig).

GaussianModel model_from_json(const Json& j);
ResourceSpec resources_from_json(const Json& j);
ExperimentConfig config_from_json(const Json& j);
ExperimentConfig load_config(const std::string& path);
Json read_json_file(const std::string& path);

Json policy_to_json(const StaticPolicy& policy);
Json model_to_json(const GaussianModel& model);
Json config_to_json(const ExperimentConfig& config);

} // namespace collab
