#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sharedctl/episode.hpp"
#include "sharedctl/metrics.hpp"

namespace sharedctl {

/// A simulated-operator behaviour. The intended grasp is chosen per object by
/// the round (cycling through the object's grasps by repetition) unless fixed.
struct OperatorProfile {
  std::string name = "operator";
  double beta_op = 5.0;
  double p_idle_when_helped = 0.0;
  std::optional<std::uint64_t> goal_switch_tick;
  std::optional<std::string> switched_grasp_id;
};

struct ExperimentConfig {
  std::filesystem::path scenario_path;
  std::vector<double> alpha_levels{0.0, 0.25, 0.5, 0.99};
  LoopConfig loop;  // controller.alpha is overridden per level
  std::vector<OperatorProfile> operators{OperatorProfile{}};
  std::uint32_t repetitions = 1;
  std::uint64_t seed = 0;
  std::uint32_t max_failures_per_object = 4;

  /// Throws ConfigError.
  void validate() const;
};

/// Relative scenario paths resolve against the config file's directory.
ExperimentConfig load_experiment(const std::filesystem::path& path);
ExperimentConfig experiment_from_json(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir = {});
nlohmann::json experiment_to_json(const ExperimentConfig& config);

struct RoundOptions {
  std::uint64_t seed = 0;
  std::uint32_t repetition = 0;
  std::uint32_t max_failures_per_object = 4;
};

/// One grasp of every object, in scenario order. A timed-out object is retried
/// until it has failed max_failures_per_object times, after which a Skipped
/// entry is appended and the round moves on. Every attempt's log is returned.
std::vector<EpisodeLog> run_round(const Scenario& scenario, const LoopConfig& config,
                                  const OperatorProfile& profile, const RoundOptions& options);

/// Seed for one attempt. Alpha is deliberately not part of the path, so every
/// arbitration level sees the same operator random streams.
std::uint64_t episode_seed(std::uint64_t experiment_seed, std::size_t operator_index,
                           std::uint32_t repetition, std::size_t goal, std::uint32_t attempt);

/// All alpha x operator x repetition rounds, spread over `jobs` threads.
/// Output order is independent of `jobs`.
std::vector<EpisodeLog> run_experiment(const ExperimentConfig& config, const Scenario& scenario,
                                       unsigned jobs = 1);

/// File name for a log within an output directory; unique within an experiment.
std::string log_file_name(const EpisodeLog& log, std::size_t index);

/// Writes logs/<name>.jsonl, summary.csv, summary.json and experiment.json.
void write_experiment_outputs(const std::filesystem::path& out_dir, const ExperimentConfig& config,
                              std::span<const EpisodeLog> logs);

/// Loads every *.jsonl log under dir, sorted by file name.
std::vector<EpisodeLog> load_logs(const std::filesystem::path& dir);

}  // namespace sharedctl
