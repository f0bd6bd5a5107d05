#include "sharedctl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "sharedctl/errors.hpp"
#include "sharedctl/log_io.hpp"
#include "sharedctl/rng.hpp"

namespace sharedctl {

namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (alpha_levels.empty()) throw ConfigError("at least one alpha level is required");
  for (double a : alpha_levels) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("alpha levels must lie in [0, 1]");
  }
  if (operators.empty()) throw ConfigError("at least one operator profile is required");
  for (const OperatorProfile& op : operators) {
    if (op.goal_switch_tick.has_value() != op.switched_grasp_id.has_value()) {
      throw ConfigError("operator '" + op.name + "': goal_switch_tick and switched_grasp_id go together");
    }
    if (!(op.beta_op >= 0.0)) throw ConfigError("operator '" + op.name + "': beta_op must be >= 0");
    if (!(op.p_idle_when_helped >= 0.0 && op.p_idle_when_helped <= 1.0)) {
      throw ConfigError("operator '" + op.name + "': p_idle_when_helped must lie in [0, 1]");
    }
  }
  if (max_failures_per_object < 1) throw ConfigError("max_failures_per_object must be >= 1");
  loop.validate();
}

ExperimentConfig experiment_from_json(const json& j, const fs::path& base_dir) {
  try {
    ExperimentConfig c;
    fs::path scenario = j.at("scenario").get<std::string>();
    c.scenario_path = scenario.is_relative() && !base_dir.empty() ? base_dir / scenario : scenario;
    if (j.contains("alpha_levels")) c.alpha_levels = j.at("alpha_levels").get<std::vector<double>>();
    json loop = j.value("loop", json::object());
    if (j.contains("hmm")) loop["hmm"] = j.at("hmm");
    if (j.contains("controller")) loop["controller"] = j.at("controller");
    if (j.contains("max_ticks")) loop["max_ticks"] = j.at("max_ticks");
    c.loop = loop_config_from_json(loop);
    if (j.contains("operators")) {
      c.operators.clear();
      for (const json& jo : j.at("operators")) {
        OperatorProfile p;
        p.name = jo.value("name", p.name);
        p.beta_op = jo.value("beta_op", p.beta_op);
        p.p_idle_when_helped = jo.value("p_idle_when_helped", p.p_idle_when_helped);
        if (jo.contains("goal_switch_tick")) p.goal_switch_tick = jo.at("goal_switch_tick").get<std::uint64_t>();
        if (jo.contains("switched_grasp_id")) p.switched_grasp_id = jo.at("switched_grasp_id").get<std::string>();
        c.operators.push_back(std::move(p));
      }
    }
    c.repetitions = j.value("repetitions", c.repetitions);
    c.seed = j.value("seed", c.seed);
    c.max_failures_per_object = j.value("max_failures_per_object", c.max_failures_per_object);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment: ") + e.what());
  }
}

ExperimentConfig load_experiment(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("experiment file " + path.string() + ": " + e.what());
  }
  return experiment_from_json(j, path.parent_path());
}

json experiment_to_json(const ExperimentConfig& c) {
  json ops = json::array();
  for (const OperatorProfile& p : c.operators) {
    json jo = {{"name", p.name}, {"beta_op", p.beta_op}, {"p_idle_when_helped", p.p_idle_when_helped}};
    if (p.goal_switch_tick) jo["goal_switch_tick"] = *p.goal_switch_tick;
    if (p.switched_grasp_id) jo["switched_grasp_id"] = *p.switched_grasp_id;
    ops.push_back(std::move(jo));
  }
  return {{"scenario", c.scenario_path.string()},
          {"alpha_levels", c.alpha_levels},
          {"loop", to_json(c.loop)},
          {"operators", std::move(ops)},
          {"repetitions", c.repetitions},
          {"seed", c.seed},
          {"max_failures_per_object", c.max_failures_per_object}};
}

std::uint64_t episode_seed(std::uint64_t experiment_seed, std::size_t operator_index,
                           std::uint32_t repetition, std::size_t goal, std::uint32_t attempt) {
  return derive_seed(experiment_seed, {operator_index, repetition, goal, attempt});
}

namespace {

std::vector<EpisodeLog> round_impl(const Scenario& scenario, const LoopConfig& config,
                                   const OperatorProfile& profile, std::size_t operator_index,
                                   std::uint64_t experiment_seed, std::uint32_t repetition,
                                   std::uint32_t max_failures) {
  std::vector<EpisodeLog> logs;
  for (std::size_t g = 0; g < scenario.goal_count(); ++g) {
    const Goal& goal = scenario.goals()[g];
    OperatorConfig op;
    op.intended_grasp_id = goal.grasps[repetition % goal.grasps.size()].id;
    op.beta_op = profile.beta_op;
    op.p_idle_when_helped = profile.p_idle_when_helped;
    op.goal_switch_tick = profile.goal_switch_tick;
    op.switched_grasp_id = profile.switched_grasp_id;

    EpisodeOptions options;
    options.operator_name = profile.name;
    options.repetition = repetition;
    options.target_goal_id = profile.switched_grasp_id
                                 ? scenario.grasp(scenario.state_index(*profile.switched_grasp_id)).goal_id
                                 : goal.id;
    std::uint32_t failures = 0;
    for (std::uint32_t attempt = 0;; ++attempt) {
      options.attempt = attempt;
      const std::uint64_t seed = episode_seed(experiment_seed, operator_index, repetition, g, attempt);
      logs.push_back(run_episode(scenario, config, op, seed, options));
      if (logs.back().outcome.kind == OutcomeKind::Success) break;
      if (++failures >= max_failures) {
        EpisodeLog skipped;
        skipped.header = make_header(scenario, config, g, options);
        skipped.header.operator_config = op;
        skipped.outcome = Outcome{OutcomeKind::Skipped, "", 0};
        logs.push_back(std::move(skipped));
        break;
      }
    }
  }
  return logs;
}

}  // namespace

std::vector<EpisodeLog> run_round(const Scenario& scenario, const LoopConfig& config,
                                  const OperatorProfile& profile, const RoundOptions& options) {
  return round_impl(scenario, config, profile, 0, options.seed, options.repetition,
                    options.max_failures_per_object);
}

std::vector<EpisodeLog> run_experiment(const ExperimentConfig& config, const Scenario& scenario,
                                       unsigned jobs) {
  config.validate();
  struct Task {
    std::size_t alpha;
    std::size_t op;
    std::uint32_t rep;
  };
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < config.alpha_levels.size(); ++a) {
    for (std::size_t o = 0; o < config.operators.size(); ++o) {
      for (std::uint32_t r = 0; r < config.repetitions; ++r) tasks.push_back({a, o, r});
    }
  }
  // Resolve ids up front so a bad profile fails before any thread starts.
  for (const OperatorProfile& op : config.operators) {
    if (op.switched_grasp_id) scenario.state_index(*op.switched_grasp_id);
  }

  std::vector<std::vector<EpisodeLog>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        const Task& t = tasks[i];
        LoopConfig loop = config.loop;
        loop.controller.alpha = config.alpha_levels[t.alpha];
        results[i] = round_impl(scenario, loop, config.operators[t.op], t.op, config.seed, t.rep,
                                config.max_failures_per_object);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size())));
  std::vector<std::jthread> threads;
  for (unsigned t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  threads.clear();
  if (failure) std::rethrow_exception(failure);

  std::vector<EpisodeLog> logs;
  for (auto& batch : results) {
    for (auto& log : batch) logs.push_back(std::move(log));
  }
  return logs;
}

std::string log_file_name(const EpisodeLog& log, std::size_t index) {
  char prefix[32];
  std::snprintf(prefix, sizeof prefix, "%06zu", index);
  char alpha[32];
  std::snprintf(alpha, sizeof alpha, "%.4f", log.header.loop.controller.alpha);
  return std::string(prefix) + "_a" + alpha + "_" + log.header.operator_name + "_r" +
         std::to_string(log.header.repetition) + "_" + log.header.target_goal_id + "_t" +
         std::to_string(log.header.attempt) + ".jsonl";
}

void write_experiment_outputs(const fs::path& out_dir, const ExperimentConfig& config,
                              std::span<const EpisodeLog> logs) {
  const fs::path log_dir = out_dir / "logs";
  fs::create_directories(log_dir);
  for (std::size_t i = 0; i < logs.size(); ++i) save_log(log_dir / log_file_name(logs[i], i), logs[i]);

  const std::vector<SummaryRow> rows = summarize(logs);
  std::ofstream csv(out_dir / "summary.csv", std::ios::binary);
  write_summary_csv(csv, rows);
  std::ofstream summary(out_dir / "summary.json", std::ios::binary);
  summary << summary_to_json(rows).dump(2) << '\n';
  std::ofstream exp(out_dir / "experiment.json", std::ios::binary);
  exp << experiment_to_json(config).dump(2) << '\n';
}

std::vector<EpisodeLog> load_logs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<EpisodeLog> logs;
  logs.reserve(files.size());
  for (const fs::path& f : files) logs.push_back(load_log(f));
  return logs;
}

}  // namespace sharedctl
