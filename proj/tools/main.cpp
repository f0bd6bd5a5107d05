#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "sharedctl/errors.hpp"
#include "sharedctl/experiment.hpp"
#include "sharedctl/log_io.hpp"
#include "sharedctl/metrics.hpp"
#include "sharedctl/oracle/hmm_oracle.hpp"
#include "sharedctl/service/server.hpp"
#include "sharedctl/version.hpp"

namespace fs = std::filesystem;
using namespace sharedctl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCheckFailed = 3;

constexpr double kOracleTolerance = 1e-9;
constexpr double kOracleTimeLimit = 10.0;  // s

int cmd_run(const fs::path& experiment, const fs::path& out, unsigned jobs,
            std::optional<std::uint64_t> seed) {
  ExperimentConfig config = load_experiment(experiment);
  if (seed) config.seed = *seed;
  const Scenario scenario = load_scenario(config.scenario_path);
  const auto start = std::chrono::steady_clock::now();
  const std::vector<EpisodeLog> logs = run_experiment(config, scenario, jobs);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_experiment_outputs(out, config, logs);

  std::printf("%zu logs in %.2f s -> %s\n", logs.size(), seconds, out.string().c_str());
  for (const SummaryRow& row : summarize(logs)) {
    std::printf("alpha=%.2f %-12s success=%zu/%zu effort=%.2f acceptance=%.1f%%\n", row.alpha,
                row.operator_name.c_str(), row.successes, row.episodes, row.effort.mean,
                row.acceptance.mean);
  }
  return kExitOk;
}

int cmd_replay(const fs::path& log_path) {
  const EpisodeLog log = load_log(log_path);
  const ReplayReport report = replay(log);
  if (report.identical) {
    std::printf("identical: %zu ticks, outcome %s\n", log.records.size(),
                std::string(to_string(log.outcome.kind)).c_str());
    return kExitOk;
  }
  std::printf("MISMATCH at tick %llu: %s\n",
              static_cast<unsigned long long>(report.first_mismatch_tick.value_or(0)),
              report.detail.c_str());
  return kExitCheckFailed;
}

int cmd_summarize(const fs::path& in, const fs::path& csv) {
  const fs::path dir = fs::is_directory(in / "logs") ? in / "logs" : in;
  const std::vector<EpisodeLog> logs = load_logs(dir);
  const std::vector<SummaryRow> rows = summarize(logs);
  std::ofstream out(csv, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + csv.string());
  write_summary_csv(out, rows);
  std::printf("%zu logs, %zu rows -> %s\n", logs.size(), rows.size(), csv.string().c_str());
  return kExitOk;
}

int cmd_oracle(const std::string& check, std::size_t instances, std::uint64_t seed) {
  if (check != "hmm") throw ConfigError("unknown oracle check '" + check + "'");
  const oracle::OracleReport r = oracle::run_hmm_oracle_suite(instances, seed);
  const bool ok = r.max_abs_error <= kOracleTolerance && r.seconds < kOracleTimeLimit;
  std::printf("%s hmm oracle: %zu instances, max abs error %.3e, %.3f s\n", ok ? "PASS" : "FAIL",
              r.instances, r.max_abs_error, r.seconds);
  return ok ? kExitOk : kExitCheckFailed;
}

volatile std::sig_atomic_t g_stop = 0;

extern "C" void on_signal(int) { g_stop = 1; }

int cmd_serve(service::ServerOptions options) {
  service::SessionServer server(std::move(options));
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.start();
  std::printf("serving on port %u\n", static_cast<unsigned>(server.port()));
  std::fflush(stdout);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shared-control goal inference, assistance and simulated operator experiments"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  fs::path experiment;
  fs::path out_dir;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run a batch experiment and write logs and summaries");
  run->add_option("--experiment", experiment, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->envname("SHAREDCTL_OUT_DIR")->required();
  run->add_option("--jobs", jobs, "Worker threads")->envname("SHAREDCTL_JOBS")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Override the experiment seed");

  fs::path log_path;
  auto* rep = app.add_subcommand("replay", "Re-run a log and compare every derived field");
  rep->add_option("--log", log_path, "Episode log (.jsonl)")->required()->check(CLI::ExistingFile);

  fs::path in_dir;
  fs::path csv_path;
  auto* sum = app.add_subcommand("summarize", "Summarize a directory of logs into a CSV table");
  sum->add_option("--in", in_dir, "Log directory (or a run output directory)")->required()->check(CLI::ExistingDirectory);
  sum->add_option("--csv", csv_path, "Output CSV")->required();

  std::string check;
  std::size_t instances = 200;
  std::uint64_t oracle_seed = 20240601;
  auto* orc = app.add_subcommand("oracle", "Cross-check the filter against brute-force enumeration");
  orc->add_option("--check", check, "Which check to run")->required()->check(CLI::IsMember({"hmm"}));
  orc->add_option("--instances", instances, "Random instances")->check(CLI::PositiveNumber);
  orc->add_option("--seed", oracle_seed, "Instance generator seed");

  service::ServerOptions server;
  server.scenario_dir = fs::path(SHAREDCTL_DEFAULT_SCENARIO_DIR);
  std::string condition = "None";
  double alpha = 0.5;
  auto* srv = app.add_subcommand("serve", "Host live sessions over WebSocket");
  srv->add_option("--address", server.address, "Listen address");
  srv->add_option("--port", server.port, "Listen port (0 = ephemeral)")->envname("SHAREDCTL_PORT");
  srv->add_option("--scenarios", server.scenario_dir, "Scenario directory")->check(CLI::ExistingDirectory);
  srv->add_option("--static", server.static_dir, "Static asset directory for the UI");
  srv->add_option("--logs", server.log_dir, "Directory to save finished episode logs")->envname("SHAREDCTL_OUT_DIR");
  srv->add_option("--rate", server.tick_rate_hz, "Tick rate in Hz")->check(CLI::PositiveNumber);
  srv->add_option("--alpha", alpha, "Default arbitration level")->check(CLI::Range(0.0, 1.0));
  srv->add_option("--condition", condition, "Default visualization condition")
      ->check(CLI::IsMember({"None", "GoalOnly", "GoalPlusTrajectory"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(experiment, out_dir, jobs, seed);
    if (*rep) return cmd_replay(log_path);
    if (*sum) return cmd_summarize(in_dir, csv_path);
    if (*orc) return cmd_oracle(check, instances, oracle_seed);
    if (*srv) {
      server.session.loop.controller.alpha = alpha;
      server.session.condition = parse_visualization_condition(condition);
      return cmd_serve(std::move(server));
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const EmptyBatch& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
