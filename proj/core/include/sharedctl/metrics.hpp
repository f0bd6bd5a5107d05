#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharedctl/episode.hpp"

namespace sharedctl {

/// Ticks with a non-null snapped operator input. Throws NotSuccessful.
std::uint64_t completion_effort(const EpisodeLog& log);

/// Ticks with a null snapped operator input. Throws NotSuccessful.
std::uint64_t idle_ticks(const EpisodeLog& log);

/// 100 * idle ticks / total ticks. Throws NotSuccessful.
double acceptance_of_assistance(const EpisodeLog& log);

struct SampleStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 for n < 2
  std::size_t n = 0;
};

SampleStats describe(std::span<const double> values);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  bool overlaps(const Interval& other) const {
    return lower <= other.upper && other.lower <= upper;
  }
};

/// Percentile bootstrap interval for the mean. Deterministic in seed.
Interval bootstrap_mean_ci(std::span<const double> values, double confidence,
                           std::size_t resamples, std::uint64_t seed);

/// One cell of the summary table: one arbitration level x one operator profile.
struct SummaryRow {
  double alpha = 0.0;
  std::string operator_name;
  std::size_t episodes = 0;  // attempts that ran (success + timeout)
  std::size_t successes = 0;
  std::size_t timeouts = 0;
  std::size_t skipped = 0;   // objects given up on
  double success_rate = 0.0;
  SampleStats effort;
  SampleStats acceptance;
};

/// Groups by (alpha, operator name), ordered by alpha then name.
/// Throws EmptyBatch for an empty batch.
std::vector<SummaryRow> summarize(std::span<const EpisodeLog> logs);

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);
nlohmann::json summary_to_json(std::span<const SummaryRow> rows);

}  // namespace sharedctl
