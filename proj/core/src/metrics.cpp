#include "sharedctl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <tuple>

#include "sharedctl/errors.hpp"
#include "sharedctl/rng.hpp"

namespace sharedctl {

namespace {

void require_success(const EpisodeLog& log) {
  if (log.outcome.kind != OutcomeKind::Success) {
    throw NotSuccessful("metric is defined only for successful episodes (outcome: " +
                        std::string(to_string(log.outcome.kind)) + ")");
  }
}

std::uint64_t count_inputs(const EpisodeLog& log) {
  return static_cast<std::uint64_t>(std::count_if(
      log.records.begin(), log.records.end(),
      [](const TickRecord& r) { return !r.u_h_snapped.is_null(); }));
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::uint64_t completion_effort(const EpisodeLog& log) {
  require_success(log);
  return count_inputs(log);
}

std::uint64_t idle_ticks(const EpisodeLog& log) {
  require_success(log);
  return log.records.size() - count_inputs(log);
}

double acceptance_of_assistance(const EpisodeLog& log) {
  require_success(log);
  if (log.records.empty()) return 0.0;
  return 100.0 * static_cast<double>(idle_ticks(log)) / static_cast<double>(log.records.size());
}

SampleStats describe(std::span<const double> values) {
  SampleStats s;
  s.n = values.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

Interval bootstrap_mean_ci(std::span<const double> values, double confidence,
                           std::size_t resamples, std::uint64_t seed) {
  if (values.empty()) throw EmptyBatch("bootstrap of an empty sample");
  Rng rng(seed);
  std::vector<double> means;
  means.reserve(resamples);
  const std::size_t n = values.size();
  for (std::size_t r = 0; r < resamples; ++r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += values[static_cast<std::size_t>(rng.uniform() * static_cast<double>(n))];
    }
    means.push_back(sum / static_cast<double>(n));
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - confidence) / 2.0;
  const auto at = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(resamples - 1)));
    return means[std::min(idx, resamples - 1)];
  };
  return Interval{at(tail), at(1.0 - tail)};
}

std::vector<SummaryRow> summarize(std::span<const EpisodeLog> logs) {
  if (logs.empty()) throw EmptyBatch("cannot summarize an empty batch");
  struct Cell {
    SummaryRow row;
    std::vector<double> effort;
    std::vector<double> acceptance;
  };
  std::map<std::tuple<double, std::string>, Cell> cells;
  for (const EpisodeLog& log : logs) {
    const double alpha = log.header.loop.controller.alpha;
    Cell& cell = cells[{alpha, log.header.operator_name}];
    cell.row.alpha = alpha;
    cell.row.operator_name = log.header.operator_name;
    switch (log.outcome.kind) {
      case OutcomeKind::Success:
        ++cell.row.successes;
        cell.effort.push_back(static_cast<double>(completion_effort(log)));
        cell.acceptance.push_back(acceptance_of_assistance(log));
        break;
      case OutcomeKind::Timeout: ++cell.row.timeouts; break;
      case OutcomeKind::Skipped: ++cell.row.skipped; break;
    }
  }
  std::vector<SummaryRow> rows;
  for (auto& [key, cell] : cells) {
    SummaryRow row = cell.row;
    row.episodes = row.successes + row.timeouts;
    row.success_rate = row.episodes == 0
                           ? 0.0
                           : static_cast<double>(row.successes) / static_cast<double>(row.episodes);
    row.effort = describe(cell.effort);
    row.acceptance = describe(cell.acceptance);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << "alpha,operator,episodes,successes,timeouts,skipped,success_rate,"
         "effort_mean,effort_std,effort_n,acceptance_mean,acceptance_std,acceptance_n\n";
  for (const SummaryRow& r : rows) {
    out << fixed(r.alpha) << ',' << r.operator_name << ',' << r.episodes << ',' << r.successes << ','
        << r.timeouts << ',' << r.skipped << ',' << fixed(r.success_rate) << ','
        << fixed(r.effort.mean) << ',' << fixed(r.effort.std) << ',' << r.effort.n << ','
        << fixed(r.acceptance.mean) << ',' << fixed(r.acceptance.std) << ',' << r.acceptance.n
        << '\n';
  }
}

nlohmann::json summary_to_json(std::span<const SummaryRow> rows) {
  nlohmann::json out = nlohmann::json::array();
  const auto stats = [](const SampleStats& s) {
    return nlohmann::json{{"mean", s.mean}, {"std", s.std}, {"n", s.n}};
  };
  for (const SummaryRow& r : rows) {
    out.push_back({{"alpha", r.alpha},
                   {"operator", r.operator_name},
                   {"episodes", r.episodes},
                   {"successes", r.successes},
                   {"timeouts", r.timeouts},
                   {"skipped", r.skipped},
                   {"success_rate", r.success_rate},
                   {"completion_effort", stats(r.effort)},
                   {"acceptance_of_assistance", stats(r.acceptance)}});
  }
  return out;
}

}  // namespace sharedctl
