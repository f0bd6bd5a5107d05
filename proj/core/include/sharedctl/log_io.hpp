#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharedctl/episode.hpp"

namespace sharedctl {

// Configuration encodings. Decoders fill unspecified fields with defaults and
// throw ConfigError on malformed values.
nlohmann::json to_json(const HmmParams& p);
nlohmann::json to_json(const ControllerConfig& c);
nlohmann::json to_json(const LoopConfig& c);
nlohmann::json to_json(const OperatorConfig& c);
HmmParams hmm_params_from_json(const nlohmann::json& j);
ControllerConfig controller_config_from_json(const nlohmann::json& j);
LoopConfig loop_config_from_json(const nlohmann::json& j);
OperatorConfig operator_config_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const TickRecord& r);
TickRecord record_from_json(const nlohmann::json& j);
nlohmann::json outcome_to_json(const Outcome& o);
Outcome outcome_from_json(const nlohmann::json& j);
nlohmann::json header_to_json(const EpisodeHeader& h);
EpisodeHeader header_from_json(const nlohmann::json& j);

/// Line-delimited log: one header line, one line per tick, one outcome line.
void write_log(std::ostream& out, const EpisodeLog& log);
EpisodeLog read_log(std::istream& in);
void save_log(const std::filesystem::path& path, const EpisodeLog& log);
EpisodeLog load_log(const std::filesystem::path& path);

/// The same lines as write_log, as a JSON array (for the session protocol).
nlohmann::json log_to_json(const EpisodeLog& log);

}  // namespace sharedctl
