#include "sharedctl/log_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "sharedctl/errors.hpp"
#include "sharedctl/json_io.hpp"

namespace sharedctl {

using nlohmann::json;
using json_io::encode;

namespace {

json encode_vector(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd decode_vector(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json encode_tolerance(Tolerance t) { return {{"position", t.position}, {"rotation", t.rotation}}; }

Tolerance decode_tolerance(const json& j, Tolerance fallback) {
  return Tolerance{j.value("position", fallback.position), j.value("rotation", fallback.rotation)};
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

json to_json(const HmmParams& p) {
  return {{"t_grasp", p.t_grasp},
          {"t_goal", p.t_goal},
          {"beta", p.beta},
          {"idle_transition", p.idle_transition},
          {"normalize_reward", p.normalize_reward}};
}

HmmParams hmm_params_from_json(const json& j) {
  return guarded("hmm", [&] {
    HmmParams p;
    p.t_grasp = j.value("t_grasp", p.t_grasp);
    p.t_goal = j.value("t_goal", p.t_goal);
    p.beta = j.value("beta", p.beta);
    p.idle_transition = j.value("idle_transition", p.idle_transition);
    p.normalize_reward = j.value("normalize_reward", p.normalize_reward);
    try {
      p.validate();
    } catch (const InvalidParams& e) {
      throw ConfigError(std::string("hmm: ") + e.what());
    }
    return p;
  });
}

json to_json(const ControllerConfig& c) {
  return {{"alpha", c.alpha},
          {"assist_enabled", c.assist_enabled},
          {"assist_full_axes", c.assist_full_axes},
          {"discrete_assist", c.discrete_assist},
          {"threshold", c.engagement.threshold},
          {"hysteresis", c.engagement.hysteresis},
          {"keypoint_tolerance", encode_tolerance(c.engagement.keypoint_tolerance)}};
}

ControllerConfig controller_config_from_json(const json& j) {
  return guarded("controller", [&] {
    ControllerConfig c;
    c.alpha = j.value("alpha", c.alpha);
    c.assist_enabled = j.value("assist_enabled", c.assist_enabled);
    c.assist_full_axes = j.value("assist_full_axes", c.assist_full_axes);
    c.discrete_assist = j.value("discrete_assist", c.discrete_assist);
    c.engagement.threshold = j.value("threshold", c.engagement.threshold);
    c.engagement.hysteresis = j.value("hysteresis", c.engagement.hysteresis);
    if (j.contains("keypoint_tolerance")) {
      c.engagement.keypoint_tolerance =
          decode_tolerance(j.at("keypoint_tolerance"), c.engagement.keypoint_tolerance);
    }
    c.validate();
    return c;
  });
}

json to_json(const LoopConfig& c) {
  return {{"controller", to_json(c.controller)},
          {"hmm", to_json(c.hmm)},
          {"rotation_weight", c.rotation_weight},
          {"limits", {{"linear", c.limits.linear}, {"angular", c.limits.angular}}},
          {"max_ticks", c.max_ticks},
          {"success_tolerance", encode_tolerance(c.success_tolerance)}};
}

LoopConfig loop_config_from_json(const json& j) {
  return guarded("loop", [&] {
    LoopConfig c;
    if (j.contains("controller")) c.controller = controller_config_from_json(j.at("controller"));
    if (j.contains("hmm")) c.hmm = hmm_params_from_json(j.at("hmm"));
    c.rotation_weight = j.value("rotation_weight", c.rotation_weight);
    if (j.contains("limits")) {
      c.limits.linear = j.at("limits").value("linear", c.limits.linear);
      c.limits.angular = j.at("limits").value("angular", c.limits.angular);
    }
    c.max_ticks = j.value("max_ticks", c.max_ticks);
    if (j.contains("success_tolerance")) {
      c.success_tolerance = decode_tolerance(j.at("success_tolerance"), c.success_tolerance);
    }
    c.validate();
    return c;
  });
}

json to_json(const OperatorConfig& c) {
  json j = {{"intended_grasp_id", c.intended_grasp_id},
            {"beta_op", c.beta_op},
            {"p_idle_when_helped", c.p_idle_when_helped},
            {"seed", c.seed}};
  if (c.goal_switch_tick) j["goal_switch_tick"] = *c.goal_switch_tick;
  if (c.switched_grasp_id) j["switched_grasp_id"] = *c.switched_grasp_id;
  return j;
}

OperatorConfig operator_config_from_json(const json& j) {
  return guarded("operator", [&] {
    OperatorConfig c;
    c.intended_grasp_id = j.value("intended_grasp_id", std::string());
    c.beta_op = j.value("beta_op", c.beta_op);
    c.p_idle_when_helped = j.value("p_idle_when_helped", c.p_idle_when_helped);
    c.seed = j.value("seed", c.seed);
    if (j.contains("goal_switch_tick")) c.goal_switch_tick = j.at("goal_switch_tick").get<std::uint64_t>();
    if (j.contains("switched_grasp_id")) c.switched_grasp_id = j.at("switched_grasp_id").get<std::string>();
    return c;
  });
}

json record_to_json(const TickRecord& r) {
  json engagement = {{"engaged", r.engagement.is_engaged()},
                     {"next_keypoint", r.engagement.next_keypoint}};
  if (r.engagement.engaged) {
    engagement["goal"] = r.engagement.engaged->goal;
    engagement["state"] = r.engagement.engaged->state;
  }
  return {{"type", "tick"},
          {"tick", r.tick},
          {"mode", to_string(r.mode)},
          {"alpha", r.alpha},
          {"u_h_raw", encode(r.u_h_raw)},
          {"u_h_snapped", encode(r.u_h_snapped)},
          {"u_r", encode(r.u_r)},
          {"u_star", encode(r.u_star)},
          {"pose", encode(r.pose)},
          {"belief", encode_vector(r.belief.probs)},
          {"posterior", encode_vector(r.posterior.probs)},
          {"engagement", std::move(engagement)}};
}

TickRecord record_from_json(const json& j) {
  return guarded("tick record", [&] {
    TickRecord r;
    r.tick = j.at("tick").get<std::uint64_t>();
    r.mode = parse_control_mode(j.at("mode").get<std::string>());
    r.alpha = j.at("alpha").get<double>();
    r.u_h_raw = json_io::decode_action(j.at("u_h_raw"), "u_h_raw");
    r.u_h_snapped = json_io::decode_action(j.at("u_h_snapped"), "u_h_snapped");
    r.u_r = json_io::decode_action(j.at("u_r"), "u_r");
    r.u_star = json_io::decode_action(j.at("u_star"), "u_star");
    r.pose = json_io::decode_pose_exact(j.at("pose"), "pose");
    r.belief.probs = decode_vector(j.at("belief"));
    r.posterior.probs = decode_vector(j.at("posterior"));
    const json& e = j.at("engagement");
    r.engagement.next_keypoint = e.at("next_keypoint").get<std::size_t>();
    if (e.at("engaged").get<bool>()) {
      r.engagement.engaged = EngagedTarget{e.at("goal").get<std::size_t>(), e.at("state").get<std::size_t>()};
    }
    return r;
  });
}

json outcome_to_json(const Outcome& o) {
  json j = {{"type", "outcome"}, {"kind", to_string(o.kind)}, {"ticks", o.ticks}};
  if (o.kind == OutcomeKind::Success) j["grasp_id"] = o.grasp_id;
  return j;
}

Outcome outcome_from_json(const json& j) {
  return guarded("outcome", [&] {
    Outcome o;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "success") {
      o.kind = OutcomeKind::Success;
    } else if (kind == "timeout") {
      o.kind = OutcomeKind::Timeout;
    } else if (kind == "skipped") {
      o.kind = OutcomeKind::Skipped;
    } else {
      throw ConfigError("outcome: unknown kind '" + kind + "'");
    }
    o.ticks = j.at("ticks").get<std::uint64_t>();
    o.grasp_id = j.value("grasp_id", std::string());
    return o;
  });
}

json header_to_json(const EpisodeHeader& h) {
  json j = {{"type", "header"},
            {"scenario_id", h.scenario_id},
            {"target_goal_id", h.target_goal_id},
            {"operator_name", h.operator_name},
            {"seed", h.seed},
            {"repetition", h.repetition},
            {"attempt", h.attempt},
            {"code_version", h.code_version},
            {"rng_algorithm", h.rng_algorithm},
            {"loop", to_json(h.loop)},
            {"scenario", h.scenario}};
  if (h.operator_config) j["operator"] = to_json(*h.operator_config);
  return j;
}

EpisodeHeader header_from_json(const json& j) {
  return guarded("header", [&] {
    EpisodeHeader h;
    h.scenario_id = j.at("scenario_id").get<std::string>();
    h.target_goal_id = j.at("target_goal_id").get<std::string>();
    h.operator_name = j.value("operator_name", std::string());
    h.seed = j.value("seed", std::uint64_t{0});
    h.repetition = j.value("repetition", 0u);
    h.attempt = j.value("attempt", 0u);
    h.code_version = j.value("code_version", std::string());
    h.rng_algorithm = j.value("rng_algorithm", std::string());
    h.loop = loop_config_from_json(j.at("loop"));
    h.scenario = j.at("scenario");
    if (j.contains("operator")) h.operator_config = operator_config_from_json(j.at("operator"));
    return h;
  });
}

nlohmann::json log_to_json(const EpisodeLog& log) {
  json lines = json::array();
  lines.push_back(header_to_json(log.header));
  for (const TickRecord& r : log.records) lines.push_back(record_to_json(r));
  lines.push_back(outcome_to_json(log.outcome));
  return lines;
}

void write_log(std::ostream& out, const EpisodeLog& log) {
  out << header_to_json(log.header).dump() << '\n';
  for (const TickRecord& r : log.records) out << record_to_json(r).dump() << '\n';
  out << outcome_to_json(log.outcome).dump() << '\n';
}

EpisodeLog read_log(std::istream& in) {
  EpisodeLog log;
  bool have_header = false;
  bool have_outcome = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ConfigError("log line " + std::to_string(line_no) + ": " + e.what());
    }
    const std::string type = j.value("type", std::string());
    if (type == "header") {
      log.header = header_from_json(j);
      have_header = true;
    } else if (type == "tick") {
      TickRecord r = record_from_json(j);
      if (!log.records.empty() && r.tick <= log.records.back().tick) {
        throw ConfigError("log line " + std::to_string(line_no) + ": ticks must strictly increase");
      }
      log.records.push_back(std::move(r));
    } else if (type == "outcome") {
      if (have_outcome) throw ConfigError("log has more than one outcome");
      log.outcome = outcome_from_json(j);
      have_outcome = true;
    } else {
      throw ConfigError("log line " + std::to_string(line_no) + ": unknown record type '" + type + "'");
    }
  }
  if (!have_header) throw ConfigError("log has no header");
  if (!have_outcome) throw ConfigError("log has no outcome");
  return log;
}

void save_log(const std::filesystem::path& path, const EpisodeLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write log " + path.string());
  write_log(out, log);
}

EpisodeLog load_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open log " + path.string());
  return read_log(in);
}

}  // namespace sharedctl
