#include "sharedctl/session.hpp"

#include <algorithm>
#include <cmath>

#include "sharedctl/errors.hpp"
#include "sharedctl/json_io.hpp"
#include "sharedctl/log_io.hpp"

namespace sharedctl {

using nlohmann::json;

std::string_view to_string(VisualizationCondition condition) {
  switch (condition) {
    case VisualizationCondition::None: return "None";
    case VisualizationCondition::GoalOnly: return "GoalOnly";
    case VisualizationCondition::GoalPlusTrajectory: return "GoalPlusTrajectory";
  }
  return "None";
}

VisualizationCondition parse_visualization_condition(std::string_view name) {
  if (name == "None") return VisualizationCondition::None;
  if (name == "GoalOnly") return VisualizationCondition::GoalOnly;
  if (name == "GoalPlusTrajectory") return VisualizationCondition::GoalPlusTrajectory;
  throw ProtocolError("unknown visualization condition '" + std::string(name) + "'");
}

double goal_sphere_radius(const Goal& goal, double margin) {
  double radius = 0.0;
  for (const Grasp& g : goal.grasps) {
    for (const Pose& k : g.keypoints) radius = std::max(radius, (k.position - goal.centroid).norm());
  }
  return radius + margin;
}

VisualizationPayload visualization_payload(VisualizationCondition condition,
                                           const EngagementState& engagement,
                                           const Scenario& scenario) {
  VisualizationPayload out;
  if (condition == VisualizationCondition::None || !engagement.engaged) return out;
  const Goal& goal = scenario.goals().at(engagement.engaged->goal);
  out.goal_sphere = GoalSphere{goal.id, goal.centroid, goal_sphere_radius(goal)};
  if (condition == VisualizationCondition::GoalPlusTrajectory) {
    out.ghost_keypoints = remaining_keypoints(engagement, scenario);
  }
  return out;
}

Session::Session(Scenario scenario, SessionConfig config)
    : scenario_(std::move(scenario)), config_(std::move(config)), mode_(config_.initial_mode) {
  config_.loop.validate();
  start_episode();
}

void Session::start_episode() {
  mode_ = config_.initial_mode;
  latched_ = {};
  pending_toggles_ = 0;
  loop_.emplace(scenario_, config_.loop, goal_index_);
  EpisodeOptions options;
  options.operator_name = "human";
  options.attempt = attempt_;
  header_ = make_header(scenario_, config_.loop, goal_index_, options);
}

StateUpdate Session::tick(const ControlInput& input) {
  if (!episode_active()) throw SessionClosed("no episode is running");
  if (input.toggle_mode) mode_ = toggled(mode_);
  const Action raw = action_from_axes(input.axes, mode_, config_.loop.limits);
  const TickRecord& rec = loop_->step(raw, mode_);
  ++clock_;
  StateUpdate update = make_update(&rec);
  if (loop_->finished()) {
    if (loop_->outcome()->kind == OutcomeKind::Timeout) ++failures_;
    completed_.push_back(current_log());
  }
  return update;
}

StateUpdate Session::tick() {
  ControlInput input = latched_;
  input.toggle_mode = pending_toggles_ % 2 == 1;
  pending_toggles_ = 0;
  latched_.toggle_mode = false;
  return tick(input);
}

StateUpdate Session::snapshot() const { return make_update(nullptr); }

void Session::set_alpha(double alpha) {
  ControllerConfig next = config_.loop.controller;
  next.alpha = alpha;
  next.validate();
  config_.loop.controller = next;
  if (loop_ && !loop_->finished()) loop_->set_alpha(alpha);
}

void Session::next_object() {
  if (episode_active()) throw ProtocolError("episode still running");
  if (round_complete_) throw ProtocolError("round complete; restart to begin again");
  const bool succeeded = loop_->outcome()->kind == OutcomeKind::Success;
  if (!succeeded && failures_ < config_.max_failures_per_object) {
    ++attempt_;
    start_episode();
    return;
  }
  if (!succeeded) {
    EpisodeLog skipped;
    skipped.header = header_;
    skipped.outcome = Outcome{OutcomeKind::Skipped, "", 0};
    completed_.push_back(std::move(skipped));
  }
  attempt_ = 0;
  failures_ = 0;
  if (++goal_index_ >= scenario_.goal_count()) {
    goal_index_ = scenario_.goal_count() - 1;
    round_complete_ = true;
    return;
  }
  start_episode();
}

void Session::restart_round() {
  goal_index_ = 0;
  attempt_ = 0;
  failures_ = 0;
  round_complete_ = false;
  start_episode();
}

EpisodeLog Session::current_log() const {
  EpisodeLog log;
  log.header = header_;
  log.records = loop_->records();
  if (loop_->outcome()) log.outcome = *loop_->outcome();
  return log;
}

StateUpdate Session::make_update(const TickRecord* record) const {
  StateUpdate u;
  u.tick = clock_;
  u.episode_tick = loop_->tick();
  u.episode_active = episode_active();
  u.round_complete = round_complete_;
  const Goal& goal = scenario_.goals().at(goal_index_);
  u.instructed_goal_id = goal.id;
  u.instructed_label = goal.label;
  u.attempt = attempt_;
  u.mode = mode_;
  u.alpha = config_.loop.controller.alpha;
  u.condition = config_.condition;
  u.pose = loop_->pose();
  u.belief = loop_->belief();
  u.posterior = loop_->posterior();
  u.engagement = loop_->engagement();
  const TickRecord* last = record;
  if (!last && !loop_->records().empty()) last = &loop_->records().back();
  if (last) {
    u.u_h = last->u_h_snapped;
    u.u_r = last->u_r;
    u.u_star = last->u_star;
  }
  u.visualization = visualization_payload(config_.condition, u.engagement, scenario_);
  const auto& records = loop_->records();
  u.metrics.ticks = records.size();
  u.metrics.input_ticks = static_cast<std::uint64_t>(std::count_if(
      records.begin(), records.end(), [](const TickRecord& r) { return !r.u_h_snapped.is_null(); }));
  if (u.metrics.ticks > 0) {
    u.metrics.acceptance = 100.0 * static_cast<double>(u.metrics.ticks - u.metrics.input_ticks) /
                           static_cast<double>(u.metrics.ticks);
  }
  if (record && loop_->finished()) u.outcome = loop_->outcome();
  return u;
}

namespace {

std::uint64_t require_tick(const json& j) {
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  if (!j.contains("type") || !j["type"].is_string()) throw ProtocolError("missing string field 'type'");
  if (!j.contains("tick") || !j["tick"].is_number_integer() || j["tick"].get<std::int64_t>() < 0) {
    throw ProtocolError("missing non-negative integer field 'tick'");
  }
  return j["tick"].get<std::uint64_t>();
}

ControlInput parse_control_input(const json& j) {
  ControlInput in;
  if (!j.contains("axes") || !j["axes"].is_array() || j["axes"].size() != 3) {
    throw ProtocolError("ControlInput.axes must be an array of 3 numbers");
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const json& a = j["axes"][i];
    if (!a.is_number() || !std::isfinite(a.get<double>())) {
      throw ProtocolError("ControlInput.axes must be finite numbers");
    }
    in.axes[static_cast<Eigen::Index>(i)] = std::clamp(a.get<double>(), -1.0, 1.0);
  }
  if (j.contains("toggle_mode")) {
    if (!j["toggle_mode"].is_boolean()) throw ProtocolError("ControlInput.toggle_mode must be a boolean");
    in.toggle_mode = j["toggle_mode"].get<bool>();
  }
  return in;
}

}  // namespace

std::vector<json> Session::handle_client_message(std::string_view text) {
  try {
    const json j = json::parse(text.begin(), text.end());
    require_tick(j);
    const std::string type = j["type"].get<std::string>();
    if (type == "ControlInput") {
      const ControlInput in = parse_control_input(j);
      if (!episode_active()) throw SessionClosed("no episode is running; input ignored");
      latched_.axes = in.axes;
      if (in.toggle_mode) ++pending_toggles_;
      return {};
    }
    if (type == "SetConfig") {
      std::optional<double> alpha;
      std::optional<VisualizationCondition> condition;
      if (j.contains("alpha")) {
        if (!j["alpha"].is_number()) throw ProtocolError("SetConfig.alpha must be a number");
        alpha = j["alpha"].get<double>();
        if (!(*alpha >= 0.0 && *alpha <= 1.0)) throw ProtocolError("SetConfig.alpha must lie in [0, 1]");
      }
      if (j.contains("visualization")) {
        if (!j["visualization"].is_string()) throw ProtocolError("SetConfig.visualization must be a string");
        condition = parse_visualization_condition(j["visualization"].get<std::string>());
      }
      if (alpha) set_alpha(*alpha);
      if (condition) set_condition(*condition);
      return {};
    }
    if (type == "Command") {
      if (!j.contains("command") || !j["command"].is_string()) {
        throw ProtocolError("Command.command must be a string");
      }
      const std::string command = j["command"].get<std::string>();
      if (command == "next_object") {
        next_object();
        return {};
      }
      if (command == "restart_round") {
        restart_round();
        return {};
      }
      if (command == "request_log") {
        json lines = log_to_json(current_log());
        if (episode_active()) lines.erase(lines.end() - 1);  // no outcome yet
        return {json{{"type", "EpisodeLog"}, {"tick", clock_}, {"log", std::move(lines)}}};
      }
      throw ProtocolError("unknown command '" + command + "'");
    }
    throw ProtocolError("unknown message type '" + type + "'");
  } catch (const json::exception& e) {
    return {error_message(clock_, std::string("malformed message: ") + e.what())};
  } catch (const Error& e) {
    return {error_message(clock_, e.what())};
  }
}

namespace {

json posterior_json(const GoalPosterior& p, const Scenario& scenario) {
  json out = json::array();
  for (std::size_t g = 0; g < scenario.goal_count(); ++g) {
    out.push_back({{"goal_id", scenario.goals()[g].id},
                   {"probability", p.probs[static_cast<Eigen::Index>(g)]}});
  }
  return out;
}

json belief_json(const Belief& b, const Scenario& scenario) {
  json out = json::array();
  for (std::size_t x = 0; x < scenario.state_count(); ++x) {
    out.push_back({{"grasp_id", scenario.grasp(x).id},
                   {"probability", b.probs[static_cast<Eigen::Index>(x)]}});
  }
  return out;
}

json engagement_json(const EngagementState& e, const Scenario& scenario) {
  json out{{"engaged", e.is_engaged()}, {"goal_id", nullptr}, {"grasp_id", nullptr},
           {"next_keypoint", e.next_keypoint}};
  if (e.engaged) {
    out["goal_id"] = scenario.goals().at(e.engaged->goal).id;
    out["grasp_id"] = scenario.grasp(e.engaged->state).id;
    out["keypoint_count"] = scenario.grasp(e.engaged->state).keypoints.size();
  }
  return out;
}

json visualization_json(const VisualizationPayload& v) {
  json out{{"goal_sphere", nullptr}, {"ghost_keypoints", json::array()}};
  if (v.goal_sphere) {
    out["goal_sphere"] = {{"goal_id", v.goal_sphere->goal_id},
                          {"center", json_io::encode(v.goal_sphere->centroid)},
                          {"radius", v.goal_sphere->radius}};
  }
  for (const Pose& p : v.ghost_keypoints) out["ghost_keypoints"].push_back(json_io::encode(p));
  return out;
}

json metrics_json(const SessionMetrics& m) {
  return {{"ticks", m.ticks}, {"completion_effort", m.input_ticks}, {"acceptance", m.acceptance}};
}

}  // namespace

json state_update_message(const StateUpdate& u, const Scenario& scenario) {
  json out{{"type", "StateUpdate"},
           {"tick", u.tick},
           {"episode_tick", u.episode_tick},
           {"episode_active", u.episode_active},
           {"round_complete", u.round_complete},
           {"instruction", {{"goal_id", u.instructed_goal_id}, {"label", u.instructed_label}}},
           {"attempt", u.attempt},
           {"mode", to_string(u.mode)},
           {"alpha", u.alpha},
           {"condition", to_string(u.condition)},
           {"pose", json_io::encode(u.pose)},
           {"goal_posterior", posterior_json(u.posterior, scenario)},
           {"belief", belief_json(u.belief, scenario)},
           {"engagement", engagement_json(u.engagement, scenario)},
           {"u_h", json_io::encode(u.u_h)},
           {"u_r", json_io::encode(u.u_r)},
           {"u_star", json_io::encode(u.u_star)},
           {"visualization", visualization_json(u.visualization)},
           {"metrics", metrics_json(u.metrics)}};
  return out;
}

json episode_end_message(const StateUpdate& u) {
  json outcome{{"kind", "timeout"}, {"grasp_id", nullptr}, {"ticks", u.episode_tick}};
  if (u.outcome) {
    outcome["kind"] = to_string(u.outcome->kind);
    if (!u.outcome->grasp_id.empty()) outcome["grasp_id"] = u.outcome->grasp_id;
    outcome["ticks"] = u.outcome->ticks;
  }
  return {{"type", "EpisodeEnd"},
          {"tick", u.tick},
          {"goal_id", u.instructed_goal_id},
          {"attempt", u.attempt},
          {"outcome", outcome},
          {"metrics", metrics_json(u.metrics)}};
}

json error_message(std::uint64_t tick, std::string_view message) {
  return {{"type", "Error"}, {"tick", tick}, {"message", std::string(message)}};
}

std::vector<ScriptedInput> script_from_inputs(std::span<const ControlInput> inputs,
                                              ControlMode initial_mode,
                                              const ActionLimits& limits) {
  std::vector<ScriptedInput> out;
  out.reserve(inputs.size());
  ControlMode mode = initial_mode;
  for (const ControlInput& in : inputs) {
    if (in.toggle_mode) mode = toggled(mode);
    out.push_back({action_from_axes(in.axes, mode, limits), mode, std::nullopt});
  }
  return out;
}

}  // namespace sharedctl
