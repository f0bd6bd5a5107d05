#include "sharedctl/episode.hpp"

#include <utility>

#include "sharedctl/errors.hpp"
#include "sharedctl/log_io.hpp"
#include "sharedctl/version.hpp"

namespace sharedctl {

std::string_view to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::Success: return "success";
    case OutcomeKind::Timeout: return "timeout";
    case OutcomeKind::Skipped: return "skipped";
  }
  return "unknown";
}

void LoopConfig::validate() const {
  controller.validate();
  hmm.validate();
  if (!(rotation_weight > 0.0)) throw ConfigError("rotation_weight must be positive");
  if (!(limits.linear > 0.0 && limits.angular > 0.0)) throw ConfigError("action limits must be positive");
  if (max_ticks == 0) throw ConfigError("max_ticks must be >= 1");
  if (!(success_tolerance.position > 0.0 && success_tolerance.rotation > 0.0)) {
    throw ConfigError("success tolerances must be positive");
  }
}

SharedControlLoop::SharedControlLoop(Scenario scenario, LoopConfig config, std::size_t target_goal)
    : scenario_(std::move(scenario)),
      config_(std::move(config)),
      world_(scenario_.world(config_.rotation_weight, config_.limits)),
      transitions_((config_.validate(), build_transition_matrix(scenario_, config_.hmm))),
      target_goal_(target_goal),
      pose_(scenario_.start_pose()),
      belief_(Belief::uniform(scenario_.state_count())),
      posterior_(goal_posterior(belief_, scenario_)) {
  if (target_goal_ >= scenario_.goal_count()) throw ConfigError("target goal index out of range");
}

void SharedControlLoop::set_alpha(double alpha) {
  ControllerConfig next = config_.controller;
  next.alpha = alpha;
  next.validate();
  config_.controller = next;
}

const TickRecord& SharedControlLoop::step(const Action& u_h_raw, ControlMode mode) {
  if (finished()) throw SessionClosed("episode already finished");

  TickRecord rec;
  rec.tick = tick_;
  rec.mode = mode;
  rec.alpha = config_.controller.alpha;
  rec.u_h_raw = clamped(restricted_to(u_h_raw, mode), config_.limits);
  rec.u_h_snapped = snap_to_canonical(rec.u_h_raw, mode, config_.limits.magnitude(mode));

  if (!rec.u_h_snapped.is_null()) {
    belief_ = forward_update(belief_, rec.u_h_snapped, mode, pose_, transitions_, scenario_,
                             world_, config_.hmm);
  } else if (config_.hmm.idle_transition) {
    belief_ = transition_step(belief_, transitions_);
  }
  posterior_ = goal_posterior(belief_, scenario_);

  const ControllerConfig& ctl = config_.controller;
  if (ctl.assist_enabled) {
    engagement_ = update_engagement(engagement_, posterior_, belief_, scenario_, ctl.engagement);
    if (engagement_.engaged) {
      engagement_ = advance_keypoint(engagement_, pose_, scenario_.grasp(engagement_.engaged->state),
                                     ctl.engagement.keypoint_tolerance);
    }
    rec.u_r = assist_action(pose_, engagement_, scenario_, world_, mode, ctl.assist_options());
  }
  rec.u_star = blend(rec.u_h_raw, rec.u_r, ctl.alpha, config_.limits);
  pose_ = world_.step(pose_, rec.u_star);
  last_u_star_ = rec.u_star;

  rec.pose = pose_;
  rec.belief = belief_;
  rec.posterior = posterior_;
  rec.engagement = engagement_;
  ++tick_;

  const Goal& target = scenario_.goals()[target_goal_];
  for (const Grasp& grasp : target.grasps) {
    if (grasp_succeeded(pose_, grasp, config_.success_tolerance)) {
      outcome_ = Outcome{OutcomeKind::Success, grasp.id, tick_};
      break;
    }
  }
  if (!outcome_ && tick_ >= config_.max_ticks) outcome_ = Outcome{OutcomeKind::Timeout, "", tick_};

  records_.push_back(std::move(rec));
  return records_.back();
}

EpisodeHeader make_header(const Scenario& scenario, const LoopConfig& config,
                          std::size_t target_goal, const EpisodeOptions& options) {
  EpisodeHeader h;
  h.scenario = scenario_to_json(scenario);
  h.scenario_id = scenario.id();
  h.target_goal_id = scenario.goals().at(target_goal).id;
  h.loop = config;
  h.operator_name = options.operator_name;
  h.repetition = options.repetition;
  h.attempt = options.attempt;
  h.code_version = kVersion;
  h.rng_algorithm = std::string(Rng::kAlgorithm);
  return h;
}

namespace {

std::size_t resolve_target(const Scenario& scenario, const OperatorConfig& op,
                           const EpisodeOptions& options) {
  if (options.target_goal_id) return scenario.goal_index(*options.target_goal_id);
  const std::string& final_intent = op.switched_grasp_id ? *op.switched_grasp_id : op.intended_grasp_id;
  return scenario.goal_of(scenario.state_index(final_intent));
}

EpisodeLog finish(SharedControlLoop& loop, EpisodeHeader header) {
  return EpisodeLog{std::move(header), loop.records(), *loop.outcome()};
}

}  // namespace

EpisodeLog run_episode(const Scenario& scenario, const LoopConfig& config,
                       OperatorConfig operator_config, std::uint64_t seed,
                       const EpisodeOptions& options) {
  operator_config.seed = seed;
  operator_config.validate(scenario);
  const std::size_t target = resolve_target(scenario, operator_config, options);

  SharedControlLoop loop(scenario, config, target);
  OperatorState op(operator_config, loop.scenario());
  while (!loop.finished()) {
    const ControlMode mode = mode_policy(op, loop.pose(), loop.scenario(), config.success_tolerance);
    const Action u = operator_act(op, loop.pose(), loop.last_u_star(), loop.scenario(), loop.world(),
                                  operator_config, mode, loop.tick());
    loop.step(u, mode);
  }

  EpisodeHeader header = make_header(scenario, config, target, options);
  header.operator_config = operator_config;
  header.seed = seed;
  return finish(loop, std::move(header));
}

EpisodeLog run_scripted_episode(const Scenario& scenario, const LoopConfig& config,
                                std::size_t target_goal, std::span<const ScriptedInput> script,
                                const EpisodeOptions& options) {
  SharedControlLoop loop(scenario, config, target_goal);
  ControlMode mode = ControlMode::Position;
  std::size_t i = 0;
  while (!loop.finished()) {
    if (i < script.size()) {
      mode = script[i].mode;
      if (script[i].alpha) loop.set_alpha(*script[i].alpha);
      loop.step(script[i].u_h_raw, mode);
      ++i;
    } else {
      loop.step(Action{}, mode);
    }
  }
  return finish(loop, make_header(scenario, config, target_goal, options));
}

std::vector<ScriptedInput> input_stream(const EpisodeLog& log) {
  std::vector<ScriptedInput> out;
  out.reserve(log.records.size());
  for (const TickRecord& r : log.records) out.push_back({r.u_h_raw, r.mode, r.alpha});
  return out;
}

namespace {

ReplayReport compare(const EpisodeLog& expected, const EpisodeLog& actual, const char* route) {
  ReplayReport report;
  const std::size_t n = std::min(expected.records.size(), actual.records.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (record_to_json(expected.records[i]) !=
        record_to_json(actual.records[i])) {
      report.identical = false;
      report.first_mismatch_tick = expected.records[i].tick;
      report.detail = std::string(route) + ": record mismatch at tick " +
                      std::to_string(expected.records[i].tick);
      return report;
    }
  }
  if (expected.records.size() != actual.records.size() ||
      outcome_to_json(expected.outcome) != outcome_to_json(actual.outcome)) {
    report.identical = false;
    report.first_mismatch_tick = n;
    report.detail = std::string(route) + ": outcome or length differs";
  }
  return report;
}

}  // namespace

ReplayReport replay(const EpisodeLog& log) {
  if (log.outcome.kind == OutcomeKind::Skipped) return {};
  const Scenario scenario = scenario_from_json(log.header.scenario);
  const std::size_t target = scenario.goal_index(log.header.target_goal_id);
  const std::vector<ScriptedInput> script = input_stream(log);

  SharedControlLoop loop(scenario, log.header.loop, target);
  for (const ScriptedInput& in : script) {
    if (loop.finished()) break;
    if (in.alpha) loop.set_alpha(*in.alpha);
    loop.step(in.u_h_raw, in.mode);
  }
  if (!loop.finished()) {
    return {false, loop.tick(), "input stream: episode did not finish on the recorded inputs"};
  }
  EpisodeLog rerun{log.header, loop.records(), *loop.outcome()};
  ReplayReport report = compare(log, rerun, "input stream");
  if (!report.identical || !log.header.operator_config) return report;

  EpisodeOptions options;
  options.operator_name = log.header.operator_name;
  options.repetition = log.header.repetition;
  options.attempt = log.header.attempt;
  options.target_goal_id = log.header.target_goal_id;
  const EpisodeLog simulated =
      run_episode(scenario, log.header.loop, *log.header.operator_config, log.header.seed, options);
  return compare(log, simulated, "operator re-simulation");
}

}  // namespace sharedctl
