#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "sharedctl/errors.hpp"
#include "sharedctl/episode.hpp"
#include "sharedctl/log_io.hpp"
#include "sharedctl/metrics.hpp"

using namespace sharedctl;

namespace {

OperatorConfig op(const std::string& grasp, double beta, double p_idle) {
  OperatorConfig c;
  c.intended_grasp_id = grasp;
  c.beta_op = beta;
  c.p_idle_when_helped = p_idle;
  return c;
}

LoopConfig loop_with(double alpha) {
  LoopConfig c;
  c.controller.alpha = alpha;
  return c;
}

std::string serialized(const EpisodeLog& log) {
  std::ostringstream out;
  write_log(out, log);
  return out.str();
}

}  // namespace

TEST_CASE("episode: pure teleoperation with an ideal operator") {
  const Scenario sc = fixtures::tabletop4();
  for (std::size_t x = 0; x < sc.state_count(); ++x) {
    const EpisodeLog log = run_episode(sc, loop_with(0.0), op(sc.grasp(x).id, 60.0, 0.0), 5);
    CAPTURE(sc.grasp(x).id);
    CHECK(log.outcome.kind == OutcomeKind::Success);
    for (const TickRecord& r : log.records) CHECK(r.u_star == r.u_h_raw);
  }
}

TEST_CASE("episode: idle operator at high alpha succeeds with mostly idle ticks") {
  const Scenario sc = fixtures::tabletop4();
  for (std::size_t x = 0; x < sc.state_count(); ++x) {
    const EpisodeLog log = run_episode(sc, loop_with(0.99), op(sc.grasp(x).id, 5.0, 1.0), 9);
    CAPTURE(sc.grasp(x).id);
    REQUIRE(log.outcome.kind == OutcomeKind::Success);
    CHECK(idle_ticks(log) * 2 > log.records.size());
  }
}

TEST_CASE("episode: forced timeout") {
  const Scenario sc = fixtures::tabletop4();
  LoopConfig c = loop_with(0.5);
  c.max_ticks = 1;
  const EpisodeLog log = run_episode(sc, c, op("A_top", 5.0, 0.0), 1);
  CHECK(log.outcome.kind == OutcomeKind::Timeout);
  CHECK(log.records.size() == 1);
  CHECK_THROWS_AS(completion_effort(log), NotSuccessful);
}

TEST_CASE("episode: unknown ids are configuration errors") {
  const Scenario sc = fixtures::tabletop4();
  CHECK_THROWS_AS(run_episode(sc, loop_with(0.5), op("Z_top", 5.0, 0.0), 1), ConfigError);
  EpisodeOptions opts;
  opts.target_goal_id = "Z";
  CHECK_THROWS_AS(run_episode(sc, loop_with(0.5), op("A_top", 5.0, 0.0), 1, opts), ConfigError);
}

TEST_CASE("episode: log invariants and success condition") {
  const Scenario sc = fixtures::tabletop4();
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    LoopConfig c = loop_with(0.25 * static_cast<double>(seed % 4));
    c.max_ticks = seed == 3 ? 20 : 2400;
    const EpisodeLog log = run_episode(sc, c, op(sc.grasp(seed).id, 5.0, 0.5), seed);
    for (std::size_t i = 1; i < log.records.size(); ++i) CHECK(log.records[i].tick > log.records[i - 1].tick);
    const Pose& last = log.records.back().pose;
    const Goal& target = sc.goals()[sc.goal_index(log.header.target_goal_id)];
    bool any = false;
    for (const Grasp& g : target.grasps) any = any || grasp_succeeded(last, g, c.success_tolerance);
    CHECK(any == (log.outcome.kind == OutcomeKind::Success));
    CHECK(log.outcome.ticks == log.records.size());
  }
}

TEST_CASE("episode: same seed gives identical logs; replay reproduces them") {
  const Scenario sc = fixtures::tabletop4();
  const EpisodeLog a = run_episode(sc, loop_with(0.5), op("C_side", 5.0, 0.8), 77);
  const EpisodeLog b = run_episode(sc, loop_with(0.5), op("C_side", 5.0, 0.8), 77);
  CHECK(serialized(a) == serialized(b));
  const ReplayReport r = replay(a);
  CHECK(r.identical);

  // And after a round trip through the text format.
  std::istringstream in(serialized(a));
  const EpisodeLog loaded = read_log(in);
  CHECK(serialized(loaded) == serialized(a));
  CHECK(replay(loaded).identical);
}

TEST_CASE("episode: replay detects tampering") {
  const Scenario sc = fixtures::tabletop4();
  EpisodeLog log = run_episode(sc, loop_with(0.5), op("A_top", 5.0, 0.0), 3);
  REQUIRE(log.records.size() > 5);
  log.records[4].pose.position.x() += 1e-12;
  const ReplayReport r = replay(log);
  CHECK_FALSE(r.identical);
  REQUIRE(r.first_mismatch_tick);
  CHECK(*r.first_mismatch_tick == 4);
}

TEST_CASE("episode: scripted input matches the simulated operator's stream") {
  const Scenario sc = fixtures::tabletop4();
  const EpisodeLog sim = run_episode(sc, loop_with(0.25), op("D_side", 5.0, 0.3), 11);
  const std::vector<ScriptedInput> script = input_stream(sim);
  const EpisodeLog scripted = run_scripted_episode(sc, sim.header.loop, sc.goal_index("D"), script);
  REQUIRE(scripted.records.size() == sim.records.size());
  for (std::size_t i = 0; i < sim.records.size(); ++i) {
    CHECK(record_to_json(scripted.records[i]) == record_to_json(sim.records[i]));
  }
  CHECK(outcome_to_json(scripted.outcome) == outcome_to_json(sim.outcome));
}

TEST_CASE("episode: a goal switch mid-episode ends at the new goal") {
  const Scenario sc = fixtures::tabletop4();
  OperatorConfig c = op("A_top", 5.0, 0.0);
  c.goal_switch_tick = 15;
  c.switched_grasp_id = "B_top";
  const EpisodeLog log = run_episode(sc, loop_with(0.5), c, 2);
  CHECK(log.header.target_goal_id == "B");
  CHECK(log.outcome.kind == OutcomeKind::Success);
  CHECK(log.outcome.grasp_id.rfind("B_", 0) == 0);
}

TEST_CASE("loop: idle input with no engagement leaves the pose unchanged") {
  const Scenario sc = fixtures::tabletop4();
  SharedControlLoop loop(sc, loop_with(0.5), 0);
  for (int i = 0; i < 10; ++i) loop.step(Action{}, ControlMode::Position);
  CHECK(loop.pose() == sc.start_pose());
  CHECK_FALSE(loop.engagement().engaged);
  CHECK(loop.belief().probs.isApprox(Belief::uniform(sc.state_count()).probs));
}

TEST_CASE("loop: input outside the active mode or limits is restricted and clamped") {
  const Scenario sc = fixtures::tabletop4();
  SharedControlLoop loop(sc, loop_with(0.0), 0);
  const TickRecord& r = loop.step(Action{Vec3(3, 0, 0), Vec3(1, 1, 1)}, ControlMode::Position);
  CHECK(r.u_h_raw.linear.norm() == doctest::Approx(0.25));
  CHECK(r.u_h_raw.angular.isZero(0.0));
}

TEST_CASE("loop: stepping a finished episode throws") {
  const Scenario sc = fixtures::tabletop4();
  LoopConfig c = loop_with(0.0);
  c.max_ticks = 1;
  SharedControlLoop loop(sc, c, 0);
  loop.step(Action{}, ControlMode::Position);
  CHECK(loop.finished());
  CHECK_THROWS_AS(loop.step(Action{}, ControlMode::Position), SessionClosed);
}
