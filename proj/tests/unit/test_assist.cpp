#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "sharedctl/assist.hpp"

using namespace sharedctl;
using fixtures::about_z;
using fixtures::at;

namespace {

GoalPosterior posterior(std::initializer_list<double> p) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(p.size()));
  Eigen::Index i = 0;
  for (double x : p) v[i++] = x;
  return GoalPosterior{v};
}

Belief belief(std::initializer_list<double> p) { return Belief{posterior(p).probs}; }

// Time-based path length: each segment costs whichever of its translation and
// rotation takes longer, expressed as distance at v_max.
double path_length(const Pose& start, const Grasp& grasp, const ActionLimits& lim) {
  double total = 0.0;
  Pose from = start;
  for (const Pose& k : grasp.keypoints) {
    const double lin = (k.position - from.position).norm();
    const double ang = geodesic_angle(from.orientation, k.orientation);
    total += std::max(lin, ang * lim.linear / lim.angular);
    from = k;
  }
  return total;
}

// Drives s with u_r alone; returns ticks until grasp_succeeded, or -1.
long drive(const Scenario& sc, std::size_t state, Pose s, const AssistOptions& options,
           std::vector<std::size_t>* visited = nullptr, long limit = 100000) {
  const WorldModel world = sc.world();
  EngagementState eng;
  eng.engaged = EngagedTarget{sc.goal_of(state), state};
  const Grasp& g = sc.grasp(state);
  for (long t = 1; t <= limit; ++t) {
    const std::size_t before = eng.next_keypoint;
    eng = advance_keypoint(eng, s, g);
    if (visited && eng.next_keypoint != before) {
      for (std::size_t k = before; k < eng.next_keypoint; ++k) visited->push_back(k);
    }
    s = world.step(s, assist_action(s, eng, sc, world, ControlMode::Position, options));
    if (grasp_succeeded(s, g)) {
      if (visited) {
        for (std::size_t k = eng.next_keypoint; k < g.keypoints.size(); ++k) visited->push_back(k);
      }
      return t;
    }
  }
  return -1;
}

}  // namespace

TEST_CASE("update_engagement: threshold crossing") {
  const Scenario sc = fixtures::two_by_two();
  const EngagementState e = update_engagement({}, posterior({0.6, 0.4}), belief({0.4, 0.2, 0.2, 0.2}), sc);
  REQUIRE(e.engaged);
  CHECK(e.engaged->goal == 0);
  CHECK(e.engaged->state == 0);
  CHECK(e.next_keypoint == 0);
}

TEST_CASE("update_engagement: exactly 0.5 stays disengaged") {
  const Scenario sc = fixtures::two_by_two();
  const EngagementState e = update_engagement({}, posterior({0.5, 0.5}), belief({0.25, 0.25, 0.25, 0.25}), sc);
  CHECK_FALSE(e.engaged);
}

TEST_CASE("update_engagement: losing the majority switches goals") {
  const Scenario sc = fixtures::two_by_two();
  EngagementState e = update_engagement({}, posterior({0.6, 0.4}), belief({0.3, 0.3, 0.2, 0.2}), sc);
  REQUIRE(e.engaged);
  e.next_keypoint = 1;
  const EngagementState next =
      update_engagement(e, posterior({0.45, 0.55}), belief({0.2, 0.25, 0.15, 0.4}), sc);
  REQUIRE(next.engaged);
  CHECK(next.engaged->goal == 1);
  CHECK(next.engaged->state == 3);
  CHECK(next.next_keypoint == 0);
}

TEST_CASE("update_engagement: hysteresis holds a goal just below threshold") {
  const Scenario sc = fixtures::two_by_two();
  EngagementConfig cfg;
  cfg.hysteresis = 0.1;
  const EngagementState e = update_engagement({}, posterior({0.6, 0.4}), belief({0.3, 0.3, 0.2, 0.2}), sc, cfg);
  const EngagementState held =
      update_engagement(e, posterior({0.45, 0.55}), belief({0.2, 0.25, 0.3, 0.25}), sc, cfg);
  REQUIRE(held.engaged);
  CHECK(held.engaged->goal == 0);
  const EngagementState dropped =
      update_engagement(e, posterior({0.4, 0.6}), belief({0.2, 0.2, 0.3, 0.3}), sc, cfg);
  REQUIRE(dropped.engaged);
  CHECK(dropped.engaged->goal == 1);
}

TEST_CASE("update_engagement: grasp switch within the goal restarts sequencing") {
  const Scenario sc = fixtures::two_by_two();
  EngagementState e = update_engagement({}, posterior({0.7, 0.3}), belief({0.4, 0.3, 0.2, 0.1}), sc);
  e.next_keypoint = 1;
  const EngagementState same = update_engagement(e, posterior({0.7, 0.3}), belief({0.4, 0.3, 0.2, 0.1}), sc);
  CHECK(same.next_keypoint == 1);
  const EngagementState other = update_engagement(e, posterior({0.7, 0.3}), belief({0.3, 0.4, 0.2, 0.1}), sc);
  REQUIRE(other.engaged);
  CHECK(other.engaged->state == 1);
  CHECK(other.next_keypoint == 0);
}

TEST_CASE("update_engagement: ties within a class go to the lowest grasp") {
  const Scenario sc = fixtures::two_by_two();
  const EngagementState e = update_engagement({}, posterior({0.2, 0.8}), belief({0.1, 0.1, 0.4, 0.4}), sc);
  REQUIRE(e.engaged);
  CHECK(e.engaged->state == 2);
}

TEST_CASE("update_engagement is idempotent for a fixed posterior") {
  const Scenario sc = fixtures::two_by_two();
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    Eigen::Vector4d b(u(gen), u(gen), u(gen), u(gen));
    b /= b.sum();
    const Belief bel{b};
    const GoalPosterior post = goal_posterior(bel, sc);
    EngagementState start;
    if (i % 2) start.engaged = EngagedTarget{gen() % 2, 0};
    if (start.engaged) start.engaged->state = sc.class_begin(start.engaged->goal);
    const EngagementState once = update_engagement(start, post, bel, sc);
    const EngagementState twice = update_engagement(once, post, bel, sc);
    CHECK(once == twice);
  }
}

TEST_CASE("advance_keypoint: examples") {
  const Scenario sc = fixtures::single_three_keypoints();
  const Grasp& g = sc.grasp(0);
  EngagementState e;
  e.engaged = EngagedTarget{0, 0};
  CHECK(advance_keypoint(e, at(0.1, 0.5, 0.1), g).next_keypoint == 0);
  CHECK(advance_keypoint(e, g.keypoints[0], g).next_keypoint == 1);

  // Colocated first two keypoints are passed in one call.
  Grasp colocated = g;
  colocated.keypoints[1] = colocated.keypoints[0];
  CHECK(advance_keypoint(e, colocated.keypoints[0], colocated).next_keypoint == 2);

  // Never past the final keypoint, never backwards.
  EngagementState last = e;
  last.next_keypoint = 2;
  CHECK(advance_keypoint(last, g.keypoints[2], g).next_keypoint == 2);
  CHECK(advance_keypoint(last, at(0.1, 0.5, 0.1), g).next_keypoint == 2);
}

TEST_CASE("assist_action: examples") {
  std::vector<Goal> goals{Goal{"G", "G", Vec3(1, 0, 0),
                               {fixtures::grasp("g", {at(0.5, 0, 0), at(1, 0, 0)})}}};
  const Scenario sc("line", goals, at(0, 0, 0), Bounds{Vec3(-2, -2, -2), Vec3(2, 2, 2)});
  const WorldModel world = sc.world();
  EngagementState e;
  CHECK(assist_action(Pose{}, e, sc, world, ControlMode::Position).is_null());

  e.engaged = EngagedTarget{0, 0};
  e.next_keypoint = 1;
  const Action u = assist_action(Pose{}, e, sc, world, ControlMode::Position);
  CHECK(u.linear.x() == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(u.linear.y() == 0.0);
  CHECK(u.linear.z() == 0.0);
  CHECK(u.angular.isZero(0.0));

  const Pose near = at(0.995, 0, 0);
  const Action land = assist_action(near, e, sc, world, ControlMode::Position);
  CHECK(land.linear.norm() <= 0.25);
  CHECK(world.step(near, land).position.isApprox(Vec3(1, 0, 0), 1e-12));
}

TEST_CASE("assist_action: rotation heads the short way and lands") {
  std::vector<Goal> goals{Goal{"G", "G", Vec3::Zero(),
                               {fixtures::grasp("g", {at(0, 0, 0, about_z(2.0)), at(0, 0, 0, about_z(2.0))})}}};
  const Scenario sc("turn", goals, at(0, 0, 0), Bounds{Vec3(-1, -1, -1), Vec3(1, 1, 1)});
  const WorldModel world = sc.world();
  EngagementState e;
  e.engaged = EngagedTarget{0, 0};
  Pose s;
  const Action u = assist_action(s, e, sc, world, ControlMode::Angular);
  CHECK(u.angular.z() == doctest::Approx(1.0));
  for (int t = 0; t < 45; ++t) s = world.step(s, assist_action(s, e, sc, world, ControlMode::Angular));
  CHECK(geodesic_angle(s.orientation, about_z(2.0)) < 1e-9);
}

TEST_CASE("assist_action: bounded and strictly improving from random poses") {
  const Scenario sc = fixtures::tabletop4();
  const WorldModel world = sc.world();
  std::mt19937_64 gen(22);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p = sc.bounds().lower + (sc.bounds().upper - sc.bounds().lower).cwiseProduct(Vec3(u(gen), u(gen), u(gen)));
    const Pose s{p, Quat(Eigen::AngleAxisd(u(gen) * 3.0, Vec3(u(gen), u(gen), u(gen) + 0.1).normalized()))};
    EngagementState e;
    const std::size_t state = gen() % sc.state_count();
    e.engaged = EngagedTarget{sc.goal_of(state), state};
    e.next_keypoint = gen() % sc.grasp(state).keypoints.size();
    const Pose& target = sc.grasp(state).keypoints[e.next_keypoint];
    for (const AssistOptions opt : {AssistOptions{false, true}, AssistOptions{true, true}}) {
      const Action a = assist_action(s, e, sc, world, ControlMode::Position, opt);
      CHECK(a.linear.norm() <= world.limits.linear * (1 + 1e-12));
      CHECK(a.angular.norm() <= world.limits.angular * (1 + 1e-12));
      const double lin = (target.position - s.position).norm();
      const double ang = geodesic_angle(s.orientation, target.orientation);
      const bool within_reach = lin <= world.limits.linear * world.dt && ang <= world.limits.angular * world.dt;
      if (!within_reach) CHECK(world.distance(world.step(s, a), target) < world.distance(s, target));
    }
  }
}

TEST_CASE("assistance alone reaches every keypoint in order within the bound") {
  for (const Scenario& sc : {fixtures::tabletop4(), fixtures::single_three_keypoints(), fixtures::two_by_two()}) {
    for (std::size_t x = 0; x < sc.state_count(); ++x) {
      const Grasp& g = sc.grasp(x);
      const WorldModel world = sc.world();
      const double bound = std::ceil(path_length(sc.start_pose(), g, world.limits) /
                                     (world.limits.linear * world.dt)) +
                           3.0 * static_cast<double>(g.keypoints.size());
      std::vector<std::size_t> visited;
      const long ticks = drive(sc, x, sc.start_pose(), {}, &visited);
      CAPTURE(g.id);
      CHECK(ticks > 0);
      CHECK(static_cast<double>(ticks) <= bound);
      std::vector<std::size_t> expected(g.keypoints.size());
      std::iota(expected.begin(), expected.end(), 0);
      CHECK(visited == expected);
    }
  }
}

TEST_CASE("discrete assistance also reaches every tabletop grasp") {
  const Scenario sc = fixtures::tabletop4();
  for (std::size_t x = 0; x < sc.state_count(); ++x) {
    CAPTURE(sc.grasp(x).id);
    CHECK(drive(sc, x, sc.start_pose(), AssistOptions{true, true}, nullptr, 5000) > 0);
  }
}

TEST_CASE("remaining_keypoints follows the sequencing index") {
  const Scenario sc = fixtures::single_three_keypoints();
  EngagementState e;
  CHECK(remaining_keypoints(e, sc).empty());
  e.engaged = EngagedTarget{0, 0};
  CHECK(remaining_keypoints(e, sc).size() == 3);
  e.next_keypoint = 2;
  const auto rest = remaining_keypoints(e, sc);
  REQUIRE(rest.size() == 1);
  CHECK(rest[0] == sc.grasp(0).keypoints[2]);
}
