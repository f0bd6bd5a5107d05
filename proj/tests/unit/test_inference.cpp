#include <doctest.h>

#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "sharedctl/errors.hpp"
#include "sharedctl/inference.hpp"
#include "sharedctl/oracle/hmm_oracle.hpp"

using namespace sharedctl;
using fixtures::at;

namespace {

HmmParams params(double t_grasp, double t_goal, double beta = 1.0) {
  HmmParams p;
  p.t_grasp = t_grasp;
  p.t_goal = t_goal;
  p.beta = beta;
  return p;
}

void check_row_stochastic(const TransitionMatrix& t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) {
      CHECK(t.at(i, j) >= 0.0);
      sum += t.at(i, j);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

}  // namespace

TEST_CASE("transition matrix: study setting on 2 goals x 2 grasps") {
  const std::array<std::size_t, 2> sizes{2, 2};
  const TransitionMatrix t = build_transition_matrix(sizes, params(0.01, 0.0));
  const double expected[4][4] = {{0.99, 0.01, 0, 0}, {0.01, 0.99, 0, 0}, {0, 0, 0.99, 0.01}, {0, 0, 0.01, 0.99}};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) CHECK(t.at(i, j) == doctest::Approx(expected[i][j]).epsilon(1e-15));
  }
  check_row_stochastic(t);
}

TEST_CASE("transition matrix: t_grasp 0.1, t_goal 0.2 on 2 goals x 2 grasps") {
  const std::array<std::size_t, 2> sizes{2, 2};
  const TransitionMatrix t = build_transition_matrix(sizes, params(0.1, 0.2));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double expected = i == j ? 0.7 : (i / 2 == j / 2 ? 0.1 : 0.1);
      CHECK(t.at(i, j) == doctest::Approx(expected).epsilon(1e-15));
    }
  }
  check_row_stochastic(t);
}

TEST_CASE("transition matrix: single state") {
  const std::array<std::size_t, 1> sizes{1};
  const TransitionMatrix t = build_transition_matrix(sizes, params(0.0, 0.0));
  REQUIRE(t.size() == 1);
  CHECK(t.at(0, 0) == 1.0);
}

TEST_CASE("transition matrix: degenerate shapes fold mass and stay stochastic") {
  SUBCASE("singleton class keeps t_grasp on the diagonal") {
    const std::array<std::size_t, 2> sizes{2, 1};
    const TransitionMatrix t = build_transition_matrix(sizes, params(0.1, 0.2));
    CHECK(t.at(2, 2) == doctest::Approx(0.8));
    CHECK(t.at(2, 0) == doctest::Approx(0.1));
    CHECK(t.at(2, 1) == doctest::Approx(0.1));
    CHECK(t.at(0, 2) == doctest::Approx(0.2));
    check_row_stochastic(t);
  }
  SUBCASE("single goal spreads t_goal within the class") {
    const std::array<std::size_t, 1> sizes{3};
    const TransitionMatrix t = build_transition_matrix(sizes, params(0.1, 0.2));
    CHECK(t.at(0, 0) == doctest::Approx(0.7));
    CHECK(t.at(0, 1) == doctest::Approx(0.15));
    check_row_stochastic(t);
  }
  SUBCASE("single singleton goal is the identity") {
    const std::array<std::size_t, 1> sizes{1};
    const TransitionMatrix t = build_transition_matrix(sizes, params(0.3, 0.4));
    CHECK(t.at(0, 0) == doctest::Approx(1.0));
  }
}

TEST_CASE("transition matrix: invalid parameters") {
  const std::array<std::size_t, 2> sizes{2, 2};
  CHECK_THROWS_AS(build_transition_matrix(sizes, params(0.6, 0.5)), InvalidParams);
  CHECK_THROWS_AS(build_transition_matrix(sizes, params(-0.1, 0.0)), InvalidParams);
  const std::array<std::size_t, 0> none{};
  CHECK_THROWS_AS(build_transition_matrix(none, params(0.0, 0.0)), InvalidParams);
}

TEST_CASE("transition matrix matches the entry-wise reference on random shapes") {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<std::size_t> goals(1, 5);
  std::uniform_int_distribution<std::size_t> size(1, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    std::vector<std::size_t> sizes(goals(gen));
    for (auto& s : sizes) s = size(gen);
    const double a = u(gen);
    const HmmParams p = params(a, (1.0 - a) * u(gen));
    const TransitionMatrix t = build_transition_matrix(sizes, p);
    const Eigen::MatrixXd ref = oracle::reference_transitions(sizes, p);
    CHECK((t.matrix() - ref).cwiseAbs().maxCoeff() <= 1e-15);
    check_row_stochastic(t);
  }
}

TEST_CASE("reward: examples") {
  WorldModel world;
  world.bounds = Bounds{Vec3(-2, -2, -2), Vec3(2, 2, 2)};
  world.dt = 0.05;
  const Pose origin;
  const Pose target = at(1, 0, 0);
  CHECK(reward(world, origin, Action{}, target) == 0.0);
  // 4 m/s for 0.05 s moves 0.2 m.
  CHECK(reward(world, origin, Action{Vec3(4, 0, 0), Vec3::Zero()}, target) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(reward(world, origin, Action{Vec3(-4, 0, 0), Vec3::Zero()}, target) == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("boltzmann: hand-evaluated softmax values") {
  const std::vector<double> two{0.0, std::log(2.0)};
  const auto p2 = boltzmann(two, 1.0);
  CHECK(p2[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(p2[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  const std::vector<double> three{0.0, 0.0, std::log(2.0)};
  const auto p3 = boltzmann(three, 1.0);
  CHECK(p3[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p3[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p3[2] == doctest::Approx(0.5).epsilon(1e-15));
  // Overflow safety.
  const std::vector<double> huge{1e6, 1e6 + std::log(2.0)};
  const auto ph = boltzmann(huge, 1.0);
  CHECK(ph[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("observation likelihood: equal rewards give 1/|U|") {
  // A target coinciding with the start pose in a box that pins every action:
  // the bounds collapse to a point, so every translation is clamped away.
  WorldModel world;
  world.bounds = Bounds{Vec3::Zero(), Vec3::Zero()};
  const Pose s;
  const auto actions = world.actions(ControlMode::Position);
  for (const Action& u : actions) {
    CHECK(observation_likelihood(world, s, u, at(0.5, 0.5, 0.5), actions, 1.0) ==
          doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  }
}

TEST_CASE("observation likelihood: action outside U") {
  WorldModel world;
  const auto actions = world.actions(ControlMode::Position);
  CHECK_THROWS_AS(observation_likelihood(world, Pose{}, Action{Vec3(0.1, 0, 0), Vec3::Zero()}, at(1, 0, 0), actions, 1.0),
                  ActionNotInSet);
}

TEST_CASE("observation likelihood sums to one and is shift invariant") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  WorldModel world;
  for (int i = 0; i < 300; ++i) {
    const Pose s = at(u(gen), u(gen), u(gen), fixtures::about_z(u(gen) * 3));
    const Pose x = at(u(gen), u(gen), u(gen), fixtures::about_z(u(gen) * 3));
    const ControlMode mode = i % 2 ? ControlMode::Position : ControlMode::Angular;
    const auto actions = world.actions(mode);
    const double beta = 1.0 + 10.0 * std::abs(u(gen));
    for (bool normalize : {false, true}) {
      double sum = 0.0;
      for (const Action& a : actions) sum += observation_likelihood(world, s, a, x, actions, beta, normalize);
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
    std::vector<double> r(actions.size());
    for (std::size_t k = 0; k < actions.size(); ++k) r[k] = reward(world, s, actions[k], x);
    std::vector<double> shifted = r;
    const double c = 100.0 * u(gen);
    for (double& v : shifted) v += c;
    const auto p = boltzmann(r, beta);
    const auto q = boltzmann(shifted, beta);
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(std::abs(p[k] - q[k]) <= 1e-9);
  }
}

TEST_CASE("forward update: examples") {
  const std::array<std::size_t, 2> sizes{1, 1};
  const TransitionMatrix identity = build_transition_matrix(sizes, params(0.0, 0.0));
  const Belief uniform = Belief::uniform(2);
  const Belief same = forward_update(uniform, Eigen::Vector2d(0.3, 0.3), identity);
  CHECK(same.probs[0] == doctest::Approx(0.5));
  CHECK(same.probs[1] == doctest::Approx(0.5));
  const Belief bayes = forward_update(uniform, Eigen::Vector2d(2.0 / 3.0, 1.0 / 3.0), identity);
  CHECK(bayes.probs[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(bayes.probs[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("forward update: underflow is reported") {
  const std::array<std::size_t, 2> sizes{1, 1};
  const TransitionMatrix identity = build_transition_matrix(sizes, params(0.0, 0.0));
  CHECK_THROWS_AS(forward_update(Belief::uniform(2), Eigen::Vector2d(0.0, 0.0), identity), DegenerateBelief);
  CHECK_THROWS_AS(forward_update(Belief::uniform(2), Eigen::Vector2d(1e-310, 0.0), identity), DegenerateBelief);
}

TEST_CASE("forward update matches brute-force path enumeration") {
  Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    const oracle::HmmInstance inst = oracle::random_instance(rng);
    const Eigen::VectorXd expected = oracle::brute_force_posterior(inst);
    const Eigen::VectorXd actual = oracle::filtered_posterior(inst);
    CHECK((expected - actual).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(std::abs(actual.sum() - 1.0) <= 1e-9);
    CHECK(actual.minCoeff() >= 0.0);
  }
}

TEST_CASE("naive likelihoods agree with the library on a concrete scenario") {
  const Scenario sc = fixtures::two_by_two();
  const oracle::HmmInstance inst{sc, HmmParams{}, kDefaultRotationWeight, {}};
  const WorldModel world = inst.world();
  for (ControlMode mode : {ControlMode::Position, ControlMode::Angular}) {
    for (const Action& u : world.actions(mode)) {
      const oracle::Observation obs{sc.start_pose(), u, mode};
      const Eigen::VectorXd lib = observation_likelihoods(sc, world, obs.pose, u, mode, inst.params);
      CHECK((lib - oracle::naive_likelihoods(inst, obs)).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("goal posterior: examples") {
  const Scenario sc = fixtures::two_plus_one();
  const GoalPosterior p = goal_posterior(Belief{Eigen::Vector3d(0.3, 0.2, 0.5)}, sc);
  CHECK(p.probs[0] == doctest::Approx(0.5));
  CHECK(p.probs[1] == doctest::Approx(0.5));
  CHECK(p.argmax() == 0);  // ties go to the lower index
  const GoalPosterior q = goal_posterior(Belief{Eigen::Vector3d(0.0, 0.0, 1.0)}, sc);
  CHECK(q.probs[1] == 1.0);
  const Scenario single = fixtures::single_three_keypoints();
  CHECK(goal_posterior(Belief::uniform(1), single).probs[0] == 1.0);
}

TEST_CASE("goal posterior is invariant to relabeling grasps within a class") {
  const Scenario sc = fixtures::two_by_two();
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Eigen::Vector4d b(u(gen), u(gen), u(gen), u(gen));
    b /= b.sum();
    const Eigen::Vector4d swapped(b[1], b[0], b[3], b[2]);
    const GoalPosterior p = goal_posterior(Belief{b}, sc);
    const GoalPosterior q = goal_posterior(Belief{swapped}, sc);
    CHECK(std::abs(p.probs.sum() - 1.0) <= 1e-12);
    CHECK((p.probs - q.probs).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("with t_goal = 0 a goal with zero mass stays at zero") {
  const Scenario sc = fixtures::two_by_two();
  const WorldModel world = sc.world();
  const HmmParams p = params(0.2, 0.0, 2.0);
  const TransitionMatrix t = build_transition_matrix(sc, p);
  Belief b{Eigen::Vector4d(0.4, 0.6, 0.0, 0.0)};
  std::mt19937_64 gen(14);
  for (int i = 0; i < 100; ++i) {
    const ControlMode mode = i % 3 ? ControlMode::Position : ControlMode::Angular;
    const auto actions = world.actions(mode);
    b = forward_update(b, actions[gen() % actions.size()], mode, sc.start_pose(), t, sc, world, p);
    CHECK(goal_posterior(b, sc).probs[1] == 0.0);
  }
}

TEST_CASE("beta = 0 reduces the update to the transition step") {
  const Scenario sc = fixtures::two_by_two();
  const WorldModel world = sc.world();
  const HmmParams p = params(0.1, 0.05, 0.0);
  const TransitionMatrix t = build_transition_matrix(sc, p);
  const Belief b{Eigen::Vector4d(0.1, 0.2, 0.3, 0.4)};
  for (const Action& u : world.actions(ControlMode::Position)) {
    const Belief updated = forward_update(b, u, ControlMode::Position, sc.start_pose(), t, sc, world, p);
    const Belief predicted = transition_step(b, t);
    CHECK((updated.probs - predicted.probs).cwiseAbs().maxCoeff() <= 1e-15);
  }
}
