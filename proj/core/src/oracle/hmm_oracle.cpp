#include "sharedctl/oracle/hmm_oracle.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

namespace sharedctl::oracle {

namespace {

std::size_t class_of(std::span<const std::size_t> sizes, std::size_t state) {
  std::size_t g = 0;
  while (state >= sizes[g]) state -= sizes[g++];
  return g;
}

double angle_between(const Quat& a, const Quat& b) {
  const Eigen::AngleAxisd rel(a.inverse() * b);
  const double theta = std::fmod(std::abs(rel.angle()), 2.0 * std::numbers::pi);
  return std::min(theta, 2.0 * std::numbers::pi - theta);
}

double reference_distance(const Pose& a, const Pose& b, double rotation_weight) {
  const Vec3 d = a.position - b.position;
  return std::sqrt(d.dot(d)) + rotation_weight * angle_between(a.orientation, b.orientation);
}

double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

Quat random_orientation(Rng& rng) {
  const Vec3 axis = Vec3(uniform_in(rng, -1, 1), uniform_in(rng, -1, 1), uniform_in(rng, -1, 1));
  const double angle = uniform_in(rng, 0.0, std::numbers::pi);
  if (axis.norm() < 1e-6) return Quat::Identity();
  return Quat(Eigen::AngleAxisd(angle, axis.normalized()));
}

}  // namespace

Eigen::MatrixXd reference_transitions(std::span<const std::size_t> class_sizes,
                                      const HmmParams& params) {
  std::size_t n = 0;
  for (std::size_t s : class_sizes) n += s;
  const std::size_t goals = class_sizes.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t gi = class_of(class_sizes, i);
    const double own = static_cast<double>(class_sizes[gi]);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t gj = class_of(class_sizes, j);
      double p = 0.0;
      if (i == j) {
        p = 1.0 - params.t_grasp - params.t_goal;
        if (own == 1.0) p += params.t_grasp;
        if (own == 1.0 && goals == 1) p += params.t_goal;
      } else if (gi == gj) {
        p = params.t_grasp / (own - 1.0);
        if (goals == 1) p += params.t_goal / (own - 1.0);
      } else {
        p = params.t_goal / static_cast<double>(goals - 1) / static_cast<double>(class_sizes[gj]);
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p;
    }
  }
  return m;
}

Eigen::VectorXd naive_likelihoods(const HmmInstance& instance, const Observation& obs) {
  const WorldModel world = instance.world();
  const CanonicalActions actions = world.actions(obs.mode);
  const double lambda = instance.rotation_weight;
  double unit = 1.0;
  if (instance.params.normalize_reward) {
    unit = 0.0;
    for (const Action& u : actions) {
      unit = std::max(unit, world.dt * (u.linear.norm() + lambda * u.angular.norm()));
    }
  }
  const Scenario& sc = instance.scenario;
  Eigen::VectorXd out(static_cast<Eigen::Index>(sc.state_count()));
  for (std::size_t x = 0; x < sc.state_count(); ++x) {
    const Pose& target = sc.grasp(x).grasp_pose();
    const double here = reference_distance(obs.pose, target, lambda);
    double numerator = 0.0;
    double total = 0.0;
    for (const Action& u : actions) {
      const double r = (here - reference_distance(world.step(obs.pose, u), target, lambda)) / unit;
      const double w = std::exp(instance.params.beta * r);
      total += w;
      if (u == obs.action) numerator = w;
    }
    out[static_cast<Eigen::Index>(x)] = numerator / total;
  }
  return out;
}

Eigen::VectorXd brute_force_posterior(const HmmInstance& instance) {
  const std::vector<std::size_t> sizes = instance.scenario.class_sizes();
  const Eigen::MatrixXd t = reference_transitions(sizes, instance.params);
  const std::size_t n = instance.scenario.state_count();
  const std::size_t steps = instance.observations.size();
  std::vector<Eigen::VectorXd> lik;
  for (const Observation& o : instance.observations) lik.push_back(naive_likelihoods(instance, o));

  // Path x_0 .. x_steps; x_0 is drawn from the uniform prior.
  std::size_t paths = 1;
  for (std::size_t k = 0; k <= steps; ++k) paths *= n;
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::vector<std::size_t> path(steps + 1);
  for (std::size_t code = 0; code < paths; ++code) {
    std::size_t rest = code;
    for (std::size_t k = 0; k <= steps; ++k) {
      path[k] = rest % n;
      rest /= n;
    }
    double p = 1.0 / static_cast<double>(n);
    for (std::size_t k = 1; k <= steps; ++k) {
      p *= t(static_cast<Eigen::Index>(path[k - 1]), static_cast<Eigen::Index>(path[k]));
      p *= lik[k - 1][static_cast<Eigen::Index>(path[k])];
    }
    mass[static_cast<Eigen::Index>(path[steps])] += p;
  }
  return mass / mass.sum();
}

Eigen::VectorXd filtered_posterior(const HmmInstance& instance) {
  const Scenario& sc = instance.scenario;
  const WorldModel world = instance.world();
  const TransitionMatrix t = build_transition_matrix(sc, instance.params);
  Belief b = Belief::uniform(sc.state_count());
  for (const Observation& o : instance.observations) {
    b = forward_update(b, o.action, o.mode, o.pose, t, sc, world, instance.params);
  }
  return b.probs;
}

HmmInstance random_instance(Rng& rng, std::size_t max_states, std::size_t max_observations) {
  const Bounds bounds{Vec3(0.0, -0.5, 0.0), Vec3(1.0, 0.5, 0.6)};
  auto random_pose = [&] {
    return Pose{Vec3(uniform_in(rng, 0.05, 0.95), uniform_in(rng, -0.45, 0.45),
                     uniform_in(rng, 0.05, 0.55)),
                random_orientation(rng)};
  };

  const std::size_t states = 1 + rng.next() % max_states;
  std::vector<Goal> goals;
  for (std::size_t x = 0; x < states; ++x) {
    // Start a new goal with probability 1/2 (always for the first state).
    if (goals.empty() || rng.uniform() < 0.5) {
      Goal g;
      g.id = "g" + std::to_string(goals.size());
      g.label = g.id;
      goals.push_back(std::move(g));
    }
    Goal& g = goals.back();
    Grasp grasp;
    grasp.id = g.id + "_k" + std::to_string(g.grasps.size());
    grasp.goal_id = g.id;
    grasp.keypoints = {random_pose(), random_pose()};
    g.grasps.push_back(std::move(grasp));
  }
  for (Goal& g : goals) {
    Vec3 c = Vec3::Zero();
    for (const Grasp& gr : g.grasps) c += gr.grasp_pose().position;
    g.centroid = c / static_cast<double>(g.grasps.size());
  }

  HmmParams params;
  params.t_grasp = uniform_in(rng, 0.0, 0.3);
  params.t_goal = uniform_in(rng, 0.0, 0.3);
  params.beta = uniform_in(rng, 0.0, 8.0);
  params.normalize_reward = rng.uniform() < 0.75;

  HmmInstance inst{Scenario("oracle", std::move(goals), random_pose(), bounds), params,
                   uniform_in(rng, 0.0, 0.5), {}};
  const std::size_t steps = 1 + rng.next() % max_observations;
  const WorldModel world = inst.world();
  for (std::size_t k = 0; k < steps; ++k) {
    const ControlMode mode = rng.uniform() < 0.5 ? ControlMode::Position : ControlMode::Angular;
    const CanonicalActions actions = world.actions(mode);
    inst.observations.push_back({random_pose(), actions[rng.next() % actions.size()], mode});
  }
  return inst;
}

OracleReport run_hmm_oracle_suite(std::size_t instances, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(seed);
  OracleReport report;
  for (std::size_t i = 0; i < instances; ++i) {
    const HmmInstance inst = random_instance(rng);
    const Eigen::VectorXd expected = brute_force_posterior(inst);
    const Eigen::VectorXd actual = filtered_posterior(inst);
    report.max_abs_error = std::max(report.max_abs_error, (expected - actual).cwiseAbs().maxCoeff());
    ++report.instances;
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace sharedctl::oracle
