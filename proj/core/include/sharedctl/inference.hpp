#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sharedctl/scenario.hpp"
#include "sharedctl/workspace.hpp"

namespace sharedctl {

/// Goal-inference HMM parameters.
struct HmmParams {
  double t_grasp = 0.01;  // probability of switching grasps within a goal, per update
  double t_goal = 0.0;    // probability of switching goals, per update
  double beta = 1.0;      // Boltzmann rationality of the observation model
  /// Apply the transition step on ticks without user input (belief drifts).
  bool idle_transition = false;
  /// Express rewards in units of the largest one-tick displacement in the
  /// action set, so beta is dimensionless and independent of dt and speed.
  bool normalize_reward = true;

  /// Throws InvalidParams.
  void validate() const;
};

/// Row-stochastic matrix over grasp states: at(i, j) = p(next = j | current = i).
class TransitionMatrix {
 public:
  explicit TransitionMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {}

  double at(std::size_t from, std::size_t to) const {
    return entries_(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
  }
  std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
  const Eigen::MatrixXd& matrix() const { return entries_; }

 private:
  Eigen::MatrixXd entries_;
};

/// Posterior over grasp states, indexed like Scenario states.
struct Belief {
  Eigen::VectorXd probs;

  static Belief uniform(std::size_t states);
};

/// Posterior over goals, indexed like Scenario::goals().
struct GoalPosterior {
  Eigen::VectorXd probs;

  /// Index of the most probable goal; lowest index wins ties.
  std::size_t argmax() const;
};

/// Class-structured transition model. Singleton classes keep their t_grasp
/// mass on the diagonal; with a single goal the t_goal mass is spread over the
/// other grasps of the class (or kept on the diagonal if the class is a singleton).
TransitionMatrix build_transition_matrix(std::span<const std::size_t> class_sizes,
                                         const HmmParams& params);
TransitionMatrix build_transition_matrix(const Scenario& scenario, const HmmParams& params);

/// Progress toward target from taking u in s: dist(s, x) - dist(tau(s, u), x).
double reward(const WorldModel& world, const Pose& s, const Action& u, const Pose& target);

/// Largest single-tick displacement (in distance units) of any action in U.
double reward_unit(const WorldModel& world, std::span<const Action> actions);

/// Softmax of beta * rewards, evaluated with max-subtraction.
std::vector<double> boltzmann(std::span<const double> rewards, double beta);

/// p(u_h | target) under the Boltzmann observation model over U.
/// Throws ActionNotInSet when u_h is not an element of U.
double observation_likelihood(const WorldModel& world, const Pose& s, const Action& u_h,
                              const Pose& target, std::span<const Action> actions, double beta,
                              bool normalize_reward = false);

/// p(u_h | x) for every grasp state x, targeting each grasp's final keypoint.
/// U is the canonical action set of the mode u_h was issued in.
Eigen::VectorXd observation_likelihoods(const Scenario& scenario, const WorldModel& world,
                                        const Pose& s, const Action& u_h, ControlMode mode,
                                        const HmmParams& params);

/// Prediction only: b'(x) = sum_x' b(x') T(x' -> x).
Belief transition_step(const Belief& belief, const TransitionMatrix& transitions);

/// One forward-algorithm step from precomputed likelihoods. Throws
/// DegenerateBelief when the normalizer falls below 1e-300.
Belief forward_update(const Belief& belief, const Eigen::VectorXd& likelihoods,
                      const TransitionMatrix& transitions);

/// One forward-algorithm step for a snapped user action observed at pose s.
Belief forward_update(const Belief& belief, const Action& u_h, ControlMode mode, const Pose& s,
                      const TransitionMatrix& transitions, const Scenario& scenario,
                      const WorldModel& world, const HmmParams& params);

/// Marginalizes grasp states onto their goals.
GoalPosterior goal_posterior(const Belief& belief, const Scenario& scenario);

}  // namespace sharedctl
