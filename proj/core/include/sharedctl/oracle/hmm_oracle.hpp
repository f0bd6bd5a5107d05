#pragma once

// Reference implementations for checking the goal-inference filter. Nothing
// here is used by the library itself; everything is computed the slow,
// obvious way so it can serve as ground truth.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sharedctl/inference.hpp"
#include "sharedctl/rng.hpp"
#include "sharedctl/scenario.hpp"

namespace sharedctl::oracle {

struct Observation {
  Pose pose;  // where the operator was when issuing the action
  Action action;
  ControlMode mode = ControlMode::Position;
};

struct HmmInstance {
  Scenario scenario;
  HmmParams params;
  double rotation_weight = kDefaultRotationWeight;
  std::vector<Observation> observations;

  WorldModel world() const { return scenario.world(rotation_weight); }
};

/// Transition matrix written entry by entry from the class-structure rules.
Eigen::MatrixXd reference_transitions(std::span<const std::size_t> class_sizes,
                                      const HmmParams& params);

/// p(u | x) for every state, as exp(beta r) / sum exp(beta r) with no
/// max-subtraction, distances computed through axis-angle conversion.
Eigen::VectorXd naive_likelihoods(const HmmInstance& instance, const Observation& obs);

/// Posterior over the final hidden state by summing over every hidden path,
/// starting from a uniform prior.
Eigen::VectorXd brute_force_posterior(const HmmInstance& instance);

/// The library's recursive filter over the same observations.
Eigen::VectorXd filtered_posterior(const HmmInstance& instance);

/// Random instance with at most max_states grasp states and max_observations steps.
HmmInstance random_instance(Rng& rng, std::size_t max_states = 4, std::size_t max_observations = 6);

struct OracleReport {
  std::size_t instances = 0;
  double max_abs_error = 0.0;
  double seconds = 0.0;
};

OracleReport run_hmm_oracle_suite(std::size_t instances = 200, std::uint64_t seed = 20240601);

}  // namespace sharedctl::oracle
