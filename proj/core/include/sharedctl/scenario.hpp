#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharedctl/workspace.hpp"

namespace sharedctl {

/// One expert-demonstrated way to grasp a goal object. The last keypoint is
/// the grasp pose itself; earlier ones are approach waypoints.
struct Grasp {
  std::string id;
  std::string goal_id;
  std::vector<Pose> keypoints;

  const Pose& grasp_pose() const { return keypoints.back(); }
};

struct Goal {
  std::string id;
  std::string label;
  Vec3 centroid = Vec3::Zero();
  std::vector<Grasp> grasps;
};

struct KeypointCount {
  std::size_t min = 2;
  std::size_t max = 3;
};

/// Goals and their grasps, flattened into hidden states in goal-major order:
/// state k is grasp j of goal i, with all of goal i's grasps contiguous.
class Scenario {
 public:
  /// Validates every structural invariant; throws ConfigError.
  Scenario(std::string id, std::vector<Goal> goals, Pose start_pose, Bounds bounds,
           double dt = 0.05, KeypointCount keypoints = {});

  const std::string& id() const { return id_; }
  const std::vector<Goal>& goals() const { return goals_; }
  const Pose& start_pose() const { return start_pose_; }
  const Bounds& bounds() const { return bounds_; }
  double dt() const { return dt_; }
  KeypointCount keypoint_count() const { return keypoints_; }

  std::size_t goal_count() const { return goals_.size(); }
  std::size_t state_count() const { return state_goal_.size(); }

  const Grasp& grasp(std::size_t state) const;
  std::size_t goal_of(std::size_t state) const { return state_goal_.at(state); }
  /// First state index of a goal's class; the class has goals()[g].grasps.size() states.
  std::size_t class_begin(std::size_t goal) const { return class_begin_.at(goal); }
  std::size_t class_size(std::size_t goal) const { return goals_.at(goal).grasps.size(); }
  std::vector<std::size_t> class_sizes() const;

  std::optional<std::size_t> find_goal(const std::string& goal_id) const;
  std::optional<std::size_t> find_state(const std::string& grasp_id) const;
  std::size_t goal_index(const std::string& goal_id) const;   // throws ConfigError
  std::size_t state_index(const std::string& grasp_id) const; // throws ConfigError

  WorldModel world(double rotation_weight = kDefaultRotationWeight,
                   ActionLimits limits = {}) const;

 private:
  std::string id_;
  std::vector<Goal> goals_;
  Pose start_pose_;
  Bounds bounds_;
  double dt_;
  KeypointCount keypoints_;
  std::vector<std::size_t> state_goal_;
  std::vector<std::size_t> state_grasp_;
  std::vector<std::size_t> class_begin_;
};

/// True iff s is strictly within tol of the grasp's final keypoint.
bool grasp_succeeded(const Pose& s, const Grasp& grasp, Tolerance tol = kGraspTolerance);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace sharedctl
