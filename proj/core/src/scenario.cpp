#include "sharedctl/scenario.hpp"

#include <fstream>
#include <set>
#include <utility>

#include "sharedctl/errors.hpp"
#include "sharedctl/json_io.hpp"

namespace sharedctl {

namespace {

std::string pose_outside(const std::string& owner) {
  return owner + " lies outside the scenario bounds";
}

}  // namespace

Scenario::Scenario(std::string id, std::vector<Goal> goals, Pose start_pose, Bounds bounds,
                   double dt, KeypointCount keypoints)
    : id_(std::move(id)),
      goals_(std::move(goals)),
      start_pose_(std::move(start_pose)),
      bounds_(std::move(bounds)),
      dt_(dt),
      keypoints_(keypoints) {
  if (!(dt_ > 0.0)) throw ConfigError("scenario '" + id_ + "': dt must be positive");
  if ((bounds_.lower.array() > bounds_.upper.array()).any()) {
    throw ConfigError("scenario '" + id_ + "': bounds min exceeds max");
  }
  if (goals_.empty()) throw ConfigError("scenario '" + id_ + "': no goals");
  if (!bounds_.contains(start_pose_.position)) throw ConfigError(pose_outside("start_pose"));
  if (keypoints.min < 1 || keypoints.min > keypoints.max) {
    throw ConfigError("scenario '" + id_ + "': invalid keypoint count range");
  }

  std::set<std::string> goal_ids;
  std::set<std::string> grasp_ids;
  for (std::size_t g = 0; g < goals_.size(); ++g) {
    Goal& goal = goals_[g];
    if (!goal_ids.insert(goal.id).second) throw ConfigError("duplicate goal id '" + goal.id + "'");
    if (goal.grasps.empty()) throw ConfigError("goal '" + goal.id + "' has no grasps");
    class_begin_.push_back(state_goal_.size());
    for (std::size_t k = 0; k < goal.grasps.size(); ++k) {
      Grasp& grasp = goal.grasps[k];
      if (!grasp_ids.insert(grasp.id).second) {
        throw ConfigError("duplicate grasp id '" + grasp.id + "'");
      }
      if (grasp.goal_id.empty()) grasp.goal_id = goal.id;
      if (grasp.goal_id != goal.id) {
        throw ConfigError("grasp '" + grasp.id + "' claims goal '" + grasp.goal_id +
                          "' but is listed under '" + goal.id + "'");
      }
      const std::size_t n = grasp.keypoints.size();
      if (n < keypoints.min || n > keypoints.max) {
        throw ConfigError("grasp '" + grasp.id + "' has " + std::to_string(n) +
                          " keypoints; expected " + std::to_string(keypoints.min) + ".." +
                          std::to_string(keypoints.max));
      }
      for (const Pose& kp : grasp.keypoints) {
        if (!bounds_.contains(kp.position)) throw ConfigError(pose_outside("grasp '" + grasp.id + "'"));
      }
      state_goal_.push_back(g);
      state_grasp_.push_back(k);
    }
  }
}

const Grasp& Scenario::grasp(std::size_t state) const {
  return goals_.at(state_goal_.at(state)).grasps.at(state_grasp_.at(state));
}

std::vector<std::size_t> Scenario::class_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(goals_.size());
  for (const Goal& g : goals_) sizes.push_back(g.grasps.size());
  return sizes;
}

std::optional<std::size_t> Scenario::find_goal(const std::string& goal_id) const {
  for (std::size_t g = 0; g < goals_.size(); ++g) {
    if (goals_[g].id == goal_id) return g;
  }
  return std::nullopt;
}

std::optional<std::size_t> Scenario::find_state(const std::string& grasp_id) const {
  for (std::size_t s = 0; s < state_count(); ++s) {
    if (grasp(s).id == grasp_id) return s;
  }
  return std::nullopt;
}

std::size_t Scenario::goal_index(const std::string& goal_id) const {
  if (auto g = find_goal(goal_id)) return *g;
  throw ConfigError("scenario '" + id_ + "' has no goal '" + goal_id + "'");
}

std::size_t Scenario::state_index(const std::string& grasp_id) const {
  if (auto s = find_state(grasp_id)) return *s;
  throw ConfigError("scenario '" + id_ + "' has no grasp '" + grasp_id + "'");
}

WorldModel Scenario::world(double rotation_weight, ActionLimits limits) const {
  return WorldModel{bounds_, dt_, rotation_weight, limits};
}

bool grasp_succeeded(const Pose& s, const Grasp& grasp, Tolerance tol) {
  return within(s, grasp.grasp_pose(), tol);
}

Scenario scenario_from_json(const nlohmann::json& j) {
  using namespace json_io;
  try {
    std::vector<Goal> goals;
    for (const auto& jg : j.at("goals")) {
      Goal goal;
      goal.id = jg.at("id").get<std::string>();
      goal.label = jg.value("label", goal.id);
      goal.centroid = decode_vec3(jg.at("centroid"), "goal.centroid");
      for (const auto& jgr : jg.at("grasps")) {
        Grasp grasp;
        grasp.id = jgr.at("id").get<std::string>();
        grasp.goal_id = jgr.value("goal_id", goal.id);
        for (const auto& jk : jgr.at("keypoints")) {
          grasp.keypoints.push_back(decode_pose(jk, "keypoint"));
        }
        goal.grasps.push_back(std::move(grasp));
      }
      goals.push_back(std::move(goal));
    }
    KeypointCount counts;
    if (j.contains("min_keypoints")) counts.min = j.at("min_keypoints").get<std::size_t>();
    if (j.contains("max_keypoints")) counts.max = j.at("max_keypoints").get<std::size_t>();
    return Scenario(j.value("id", std::string("unnamed")), std::move(goals),
                    decode_pose(j.at("start_pose"), "start_pose"),
                    decode_bounds(j.at("bounds"), "bounds"), j.value("dt", 0.05), counts);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

nlohmann::json scenario_to_json(const Scenario& scenario) {
  using json_io::encode;
  nlohmann::json goals = nlohmann::json::array();
  for (const Goal& goal : scenario.goals()) {
    nlohmann::json grasps = nlohmann::json::array();
    for (const Grasp& grasp : goal.grasps) {
      nlohmann::json kps = nlohmann::json::array();
      for (const Pose& kp : grasp.keypoints) kps.push_back(encode(kp));
      grasps.push_back({{"id", grasp.id}, {"keypoints", std::move(kps)}});
    }
    goals.push_back({{"id", goal.id},
                     {"label", goal.label},
                     {"centroid", encode(goal.centroid)},
                     {"grasps", std::move(grasps)}});
  }
  return {{"id", scenario.id()},
          {"dt", scenario.dt()},
          {"bounds", encode(scenario.bounds())},
          {"start_pose", encode(scenario.start_pose())},
          {"min_keypoints", scenario.keypoint_count().min},
          {"max_keypoints", scenario.keypoint_count().max},
          {"goals", std::move(goals)}};
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scenario file " + path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace sharedctl
