#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "sharedctl/scenario.hpp"

namespace fixtures {

using namespace sharedctl;

inline std::filesystem::path data_dir() { return SHAREDCTL_TEST_DATA_DIR; }

inline Scenario tabletop4() { return load_scenario(data_dir() / "scenarios" / "tabletop4.json"); }

inline Quat about_z(double angle) { return Quat(Eigen::AngleAxisd(angle, Vec3::UnitZ())); }

inline Pose at(double x, double y, double z, Quat q = Quat::Identity()) {
  return Pose{Vec3(x, y, z), q};
}

inline Grasp grasp(std::string id, std::vector<Pose> keypoints) {
  return Grasp{std::move(id), "", std::move(keypoints)};
}

/// Two goals with two grasps each, far apart along y.
inline Scenario two_by_two() {
  std::vector<Goal> goals;
  goals.push_back(Goal{"L", "left", Vec3(0.5, 0.4, 0.1),
                       {grasp("L_top", {at(0.5, 0.4, 0.3), at(0.5, 0.4, 0.12)}),
                        grasp("L_side", {at(0.35, 0.4, 0.12), at(0.45, 0.4, 0.1)})}});
  goals.push_back(Goal{"R", "right", Vec3(0.5, -0.4, 0.1),
                       {grasp("R_top", {at(0.5, -0.4, 0.3), at(0.5, -0.4, 0.12)}),
                        grasp("R_side", {at(0.35, -0.4, 0.12), at(0.45, -0.4, 0.1)})}});
  return Scenario("two_by_two", std::move(goals), at(0.5, 0.0, 0.3),
                  Bounds{Vec3(0.0, -1.0, 0.0), Vec3(1.0, 1.0, 1.0)});
}

/// Class sizes {2, 1}: a two-grasp goal and a singleton goal.
inline Scenario two_plus_one() {
  std::vector<Goal> goals;
  goals.push_back(Goal{"A", "A", Vec3(0.5, 0.3, 0.1),
                       {grasp("A1", {at(0.5, 0.3, 0.3), at(0.5, 0.3, 0.1)}),
                        grasp("A2", {at(0.4, 0.3, 0.3), at(0.4, 0.3, 0.1)})}});
  goals.push_back(Goal{"B", "B", Vec3(0.5, -0.3, 0.1),
                       {grasp("B1", {at(0.5, -0.3, 0.3), at(0.5, -0.3, 0.1)})}});
  return Scenario("two_plus_one", std::move(goals), at(0.5, 0.0, 0.3),
                  Bounds{Vec3(0.0, -1.0, 0.0), Vec3(1.0, 1.0, 1.0)});
}

/// Single goal with a three-keypoint grasp.
inline Scenario single_three_keypoints() {
  std::vector<Goal> goals;
  goals.push_back(Goal{"G", "G", Vec3(0.6, 0.0, 0.1),
                       {grasp("G1", {at(0.6, 0.0, 0.4), at(0.6, 0.0, 0.25, about_z(0.5)),
                                     at(0.6, 0.0, 0.1, about_z(1.0))})}});
  return Scenario("single", std::move(goals), at(0.3, 0.0, 0.4),
                  Bounds{Vec3(0.0, -1.0, 0.0), Vec3(1.0, 1.0, 1.0)});
}

}  // namespace fixtures
