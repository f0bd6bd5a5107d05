#pragma once

#include <array>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace sharedctl {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

/// End-effector pose. The orientation is kept at unit norm by every operation
/// that changes it.
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  /// Exact (bitwise on values) equality; use distance() for tolerances.
  friend bool operator==(const Pose& a, const Pose& b) {
    return a.position == b.position && a.orientation.coeffs() == b.orientation.coeffs();
  }
};

/// 6-axis twist command: linear in m/s, angular in rad/s (world frame).
struct Action {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();

  bool is_null() const { return linear.isZero(0.0) && angular.isZero(0.0); }

  friend bool operator==(const Action& a, const Action& b) {
    return a.linear == b.linear && a.angular == b.angular;
  }
};

enum class ControlMode { Position, Angular };

ControlMode toggled(ControlMode mode);
std::string_view to_string(ControlMode mode);
/// Throws ConfigError on unknown names.
ControlMode parse_control_mode(std::string_view name);

/// Per-group speed limits. Canonical actions use these as their magnitude.
struct ActionLimits {
  double linear = 0.25;   // m/s
  double angular = 1.0;   // rad/s

  double magnitude(ControlMode mode) const {
    return mode == ControlMode::Position ? linear : angular;
  }
};

/// Scales each of the linear and angular groups down to its limit. Groups
/// already within bounds are returned bit-for-bit unchanged.
Action clamped(const Action& u, const ActionLimits& limits);

/// Zeroes the group the mode does not command.
Action restricted_to(const Action& u, ControlMode mode);

/// Maps normalized controller axes in [-1, 1]^3 onto the active mode's group.
Action action_from_axes(const Vec3& axes, ControlMode mode, const ActionLimits& limits);

/// Axis-aligned workspace box, inclusive.
struct Bounds {
  Vec3 lower = Vec3::Constant(-1.0);
  Vec3 upper = Vec3::Constant(1.0);

  bool contains(const Vec3& p) const {
    return (p.array() >= lower.array()).all() && (p.array() <= upper.array()).all();
  }
  Vec3 clamp(const Vec3& p) const { return p.cwiseMax(lower).cwiseMin(upper); }
};

/// Separate position / orientation tolerances. All comparisons are strict.
struct Tolerance {
  double position;  // m
  double rotation;  // rad
};

inline constexpr Tolerance kGraspTolerance{0.02, 0.15};
inline constexpr Tolerance kKeypointTolerance{0.03, 0.2};
inline constexpr double kDefaultRotationWeight = 0.1;  // m per rad
inline constexpr double kDefaultDeadzoneFraction = 0.05;
inline constexpr std::size_t kCanonicalActionCount = 7;

/// Kinematic transition: translate then rotate (world frame), clamping the
/// position to the workspace. dt must be positive.
Pose apply_action(const Pose& s, const Action& u, double dt, const Bounds& bounds);

/// Angle of the relative rotation between two unit quaternions, in [0, pi].
double geodesic_angle(const Quat& a, const Quat& b);

/// ||dp|| + rotation_weight * geodesic angle.
double distance(const Pose& a, const Pose& b, double rotation_weight = kDefaultRotationWeight);

/// True iff position error < tol.position and rotation error < tol.rotation.
bool within(const Pose& s, const Pose& target, Tolerance tol);

using CanonicalActions = std::array<Action, kCanonicalActionCount>;

/// Null action first, then +x, -x, +y, -y, +z, -z on the mode's group.
CanonicalActions canonical_action_set(ControlMode mode, double magnitude);

/// Nearest canonical action by dot product on the mode's axes. Inputs below
/// deadzone_fraction * magnitude snap to null; ties keep the earlier action.
Action snap_to_canonical(const Action& raw, ControlMode mode, double magnitude,
                         double deadzone_fraction = kDefaultDeadzoneFraction);

/// Everything the reward and the controllers need to know about the world.
struct WorldModel {
  Bounds bounds;
  double dt = 0.05;
  double rotation_weight = kDefaultRotationWeight;
  ActionLimits limits;

  Pose step(const Pose& s, const Action& u) const { return apply_action(s, u, dt, bounds); }
  double distance(const Pose& a, const Pose& b) const {
    return sharedctl::distance(a, b, rotation_weight);
  }
  CanonicalActions actions(ControlMode mode) const {
    return canonical_action_set(mode, limits.magnitude(mode));
  }
};

}  // namespace sharedctl
