#include "sharedctl/workspace.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sharedctl/errors.hpp"

namespace sharedctl {

namespace {

// Allow a relative rounding margin before rescaling, so convex combinations of
// in-bound commands are never perturbed by the clamp.
constexpr double kClampSlack = 1e-12;

Vec3 clamp_norm(const Vec3& v, double limit) {
  const double n = v.norm();
  if (n <= limit * (1.0 + kClampSlack)) return v;
  return v * (limit / n);
}

Vec3& group(Action& u, ControlMode mode) {
  return mode == ControlMode::Position ? u.linear : u.angular;
}

const Vec3& group(const Action& u, ControlMode mode) {
  return mode == ControlMode::Position ? u.linear : u.angular;
}

}  // namespace

ControlMode toggled(ControlMode mode) {
  return mode == ControlMode::Position ? ControlMode::Angular : ControlMode::Position;
}

std::string_view to_string(ControlMode mode) {
  return mode == ControlMode::Position ? "position" : "angular";
}

ControlMode parse_control_mode(std::string_view name) {
  if (name == "position") return ControlMode::Position;
  if (name == "angular") return ControlMode::Angular;
  throw ConfigError("unknown control mode '" + std::string(name) + "'");
}

Action clamped(const Action& u, const ActionLimits& limits) {
  return Action{clamp_norm(u.linear, limits.linear), clamp_norm(u.angular, limits.angular)};
}

Action restricted_to(const Action& u, ControlMode mode) {
  Action out;
  group(out, mode) = group(u, mode);
  return out;
}

Action action_from_axes(const Vec3& axes, ControlMode mode, const ActionLimits& limits) {
  Action out;
  group(out, mode) = axes.cwiseMax(-1.0).cwiseMin(1.0) * limits.magnitude(mode);
  return clamped(out, limits);
}

Pose apply_action(const Pose& s, const Action& u, double dt, const Bounds& bounds) {
  if (!(dt > 0.0)) throw std::invalid_argument("apply_action: dt must be positive");
  Pose out = s;
  out.position = bounds.clamp(s.position + u.linear * dt);
  const Vec3 rotation = u.angular * dt;
  const double angle = rotation.norm();
  if (angle > 0.0) {
    const Quat delta(Eigen::AngleAxisd(angle, rotation / angle));
    out.orientation = (delta * s.orientation).normalized();
  }
  return out;
}

double geodesic_angle(const Quat& a, const Quat& b) {
  // atan2 form stays accurate near zero where acos(|<a,b>|) loses half the digits.
  const Quat rel = a.conjugate() * b;
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

double distance(const Pose& a, const Pose& b, double rotation_weight) {
  return (a.position - b.position).norm() +
         rotation_weight * geodesic_angle(a.orientation, b.orientation);
}

bool within(const Pose& s, const Pose& target, Tolerance tol) {
  return (s.position - target.position).norm() < tol.position &&
         geodesic_angle(s.orientation, target.orientation) < tol.rotation;
}

CanonicalActions canonical_action_set(ControlMode mode, double magnitude) {
  if (!(magnitude > 0.0)) {
    throw std::invalid_argument("canonical_action_set: magnitude must be positive");
  }
  CanonicalActions set{};
  for (int axis = 0; axis < 3; ++axis) {
    group(set[1 + 2 * axis], mode)[axis] = magnitude;
    group(set[2 + 2 * axis], mode)[axis] = -magnitude;
  }
  return set;
}

Action snap_to_canonical(const Action& raw, ControlMode mode, double magnitude,
                         double deadzone_fraction) {
  const CanonicalActions set = canonical_action_set(mode, magnitude);
  const Vec3& v = group(raw, mode);
  if (v.norm() < deadzone_fraction * magnitude) return set[0];
  std::size_t best = 1;
  double best_dot = v.dot(group(set[1], mode));
  for (std::size_t i = 2; i < set.size(); ++i) {
    const double d = v.dot(group(set[i], mode));
    if (d > best_dot) {
      best_dot = d;
      best = i;
    }
  }
  return set[best];
}

}  // namespace sharedctl
