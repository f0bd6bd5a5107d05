#pragma once

// JSON encodings for the geometric value types. Quaternions are written as
// [w, x, y, z]. Doubles round-trip exactly through nlohmann's shortest
// representation, which is what makes persisted logs replayable bit-for-bit.

#include <nlohmann/json.hpp>

#include "sharedctl/workspace.hpp"

namespace sharedctl::json_io {

nlohmann::json encode(const Vec3& v);
nlohmann::json encode(const Quat& q);
nlohmann::json encode(const Pose& p);
nlohmann::json encode(const Action& u);
nlohmann::json encode(const Bounds& b);

// Decoders throw ConfigError with the offending field name.
Vec3 decode_vec3(const nlohmann::json& j, const char* what);
/// Normalizes the quaternion; rejects near-zero norms.
Quat decode_quat(const nlohmann::json& j, const char* what);
Pose decode_pose(const nlohmann::json& j, const char* what);
Action decode_action(const nlohmann::json& j, const char* what);
Bounds decode_bounds(const nlohmann::json& j, const char* what);

/// Decode a pose without renormalizing (log replay needs the stored bits).
Pose decode_pose_exact(const nlohmann::json& j, const char* what);

}  // namespace sharedctl::json_io
