#include "sharedctl/json_io.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sharedctl/errors.hpp"

namespace sharedctl::json_io {

namespace {

[[noreturn]] void fail(const char* what, const std::string& why) {
  throw ConfigError(std::string(what) + ": " + why);
}

double number_at(const nlohmann::json& j, std::size_t i, const char* what) {
  if (!j.at(i).is_number()) fail(what, "expected a number at index " + std::to_string(i));
  return j.at(i).get<double>();
}

void expect_array(const nlohmann::json& j, std::size_t n, const char* what) {
  if (!j.is_array() || j.size() != n) {
    fail(what, "expected an array of " + std::to_string(n) + " numbers");
  }
}

Quat quat_raw(const nlohmann::json& j, const char* what) {
  expect_array(j, 4, what);
  return Quat(number_at(j, 0, what), number_at(j, 1, what), number_at(j, 2, what),
              number_at(j, 3, what));
}

const nlohmann::json& field(const nlohmann::json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) fail(what, std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

nlohmann::json encode(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

nlohmann::json encode(const Quat& q) {
  return nlohmann::json::array({q.w(), q.x(), q.y(), q.z()});
}

nlohmann::json encode(const Pose& p) {
  return {{"position", encode(p.position)}, {"orientation", encode(p.orientation)}};
}

nlohmann::json encode(const Action& u) {
  return {{"linear", encode(u.linear)}, {"angular", encode(u.angular)}};
}

nlohmann::json encode(const Bounds& b) { return {{"min", encode(b.lower)}, {"max", encode(b.upper)}}; }

Vec3 decode_vec3(const nlohmann::json& j, const char* what) {
  expect_array(j, 3, what);
  return Vec3(number_at(j, 0, what), number_at(j, 1, what), number_at(j, 2, what));
}

Quat decode_quat(const nlohmann::json& j, const char* what) {
  Quat q = quat_raw(j, what);
  const double n = q.norm();
  if (!(n > 1e-6)) fail(what, "quaternion has (near) zero norm");
  // Leave already-unit quaternions untouched so decode(encode(q)) == q exactly.
  if (std::abs(n - 1.0) > 8.0 * std::numeric_limits<double>::epsilon()) q.coeffs() /= n;
  return q;
}

Pose decode_pose(const nlohmann::json& j, const char* what) {
  return Pose{decode_vec3(field(j, "position", what), what),
              decode_quat(field(j, "orientation", what), what)};
}

Pose decode_pose_exact(const nlohmann::json& j, const char* what) {
  return Pose{decode_vec3(field(j, "position", what), what),
              quat_raw(field(j, "orientation", what), what)};
}

Action decode_action(const nlohmann::json& j, const char* what) {
  return Action{decode_vec3(field(j, "linear", what), what),
                decode_vec3(field(j, "angular", what), what)};
}

Bounds decode_bounds(const nlohmann::json& j, const char* what) {
  return Bounds{decode_vec3(field(j, "min", what), what), decode_vec3(field(j, "max", what), what)};
}

}  // namespace sharedctl::json_io
