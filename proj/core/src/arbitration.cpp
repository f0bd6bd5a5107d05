#include "sharedctl/arbitration.hpp"

#include <cmath>

#include "sharedctl/errors.hpp"

namespace sharedctl {

void ControllerConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(engagement.threshold >= 0.0 && engagement.threshold < 1.0)) {
    throw ConfigError("engagement threshold must lie in [0, 1)");
  }
  if (!(engagement.hysteresis >= 0.0 && engagement.hysteresis <= engagement.threshold)) {
    throw ConfigError("hysteresis must lie in [0, threshold]");
  }
  if (!(engagement.keypoint_tolerance.position > 0.0 && engagement.keypoint_tolerance.rotation > 0.0)) {
    throw ConfigError("keypoint tolerances must be positive");
  }
}

Action blend(const Action& u_h, const Action& u_r, double alpha, const ActionLimits& limits) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("blend: alpha must lie in [0, 1]");
  Action out;
  for (int i = 0; i < 3; ++i) {
    // std::lerp is exact at both endpoints and when the inputs agree.
    out.linear[i] = std::lerp(u_h.linear[i], u_r.linear[i], alpha);
    out.angular[i] = std::lerp(u_h.angular[i], u_r.angular[i], alpha);
  }
  return clamped(out, limits);
}

}  // namespace sharedctl
