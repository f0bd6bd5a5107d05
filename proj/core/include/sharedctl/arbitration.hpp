#pragma once

#include "sharedctl/assist.hpp"
#include "sharedctl/workspace.hpp"

namespace sharedctl {

struct ControllerConfig {
  double alpha = 0.0;  // weight on the assistive command; 0 is pure teleoperation
  bool assist_enabled = true;
  bool assist_full_axes = true;
  bool discrete_assist = false;
  EngagementConfig engagement;

  /// Throws ConfigError.
  void validate() const;
  AssistOptions assist_options() const { return {discrete_assist, assist_full_axes}; }
};

/// u* = alpha * u_r + (1 - alpha) * u_h on all six axes, exact at alpha = 0 and
/// alpha = 1 and whenever u_h == u_r. Clamped to the limits, which only bites
/// when an input was out of bounds to begin with.
Action blend(const Action& u_h, const Action& u_r, double alpha, const ActionLimits& limits = {});

}  // namespace sharedctl
