#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "hocbf/dynamics.hpp"
#include "hocbf/errors.hpp"

namespace hocbf {

/// Axis-aligned square goal region.
struct GoalSpec {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double half_width = 0.25;

  [[nodiscard]] bool contains(const RobotState& s) const {
    return std::abs(s.x - center[0]) <= half_width && std::abs(s.y - center[1]) <= half_width;
  }

  void validate() const {
    if (!(half_width > 0.0)) throw ValidationError("goal half_width must be positive");
  }
};

struct GoToGoalGains {
  double k_theta = 2.0;
  double omega_max = 10.0;
};

/// Proportional heading controller toward the goal center, saturated at
/// +-omega_max.
inline double goto_goal(const RobotState& s, const GoalSpec& goal, double k_theta,
                        double omega_max) {
  const double bearing = std::atan2(goal.center[1] - s.y, goal.center[0] - s.x);
  const double err = wrap_angle(bearing - s.theta);
  return std::clamp(k_theta * err, -omega_max, omega_max);
}

inline double goto_goal(const RobotState& s, const GoalSpec& goal, const GoToGoalGains& g) {
  return goto_goal(s, goal, g.k_theta, g.omega_max);
}

}  // namespace hocbf
