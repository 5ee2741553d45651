#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hocbf/errors.hpp"

namespace hocbf {

/// Differential-drive parameters: wheel radius r, axle length L and the mean
/// wheel speed u. The plant and the model used for synthesis each carry one.
struct SystemParams {
  double r = 0.1;
  double L = 0.1;
  double u = 1.0;

  [[nodiscard]] double speed() const { return r * u; }
  [[nodiscard]] double turn_gain() const { return r / L; }

  void validate(const std::string& what = "SystemParams") const {
    if (!(r > 0.0) || !std::isfinite(r))
      throw ValidationError(what + ": r must be positive");
    if (!(L > 0.0) || !std::isfinite(L))
      throw ValidationError(what + ": L must be positive");
    if (u == 0.0 || !std::isfinite(u))
      throw ValidationError(what + ": u must be nonzero");
  }
};

struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

using StateDerivative = Eigen::Vector3d;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (a > -std::numbers::pi && a <= std::numbers::pi) return a;
  double w = std::fmod(a + std::numbers::pi, two_pi);
  if (w < 0.0) w += two_pi;
  w -= std::numbers::pi;
  // fmod maps +pi to -pi; the half-open interval keeps +pi.
  if (w <= -std::numbers::pi) w = std::numbers::pi;
  return w;
}

inline StateDerivative drift(const RobotState& s, const SystemParams& p) {
  const double v = p.speed();
  return {v * std::cos(s.theta), v * std::sin(s.theta), 0.0};
}

inline StateDerivative control_direction(const SystemParams& p) {
  return {0.0, 0.0, p.turn_gain()};
}

inline StateDerivative vector_field(const RobotState& s, double omega,
                                    const SystemParams& p) {
  return drift(s, p) + control_direction(p) * omega;
}

/// One classical RK4 step of x' = f(x) + g(x) omega with omega held constant.
inline RobotState step(const RobotState& s, double omega, const SystemParams& p,
                       double dt) {
  auto shifted = [&](const StateDerivative& k, double h) {
    return RobotState{s.x + h * k[0], s.y + h * k[1], s.theta + h * k[2]};
  };
  const StateDerivative k1 = vector_field(s, omega, p);
  const StateDerivative k2 = vector_field(shifted(k1, 0.5 * dt), omega, p);
  const StateDerivative k3 = vector_field(shifted(k2, 0.5 * dt), omega, p);
  const StateDerivative k4 = vector_field(shifted(k3, dt), omega, p);
  const StateDerivative incr = (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return {s.x + incr[0], s.y + incr[1], wrap_angle(s.theta + incr[2])};
}

enum class StopReason { none, goal, exit, collision, max_steps };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::none: return "";
    case StopReason::goal: return "goal";
    case StopReason::exit: return "exit";
    case StopReason::collision: return "collision";
    case StopReason::max_steps: return "max_steps";
  }
  return "";
}

/// What a closed-loop controller reports for one step. Filter diagnostics are
/// NaN/true when the controller is not a safety filter.
struct ControlDecision {
  double omega = 0.0;
  double slack = std::numeric_limits<double>::quiet_NaN();
  bool feasible = true;
  bool active = false;
};

struct TrajectorySample {
  double t = 0.0;
  RobotState state;
  double omega = 0.0;
  std::vector<double> h;
  double slack = std::numeric_limits<double>::quiet_NaN();
  bool feasible = true;
};

struct TrajectoryLog {
  double dt = 0.0;
  std::vector<TrajectorySample> samples;
  StopReason reason = StopReason::none;

  [[nodiscard]] std::size_t size() const { return samples.size(); }

  /// Minimum barrier value over every barrier and every logged sample.
  [[nodiscard]] double min_h() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : samples)
      for (double v : s.h) m = std::min(m, v);
    return m;
  }

  [[nodiscard]] std::size_t infeasible_steps() const {
    std::size_t n = 0;
    for (const auto& s : samples) n += s.feasible ? 0 : 1;
    return n;
  }
};

using Controller = std::function<ControlDecision(double t, const RobotState&)>;
using BarrierProbe = std::function<std::vector<double>(double t, const RobotState&)>;
using StopPredicate = std::function<StopReason(double t, const RobotState&,
                                               const std::vector<double>& h)>;

/// Rolls the plant forward until the stop predicate fires or max_steps
/// controls have been applied. The state that triggers a stop is logged with
/// omega = 0 and carries the reason; so does the state reached after the last
/// allowed step.
inline TrajectoryLog simulate(const RobotState& initial, const Controller& controller,
                              const SystemParams& plant, double dt,
                              std::size_t max_steps, const StopPredicate& stop,
                              const BarrierProbe& probe = {}) {
  TrajectoryLog log;
  log.dt = dt;
  log.samples.reserve(std::min<std::size_t>(max_steps + 1, 1 << 16));
  RobotState s = initial;
  s.theta = wrap_angle(s.theta);
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    TrajectorySample row;
    row.t = t;
    row.state = s;
    if (probe) row.h = probe(t, s);
    StopReason why = stop ? stop(t, s, row.h) : StopReason::none;
    if (why == StopReason::none && k == max_steps) why = StopReason::max_steps;
    if (why != StopReason::none) {
      row.omega = 0.0;
      log.samples.push_back(std::move(row));
      log.reason = why;
      break;
    }
    const ControlDecision c = controller(t, s);
    row.omega = c.omega;
    row.slack = c.slack;
    row.feasible = c.feasible;
    log.samples.push_back(std::move(row));
    s = step(s, c.omega, plant, dt);
  }
  return log;
}

}  // namespace hocbf
