#pragma once

#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "hocbf/barrier.hpp"
#include "hocbf/estimator.hpp"
#include "hocbf/nominal_control.hpp"
#include "hocbf/safety_filter.hpp"
#include "hocbf/scenario.hpp"

namespace hocbf {

inline std::vector<double> barrier_values(const ScenarioConfig& sc, double t, const RobotState& s) {
  std::vector<double> h;
  h.reserve(sc.barriers.size());
  for (const auto& b : sc.barriers) h.push_back(h_value(b, s, t));
  return h;
}

/// The nominal goal-seeking controller passed through the safety QP. Without
/// models the constraints come from the nominal model alone; with one model
/// per barrier each constraint is corrected by that barrier's learned residual.
class SafetyFilterPolicy {
 public:
  explicit SafetyFilterPolicy(const ScenarioConfig& sc, std::span<const EstimatorModel> models = {})
      : sc_(&sc), models_(models) {
    if (!models_.empty() && models_.size() != sc.barriers.size())
      throw std::invalid_argument("SafetyFilterPolicy: need one model per barrier");
  }

  [[nodiscard]] HalfspaceConstraint constraint(std::size_t i, double t, const RobotState& s) const {
    const BarrierSpec& spec = sc_->barriers[i];
    HalfspaceConstraint c;
    if (sc_->filter.kind == FilterKind::ecbf) {
      const LieBundle lb = lie_bundle(spec, s, t, sc_->nominal);
      c = assemble_ecbf(lb, sc_->filter.gain, Eigen::Vector2d(lb.h, lb.hdot));
    } else {
      c = assemble_hocbf(b_chain(sc_->filter.chain, spec, s, t, sc_->nominal));
    }
    if (!models_.empty()) c = apply_residual(c, models_[i].residual(s, t));
    return c;
  }

  [[nodiscard]] std::vector<HalfspaceConstraint> constraints(double t, const RobotState& s) const {
    std::vector<HalfspaceConstraint> cs;
    cs.reserve(sc_->barriers.size());
    for (std::size_t i = 0; i < sc_->barriers.size(); ++i) cs.push_back(constraint(i, t, s));
    return cs;
  }

  [[nodiscard]] FilterResult filter(double t, const RobotState& s, double nominal) const {
    const auto cs = constraints(t, s);
    return solve_scalar_qp(nominal, cs, sc_->filter.box);
  }

  [[nodiscard]] ControlDecision operator()(double t, const RobotState& s) const {
    return decide(t, s, 0.0);
  }

  /// Filters the nominal control shifted by `perturbation` (exploration).
  [[nodiscard]] ControlDecision decide(double t, const RobotState& s, double perturbation) const {
    const double nominal = goto_goal(s, sc_->goal, sc_->controller) + perturbation;
    const FilterResult r = filter(t, s, nominal);
    return {r.omega_safe, r.slack, r.feasible, r.active};
  }

 private:
  const ScenarioConfig* sc_;
  std::span<const EstimatorModel> models_;
};

inline StopPredicate make_stop(const ScenarioConfig& sc, bool stop_on_collision = true) {
  return [&sc, stop_on_collision](double, const RobotState& s, const std::vector<double>& h) {
    if (sc.goal.contains(s)) return StopReason::goal;
    if (!sc.workspace.contains(s.x, s.y)) return StopReason::exit;
    if (stop_on_collision)
      for (double v : h)
        if (v < 0.0) return StopReason::collision;
    return StopReason::none;
  };
}

inline BarrierProbe make_probe(const ScenarioConfig& sc) {
  return [&sc](double t, const RobotState& s) { return barrier_values(sc, t, s); };
}

/// One closed-loop rollout of the true plant.
inline TrajectoryLog rollout(const ScenarioConfig& sc, std::span<const EstimatorModel> models,
                             const RobotState& initial, bool stop_on_collision = true) {
  const SafetyFilterPolicy policy(sc, models);
  return simulate(
      initial, [&policy](double t, const RobotState& s) { return policy(t, s); }, sc.truth, sc.dt,
      sc.max_steps, make_stop(sc, stop_on_collision), make_probe(sc));
}

/// Uniform position in `region` and heading in (-pi, pi].
template <typename Rng>
RobotState sample_state(const Region& region, Rng& rng) {
  std::uniform_real_distribution<double> ux(region.xmin, region.xmax);
  std::uniform_real_distribution<double> uy(region.ymin, region.ymax);
  std::uniform_real_distribution<double> ut(-std::numbers::pi, std::numbers::pi);
  RobotState s;
  s.x = ux(rng);
  s.y = uy(rng);
  s.theta = wrap_angle(ut(rng));
  return s;
}

/// True when every chain value b_j(x0) is positive for every barrier, using
/// the filter's own (nominal-model) derivatives. For an ECBF gain the
/// equivalent linear chain is used.
inline bool chain_admissible(const ScenarioConfig& sc, const RobotState& s, double t = 0.0) {
  const HocbfChain chain =
      sc.filter.kind == FilterKind::ecbf ? linear_chain_from_gain(sc.filter.gain) : sc.filter.chain;
  for (const auto& spec : sc.barriers) {
    const ChainOutput out = b_chain(chain, spec, s, t, sc.nominal);
    for (double b : out.b)
      if (!(b > 0.0)) return false;
  }
  return true;
}

}  // namespace hocbf
