#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>

#include "hocbf/barrier.hpp"
#include "hocbf/constraint.hpp"

namespace hocbf {

/// Coefficients with |a| at or below this are treated as not depending on omega.
inline constexpr double degenerate_coeff_tol = 1e-12;

enum class FilterStatus { ok, infeasible, degenerate };

inline const char* to_string(FilterStatus s) {
  switch (s) {
    case FilterStatus::ok: return "ok";
    case FilterStatus::infeasible: return "infeasible";
    case FilterStatus::degenerate: return "degenerate";
  }
  return "";
}

struct FilterResult {
  double omega_safe = 0.0;
  bool feasible = true;
  bool active = false;
  double slack = std::numeric_limits<double>::infinity();
  FilterStatus status = FilterStatus::ok;
};

struct ControlBox {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// h'' >= -K eta written as input_coeff * omega >= -K eta - hddot_drift.
inline HalfspaceConstraint assemble_ecbf(const LieBundle& bundle, const EcbfGain& gain,
                                         std::span<const double> eta) {
  return {bundle.input_coeff, -gain.apply(eta) - bundle.hddot_drift};
}

inline HalfspaceConstraint assemble_ecbf(const LieBundle& bundle, const EcbfGain& gain,
                                         const Eigen::Vector2d& eta) {
  return assemble_ecbf(bundle, gain, std::span<const double>(eta.data(), 2));
}

inline HalfspaceConstraint assemble_hocbf(const ChainOutput& chain) {
  return {chain.input_coeff, chain.rhs - chain.drift_terms};
}

/// Minimum-perturbation projection of `nominal` onto the controls satisfying
/// every constraint and the box. In one dimension the feasible set is an
/// interval, so the QP reduces to clamping.
///
/// On an empty constraint interval the result is flagged infeasible and the
/// control is the midpoint of the two conflicting bounds, clamped into the
/// box. A constraint with vanishing coefficient and positive bound cannot be
/// met by any control; it is reported as degenerate and otherwise ignored.
inline FilterResult solve_scalar_qp(double nominal, std::span<const HalfspaceConstraint> constraints,
                                    std::optional<ControlBox> box = std::nullopt) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double lo = -inf;
  double hi = inf;
  bool degenerate = false;
  for (const auto& c : constraints) {
    if (std::abs(c.a) <= degenerate_coeff_tol) {
      if (c.b > 0.0) degenerate = true;
      continue;
    }
    const double bound = c.b / c.a;
    if (c.a > 0.0)
      lo = std::max(lo, bound);
    else
      hi = std::min(hi, bound);
  }
  const double box_lo = box ? box->lo : -inf;
  const double box_hi = box ? box->hi : inf;

  FilterResult res;
  if (lo > hi) {
    res.feasible = false;
    res.status = FilterStatus::infeasible;
    res.omega_safe = std::clamp(0.5 * (lo + hi), box_lo, box_hi);
  } else {
    const double flo = std::max(lo, box_lo);
    const double fhi = std::min(hi, box_hi);
    if (flo > fhi) {
      // Constraint interval and actuator box are disjoint: nearest box edge.
      res.feasible = false;
      res.status = FilterStatus::infeasible;
      res.omega_safe = lo > box_hi ? box_hi : box_lo;
    } else {
      res.omega_safe = std::clamp(nominal, flo, fhi);
    }
  }
  if (degenerate) {
    res.feasible = false;
    res.status = FilterStatus::degenerate;
  }
  res.active = res.omega_safe != nominal;
  for (const auto& c : constraints) res.slack = std::min(res.slack, c.slack(res.omega_safe));
  return res;
}

inline FilterResult solve_scalar_qp(double nominal, std::initializer_list<HalfspaceConstraint> cs,
                                    std::optional<ControlBox> box = std::nullopt) {
  return solve_scalar_qp(nominal, std::span<const HalfspaceConstraint>(cs.begin(), cs.size()), box);
}

}  // namespace hocbf
