#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>

#include "hocbf/constraint.hpp"

namespace hocbf {

/// Exhaustive grid search for the scalar safety QP, used to cross-check the
/// closed form. A grid point counts as feasible when it is within one grid
/// step of every half-line, i.e. a * w >= b - |a| * grid_step. Returns nullopt
/// when no grid point qualifies.
inline std::optional<double> brute_force_qp_oracle(double nominal,
                                                   std::span<const HalfspaceConstraint> constraints,
                                                   double lo, double hi, double grid_step) {
  if (!(grid_step > 0.0)) throw std::invalid_argument("grid_step must be positive");
  if (!(lo <= hi)) throw std::invalid_argument("empty search box");
  const auto n = static_cast<long long>(std::floor((hi - lo) / grid_step));
  std::optional<double> best;
  double best_cost = 0.0;
  for (long long i = 0; i <= n; ++i) {
    const double w = lo + static_cast<double>(i) * grid_step;
    bool ok = true;
    for (const auto& c : constraints) {
      if (c.a * w < c.b - std::abs(c.a) * grid_step) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    const double cost = 0.5 * (w - nominal) * (w - nominal);
    if (!best || cost < best_cost) {
      best = w;
      best_cost = cost;
    }
  }
  return best;
}

}  // namespace hocbf
