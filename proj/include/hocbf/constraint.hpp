#pragma once

namespace hocbf {

/// Linear-in-control inequality a * omega >= b.
struct HalfspaceConstraint {
  double a = 0.0;
  double b = 0.0;

  [[nodiscard]] double slack(double omega) const { return a * omega - b; }
  [[nodiscard]] bool satisfied_by(double omega, double tol = 0.0) const {
    return slack(omega) >= -tol;
  }
};

}  // namespace hocbf
