#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "hocbf/dynamics.hpp"
#include "hocbf/errors.hpp"

namespace hocbf {

enum class BarrierKind { static_circle, ellipse, moving_circle };

inline const char* to_string(BarrierKind k) {
  switch (k) {
    case BarrierKind::static_circle: return "circle";
    case BarrierKind::ellipse: return "ellipse";
    case BarrierKind::moving_circle: return "moving_circle";
  }
  return "";
}

/// Quadratic keep-out region
///   h(p, t) = wx (x - cx(t))^2 + wy (y - cy(t))^2 - radius^2,
/// with c(t) = center + velocity * t. Circles use unit weights; only moving
/// circles carry a velocity.
struct BarrierSpec {
  BarrierKind kind = BarrierKind::static_circle;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 1.0;
  Eigen::Vector2d weights = Eigen::Vector2d::Ones();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();

  static BarrierSpec circle(double cx, double cy, double radius) {
    BarrierSpec s;
    s.center = {cx, cy};
    s.radius = radius;
    return s;
  }

  static BarrierSpec ellipse(double cx, double cy, double wx, double wy, double radius) {
    BarrierSpec s;
    s.kind = BarrierKind::ellipse;
    s.center = {cx, cy};
    s.weights = {wx, wy};
    s.radius = radius;
    return s;
  }

  static BarrierSpec moving_circle(double cx, double cy, double vx, double vy,
                                   double radius) {
    BarrierSpec s;
    s.kind = BarrierKind::moving_circle;
    s.center = {cx, cy};
    s.velocity = {vx, vy};
    s.radius = radius;
    return s;
  }

  [[nodiscard]] bool time_varying() const { return kind == BarrierKind::moving_circle; }

  [[nodiscard]] Eigen::Vector2d center_at(double t) const {
    return time_varying() ? Eigen::Vector2d(center + velocity * t) : center;
  }

  void validate() const {
    if (!(radius > 0.0)) throw ValidationError("barrier radius must be positive");
    if (!(weights[0] > 0.0) || !(weights[1] > 0.0))
      throw ValidationError("barrier axis weights must be positive");
    if (kind != BarrierKind::ellipse && (weights[0] != 1.0 || weights[1] != 1.0))
      throw ValidationError("circle barriers take unit weights");
    if (kind != BarrierKind::moving_circle && !velocity.isZero())
      throw ValidationError("only moving circles have a velocity");
  }
};

inline double h_value(const BarrierSpec& spec, const RobotState& s, double t) {
  const Eigen::Vector2d d = Eigen::Vector2d(s.x, s.y) - spec.center_at(t);
  return spec.weights[0] * d[0] * d[0] + spec.weights[1] * d[1] * d[1] -
         spec.radius * spec.radius;
}

/// h and its time derivatives along the unicycle flow, split into the parts
/// that do and do not multiply omega.
struct LieBundle {
  double h = 0.0;
  double hdot = 0.0;         // L_f h + dh/dt
  double hddot_drift = 0.0;  // control-free part of the second derivative
  double input_coeff = 0.0;  // L_g L_f h

  [[nodiscard]] double hddot(double omega) const { return hddot_drift + input_coeff * omega; }
};

inline LieBundle lie_bundle(const BarrierSpec& spec, const RobotState& s, double t,
                            const SystemParams& p) {
  const Eigen::Vector2d d = Eigen::Vector2d(s.x, s.y) - spec.center_at(t);
  const Eigen::Vector2d w = spec.weights;
  const double v = p.speed();
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  // Relative velocity of the robot with respect to the region's center.
  const Eigen::Vector2d rel(v * c - spec.velocity[0], v * sn - spec.velocity[1]);
  // Acceleration per unit omega: v * (r/L) * (-sin, cos).
  const Eigen::Vector2d accel_dir(-sn, c);

  LieBundle b;
  b.h = w[0] * d[0] * d[0] + w[1] * d[1] * d[1] - spec.radius * spec.radius;
  b.hdot = 2.0 * (w[0] * d[0] * rel[0] + w[1] * d[1] * rel[1]);
  b.hddot_drift = 2.0 * (w[0] * rel[0] * rel[0] + w[1] * rel[1] * rel[1]);
  b.input_coeff =
      2.0 * v * p.turn_gain() * (w[0] * d[0] * accel_dir[0] + w[1] * d[1] * accel_dir[1]);
  return b;
}

/// Gradient of h with respect to (x, y, theta) at frozen time.
inline Eigen::Vector3d h_gradient(const BarrierSpec& spec, const RobotState& s, double t) {
  const Eigen::Vector2d d = Eigen::Vector2d(s.x, s.y) - spec.center_at(t);
  return {2.0 * spec.weights[0] * d[0], 2.0 * spec.weights[1] * d[1], 0.0};
}

struct RelativeDegreeReport {
  double max_abs_lg_h = 0.0;
  double min_abs_lglf_h = std::numeric_limits<double>::infinity();
  std::size_t samples_used = 0;
  std::size_t samples_excluded = 0;
};

/// Certifies relative degree two on a sample set: L_g h must vanish and
/// L_g L_f h must stay away from zero. Samples whose heading lies within
/// `exclusion_angle` of the barrier gradient direction (where L_g L_f h
/// vanishes legitimately) are skipped.
inline RelativeDegreeReport relative_degree_check(const BarrierSpec& spec,
                                                  std::span<const RobotState> states,
                                                  const SystemParams& p, double t = 0.0,
                                                  double exclusion_angle = 1e-3) {
  if (states.empty()) throw std::invalid_argument("relative_degree_check: empty sample set");
  RelativeDegreeReport rep;
  const StateDerivative g = control_direction(p);
  for (const RobotState& s : states) {
    const Eigen::Vector3d grad = h_gradient(spec, s, t);
    if (exclusion_angle > 0.0 && grad.head<2>().norm() > 0.0) {
      const double grad_angle = std::atan2(grad[1], grad[0]);
      const double off = std::abs(wrap_angle(s.theta - grad_angle));
      const double to_axis = std::min(off, std::numbers::pi - off);
      if (to_axis < exclusion_angle) {
        ++rep.samples_excluded;
        continue;
      }
    }
    ++rep.samples_used;
    rep.max_abs_lg_h = std::max(rep.max_abs_lg_h, std::abs(grad.dot(g)));
    rep.min_abs_lglf_h =
        std::min(rep.min_abs_lglf_h, std::abs(lie_bundle(spec, s, t, p).input_coeff));
  }
  if (rep.samples_used == 0)
    throw DegreeViolation("relative_degree_check: every sample fell in the exclusion band");
  if (rep.max_abs_lg_h > 1e-9)
    throw DegreeViolation("L_g h does not vanish: max |L_g h| = " +
                          std::to_string(rep.max_abs_lg_h));
  if (!(rep.min_abs_lglf_h > 0.0))
    throw DegreeViolation("L_g L_f h vanishes on the sample set");
  return rep;
}

/// Feedback gain K = (k_0, ..., k_{r-1}) acting on eta = (h, h', ..., h^{(r-1)}).
struct EcbfGain {
  std::vector<double> k;

  [[nodiscard]] std::size_t order() const { return k.size(); }

  /// F - G K for the chain-of-integrators form of the input-output dynamics.
  [[nodiscard]] Eigen::MatrixXd closed_loop_matrix() const {
    const auto r = static_cast<Eigen::Index>(k.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(r, r);
    for (Eigen::Index i = 0; i + 1 < r; ++i) m(i, i + 1) = 1.0;
    for (Eigen::Index j = 0; j < r; ++j) m(r - 1, j) = -k[static_cast<std::size_t>(j)];
    return m;
  }

  [[nodiscard]] Eigen::VectorXcd poles() const {
    return Eigen::EigenSolver<Eigen::MatrixXd>(closed_loop_matrix(), false).eigenvalues();
  }

  void validate() const {
    if (k.empty()) throw ValidationError("ECBF gain must be nonempty");
    for (double v : k)
      if (!(v >= 0.0)) throw ValidationError("ECBF gains must be nonnegative");
    for (const auto& pole : poles())
      if (!(pole.real() < 0.0)) throw NonHurwitz("ECBF gain is not Hurwitz");
  }

  [[nodiscard]] double apply(std::span<const double> eta) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) acc += k[i] * eta[i];
    return acc;
  }
};

/// Expands prod_i (s - p_i) and returns the non-leading coefficients, constant
/// term first.
inline EcbfGain pole_placement(std::span<const double> poles) {
  if (poles.empty()) throw std::invalid_argument("pole_placement: no poles");
  for (double p : poles)
    if (!(p < 0.0)) throw NonHurwitz("pole_placement: pole " + std::to_string(p) + " is not stable");
  // coeffs[i] multiplies s^i; start from the monic constant 1.
  std::vector<double> coeffs{1.0};
  for (double p : poles) {
    std::vector<double> next(coeffs.size() + 1, 0.0);
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      next[i + 1] += coeffs[i];
      next[i] -= p * coeffs[i];
    }
    coeffs = std::move(next);
  }
  coeffs.pop_back();
  return EcbfGain{coeffs};
}

inline EcbfGain pole_placement(std::initializer_list<double> poles) {
  return pole_placement(std::span<const double>(poles.begin(), poles.size()));
}

/// (h, h') from the Lie bundle computed with the supplied (nominal) model.
inline Eigen::Vector2d eta(const BarrierSpec& spec, const RobotState& s, double t,
                           const SystemParams& p) {
  const LieBundle b = lie_bundle(spec, s, t, p);
  return {b.h, b.hdot};
}

/// Extended class-K function alpha(z) = sign(z) |z|^q, q >= 1 (q = 1 is linear).
struct ClassK {
  int power = 1;

  [[nodiscard]] double operator()(double z) const {
    if (power == 1) return z;
    return std::copysign(std::pow(std::abs(z), power), z);
  }
  [[nodiscard]] double derivative(double z) const {
    if (power == 1) return 1.0;
    return power * std::pow(std::abs(z), power - 1);
  }

  static ClassK linear() { return {1}; }
};

/// b_0 = h, b_j = b_{j-1}' + c_j alpha_j(b_{j-1}).
struct HocbfChain {
  std::vector<ClassK> alpha;
  std::vector<double> c;

  [[nodiscard]] std::size_t order() const { return alpha.size(); }

  void validate() const {
    if (alpha.empty() || alpha.size() != c.size())
      throw ValidationError("HOCBF chain needs one coefficient per class-K function");
    for (double v : c)
      if (!(v > 0.0)) throw ValidationError("HOCBF coefficients must be positive");
    for (const auto& a : alpha)
      if (a.power < 1) throw ValidationError("class-K power must be >= 1");
  }
};

/// Chain values and the pieces of the top-level inequality
///   input_coeff * omega + drift_terms >= rhs,  rhs = -c_r alpha_r(b_{r-1}).
struct ChainOutput {
  std::vector<double> b;
  double input_coeff = 0.0;
  double drift_terms = 0.0;
  double rhs = 0.0;
};

/// Relative-degree-two chain evaluation. The second derivative of b_1 is
/// h'' + c_1 alpha_1'(h) h', so the chain term added to the drift is
/// c_1 alpha_1'(h) h'.
inline ChainOutput b_chain(const HocbfChain& chain, const BarrierSpec& spec,
                           const RobotState& s, double t, const SystemParams& p) {
  if (chain.order() != 2)
    throw std::invalid_argument("b_chain: only relative degree 2 barriers are supported");
  const LieBundle lb = lie_bundle(spec, s, t, p);
  const double c1 = chain.c[0];
  const double c2 = chain.c[1];
  ChainOutput out;
  out.b = {lb.h, lb.hdot + c1 * chain.alpha[0](lb.h)};
  out.input_coeff = lb.input_coeff;
  out.drift_terms = lb.hddot_drift + c1 * chain.alpha[0].derivative(lb.h) * lb.hdot;
  out.rhs = -c2 * chain.alpha[1](out.b[1]);
  return out;
}

/// Chooses c_j so that every b_j(x0) > 0, recursively: c_j exceeds
/// -(b_{j-1}'(x0)) / alpha_j(b_{j-1}(x0)) and is at least delta_j. `u0` is
/// the control used to evaluate the top-level derivative.
inline std::vector<double> select_cj(const std::vector<ClassK>& alpha,
                                     const BarrierSpec& spec, const RobotState& x0,
                                     double t, const SystemParams& p,
                                     std::span<const double> delta, double u0 = 0.0) {
  if (alpha.size() != 2 || delta.size() != 2)
    throw std::invalid_argument("select_cj: only relative degree 2 barriers are supported");
  for (double d : delta)
    if (!(d > 0.0)) throw std::invalid_argument("select_cj: delta must be positive");
  const LieBundle lb = lie_bundle(spec, x0, t, p);
  if (!(lb.h > 0.0)) throw NotInInterior("select_cj: h(x0) <= 0");

  auto pick = [](double ratio, double d) { return ratio > 0.0 ? ratio + d : d; };

  const double c1 = pick(-lb.hdot / alpha[0](lb.h), delta[0]);
  const double b1 = lb.hdot + c1 * alpha[0](lb.h);
  const double b1_dot = lb.hddot(u0) + c1 * alpha[0].derivative(lb.h) * lb.hdot;
  const double c2 = pick(-b1_dot / alpha[1](b1), delta[1]);
  return {c1, c2};
}

/// The HOCBF chain with linear class-K functions equivalent to a degree-two
/// ECBF gain: c_1 c_2 = k_0 and c_1 + c_2 = k_1. c_1 takes the faster root.
inline HocbfChain linear_chain_from_gain(const EcbfGain& gain) {
  if (gain.order() != 2) throw std::invalid_argument("linear_chain_from_gain: order must be 2");
  const double k0 = gain.k[0];
  const double k1 = gain.k[1];
  const double disc = k1 * k1 - 4.0 * k0;
  if (disc < 0.0) throw std::invalid_argument("linear_chain_from_gain: complex poles");
  const double fast = 0.5 * (k1 + std::sqrt(disc));
  const double slow = k0 / fast;
  return HocbfChain{{ClassK::linear(), ClassK::linear()}, {fast, slow}};
}

// ---------------------------------------------------------------------------
// Counterexamples for set invariance.

/// Scalar system x' = -1 with h(x) = (2 sqrt2 / (3 sqrt3)) x^{3/2} (odd
/// extension for x < 0) and alpha(z) = z^{1/3}. On C, h' = -alpha(h) holds
/// with equality, yet h reaches zero at t = x0.
struct NonLipschitzDemo {
  static constexpr double scale = 2.0 * std::numbers::sqrt2 / (3.0 * std::numbers::sqrt3);
  static double h(double x) { return std::copysign(scale * std::pow(std::abs(x), 1.5), x); }
  static double alpha(double z) { return std::cbrt(z); }
  static double hdot(double x) { return -1.5 * scale * std::sqrt(std::abs(x)); }
};

/// Returns the first sampled time with h <= 0 under x' = -1 (explicit
/// stepping at dt), or +inf if none occurs within 10 x0 + 1.
inline double demo_nonlipschitz_alpha(double x0, double dt) {
  if (!(x0 > 0.0) || !(dt > 0.0))
    throw std::invalid_argument("demo_nonlipschitz_alpha: x0 and dt must be positive");
  const double horizon = 10.0 * x0 + 1.0;
  const auto n = static_cast<std::size_t>(std::ceil(horizon / dt));
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double x = x0 - t;
    if (NonLipschitzDemo::h(x) <= 0.0) return t;
  }
  return std::numeric_limits<double>::infinity();
}

/// Lipschitz companion: same h, but x' = -(2/3) x so that h' = -h exactly.
/// RK4-integrates for `horizon` seconds and returns the smallest h seen.
inline double demo_lipschitz_alpha(double x0, double dt, double horizon) {
  if (!(x0 > 0.0) || !(dt > 0.0))
    throw std::invalid_argument("demo_lipschitz_alpha: x0 and dt must be positive");
  auto f = [](double x) { return -2.0 / 3.0 * x; };
  double x = x0;
  double min_h = NonLipschitzDemo::h(x);
  const auto n = static_cast<std::size_t>(std::ceil(horizon / dt));
  for (std::size_t k = 0; k < n; ++k) {
    const double k1 = f(x);
    const double k2 = f(x + 0.5 * dt * k1);
    const double k3 = f(x + 0.5 * dt * k2);
    const double k4 = f(x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    min_h = std::min(min_h, NonLipschitzDemo::h(x));
  }
  return min_h;
}

/// h(x) = -x^2 has an empty interior; x' = c satisfies h' >= -alpha(h) on
/// C = {0} but leaves it after the first step. Returns h after one step.
inline double demo_empty_interior(double c, double dt) {
  const double x = c * dt;
  return -x * x;
}

}  // namespace hocbf
