#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hocbf/barrier.hpp"
#include "hocbf/constraint.hpp"
#include "hocbf/mlp.hpp"

namespace hocbf {

/// How a (state, time) pair is fed to the residual network.
///   pose:              (x, y, cos theta, sin theta)
///   obstacle_relative: pose followed by (x - x_O(t), y - y_O(t))
enum class InputEncoding { pose, obstacle_relative };

inline const char* to_string(InputEncoding e) {
  return e == InputEncoding::pose ? "pose" : "obstacle_relative";
}

inline InputEncoding parse_encoding(const std::string& s) {
  if (s == "pose") return InputEncoding::pose;
  if (s == "obstacle_relative") return InputEncoding::obstacle_relative;
  throw std::invalid_argument("unknown input encoding '" + s + "'");
}

inline int encoding_width(InputEncoding e) { return e == InputEncoding::pose ? 4 : 6; }

inline InputEncoding default_encoding(const BarrierSpec& spec) {
  return spec.time_varying() ? InputEncoding::obstacle_relative : InputEncoding::pose;
}

inline void encode_into(InputEncoding e, const BarrierSpec& spec, const RobotState& s, double t,
                        Eigen::Ref<Eigen::VectorXd> out) {
  out[0] = s.x;
  out[1] = s.y;
  out[2] = std::cos(s.theta);
  out[3] = std::sin(s.theta);
  if (e == InputEncoding::obstacle_relative) {
    const Eigen::Vector2d c = spec.center_at(t);
    out[4] = s.x - c[0];
    out[5] = s.y - c[1];
  }
}

/// One labelled transition: the state (and clock) at step j, the control
/// attributed to it, and the measured second derivative of h.
struct TransitionSample {
  RobotState x;
  double t = 0.0;
  double u = 0.0;
  double label = 0.0;
};

/// Central second difference (h_{j+1} - 2 h_j + h_{j-1}) / dt^2.
inline double label_hddot(double h_prev, double h_mid, double h_next, double dt) {
  return (h_next - 2.0 * h_mid + h_prev) / (dt * dt);
}

struct Residual {
  double delta = 0.0;  // control-free remainder
  double sigma = 0.0;  // remainder multiplying omega
};

/// Nominal second-derivative model of one barrier plus a learned residual:
///   E(x, u) = hddot_drift_nominal(x) + input_coeff_nominal(x) u + Delta(x) + Sigma(x) u.
struct EstimatorModel {
  MlpRegressor net;
  InputEncoding encoding = InputEncoding::pose;
  BarrierSpec barrier;
  SystemParams nominal;

  [[nodiscard]] Eigen::VectorXd features(const RobotState& s, double t) const {
    Eigen::VectorXd f(encoding_width(encoding));
    encode_into(encoding, barrier, s, t, f);
    return f;
  }

  [[nodiscard]] Residual residual(const RobotState& s, double t) const {
    const Eigen::VectorXd out = net.forward_one(features(s, t));
    return {out[0], out[1]};
  }

  [[nodiscard]] double estimate(const RobotState& s, double t, double u) const {
    const LieBundle lb = lie_bundle(barrier, s, t, nominal);
    const Residual r = residual(s, t);
    return lb.hddot_drift + lb.input_coeff * u + r.delta + r.sigma * u;
  }
};

inline EstimatorModel make_estimator(const BarrierSpec& barrier, const SystemParams& nominal,
                                     const std::vector<int>& hidden, std::uint64_t seed,
                                     InputEncoding encoding) {
  std::vector<int> widths{encoding_width(encoding)};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(2);
  return EstimatorModel{MlpRegressor(widths, seed), encoding, barrier, nominal};
}

inline EstimatorModel make_estimator(const BarrierSpec& barrier, const SystemParams& nominal,
                                     const std::vector<int>& hidden, std::uint64_t seed) {
  return make_estimator(barrier, nominal, hidden, seed, default_encoding(barrier));
}

struct LossAndGradient {
  double loss = 0.0;
  MlpParameters gradient;
};

/// Mean squared error of the estimator over `batch` and its gradient with
/// respect to the network parameters. The nominal terms are constants.
inline LossAndGradient loss_and_gradient(const EstimatorModel& model,
                                         std::span<const TransitionSample> batch) {
  if (batch.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  const int width = encoding_width(model.encoding);
  Eigen::MatrixXd x(width, n);
  Eigen::VectorXd nominal_part(n);
  Eigen::VectorXd u(n);
  Eigen::VectorXd label(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& smp = batch[static_cast<std::size_t>(i)];
    encode_into(model.encoding, model.barrier, smp.x, smp.t, x.col(i));
    const LieBundle lb = lie_bundle(model.barrier, smp.x, smp.t, model.nominal);
    nominal_part[i] = lb.hddot_drift + lb.input_coeff * smp.u;
    u[i] = smp.u;
    label[i] = smp.label;
  }
  MlpTape tape;
  const Eigen::MatrixXd out = model.net.forward(x, &tape);
  const Eigen::VectorXd err =
      nominal_part + out.row(0).transpose() + out.row(1).transpose().cwiseProduct(u) - label;

  LossAndGradient res;
  res.loss = err.squaredNorm() / static_cast<double>(n);
  Eigen::MatrixXd grad_out(2, n);
  grad_out.row(0) = (2.0 / static_cast<double>(n)) * err.transpose();
  grad_out.row(1) = grad_out.row(0).cwiseProduct(u.transpose());
  res.gradient = model.net.backward(tape, grad_out);
  return res;
}

/// Mean squared error only; cheaper evaluation for held-out sets.
inline double mse(const EstimatorModel& model, std::span<const TransitionSample> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : samples) {
    const double e = model.estimate(s.x, s.t, s.u) - s.label;
    acc += e * e;
  }
  return acc / static_cast<double>(samples.size());
}

/// Adds the learned residual to a constraint assembled from the nominal model:
/// a += Sigma, b -= Delta.
inline HalfspaceConstraint apply_residual(HalfspaceConstraint c, const Residual& r) {
  c.a += r.sigma;
  c.b -= r.delta;
  return c;
}

/// E(x, u) >= -K eta written as a half-space in omega.
inline HalfspaceConstraint corrected_constraint(const EstimatorModel& model, const RobotState& s,
                                                double t, const EcbfGain& gain,
                                                const Eigen::Vector2d& eta) {
  const LieBundle lb = lie_bundle(model.barrier, s, t, model.nominal);
  const HalfspaceConstraint base{lb.input_coeff,
                                 -gain.apply(std::span<const double>(eta.data(), 2)) - lb.hddot_drift};
  return apply_residual(base, model.residual(s, t));
}

}  // namespace hocbf
