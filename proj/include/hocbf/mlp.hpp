#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace hocbf {

/// Weights and biases of a fully connected network; also used for gradients
/// and optimizer moments, which share the layout.
struct MlpParameters {
  std::vector<Eigen::MatrixXd> weights;  // weights[l] is widths[l+1] x widths[l]
  std::vector<Eigen::VectorXd> biases;

  [[nodiscard]] MlpParameters zeros_like() const {
    MlpParameters z;
    for (const auto& w : weights) z.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    for (const auto& b : biases) z.biases.push_back(Eigen::VectorXd::Zero(b.size()));
    return z;
  }

  [[nodiscard]] std::size_t count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
    for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
    return n;
  }

  /// Flat access in (W0, b0, W1, b1, ...) order, row-major within each W.
  [[nodiscard]] double& at(std::size_t flat) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      auto& w = weights[l];
      const auto nw = static_cast<std::size_t>(w.size());
      if (flat < nw) {
        const auto cols = static_cast<std::size_t>(w.cols());
        return w(static_cast<Eigen::Index>(flat / cols), static_cast<Eigen::Index>(flat % cols));
      }
      flat -= nw;
      auto& b = biases[l];
      if (flat < static_cast<std::size_t>(b.size())) return b[static_cast<Eigen::Index>(flat)];
      flat -= static_cast<std::size_t>(b.size());
    }
    throw std::out_of_range("MlpParameters::at");
  }

  [[nodiscard]] double at(std::size_t flat) const {
    return const_cast<MlpParameters*>(this)->at(flat);
  }

  [[nodiscard]] bool all_finite() const {
    for (const auto& w : weights)
      if (!w.allFinite()) return false;
    for (const auto& b : biases)
      if (!b.allFinite()) return false;
    return true;
  }

  [[nodiscard]] bool operator==(const MlpParameters& o) const {
    if (weights.size() != o.weights.size()) return false;
    for (std::size_t l = 0; l < weights.size(); ++l)
      if (weights[l] != o.weights[l] || biases[l] != o.biases[l]) return false;
    return true;
  }
};

/// Forward-pass cache needed for backpropagation.
struct MlpTape {
  std::vector<Eigen::MatrixXd> activations;  // activations[0] = input batch
};

/// tanh hidden layers, identity output. Inputs and outputs are column batches.
class MlpRegressor {
 public:
  MlpRegressor() = default;

  /// Glorot-uniform hidden layers; the output layer starts at zero so a fresh
  /// model predicts exactly zero.
  MlpRegressor(std::vector<int> widths, std::uint64_t seed) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw std::invalid_argument("MlpRegressor needs at least two widths");
    for (int w : widths_)
      if (w <= 0) throw std::invalid_argument("MlpRegressor widths must be positive");
    std::mt19937_64 rng(seed);
    const std::size_t layers = widths_.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
      const int in = widths_[l];
      const int out = widths_[l + 1];
      Eigen::MatrixXd w = Eigen::MatrixXd::Zero(out, in);
      if (l + 1 < layers) {
        const double lim = std::sqrt(6.0 / (in + out));
        std::uniform_real_distribution<double> dist(-lim, lim);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
          for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
      }
      params_.weights.push_back(std::move(w));
      params_.biases.push_back(Eigen::VectorXd::Zero(out));
    }
  }

  [[nodiscard]] const std::vector<int>& widths() const { return widths_; }
  [[nodiscard]] int input_dim() const { return widths_.front(); }
  [[nodiscard]] int output_dim() const { return widths_.back(); }
  [[nodiscard]] std::size_t layers() const { return params_.weights.size(); }

  [[nodiscard]] const MlpParameters& params() const { return params_; }
  [[nodiscard]] MlpParameters& params() { return params_; }

  [[nodiscard]] Eigen::MatrixXd forward(const Eigen::MatrixXd& x, MlpTape* tape = nullptr) const {
    if (x.rows() != input_dim()) throw std::invalid_argument("MlpRegressor: input width mismatch");
    if (tape) {
      tape->activations.clear();
      tape->activations.push_back(x);
    }
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < layers(); ++l) {
      Eigen::MatrixXd z = params_.weights[l] * a;
      z.colwise() += params_.biases[l];
      if (l + 1 < layers()) z = z.array().tanh().matrix();
      a = std::move(z);
      if (tape) tape->activations.push_back(a);
    }
    return a;
  }

  [[nodiscard]] Eigen::VectorXd forward_one(const Eigen::VectorXd& x) const {
    Eigen::VectorXd a = x;
    for (std::size_t l = 0; l < layers(); ++l) {
      Eigen::VectorXd z = params_.weights[l] * a + params_.biases[l];
      if (l + 1 < layers()) z = z.array().tanh().matrix();
      a = std::move(z);
    }
    return a;
  }

  /// Reverse-mode pass: given dLoss/dOutput for the batch recorded on `tape`,
  /// returns dLoss/dParameters.
  [[nodiscard]] MlpParameters backward(const MlpTape& tape, const Eigen::MatrixXd& grad_out) const {
    MlpParameters g = params_.zeros_like();
    Eigen::MatrixXd delta = grad_out;
    for (std::size_t l = layers(); l-- > 0;) {
      const Eigen::MatrixXd& a_in = tape.activations[l];
      g.weights[l].noalias() = delta * a_in.transpose();
      g.biases[l] = delta.rowwise().sum();
      if (l > 0) {
        Eigen::MatrixXd back = params_.weights[l].transpose() * delta;
        delta = (back.array() * (1.0 - a_in.array().square())).matrix();
      }
    }
    return g;
  }

 private:
  std::vector<int> widths_;
  MlpParameters params_;
};

}  // namespace hocbf
