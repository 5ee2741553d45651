#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hocbf/errors.hpp"
#include "hocbf/estimator.hpp"
#include "hocbf/scenario.hpp"

namespace hocbf {

// Checkpoint layout (text):
//
//   hocbf-checkpoint 1
//   models <count>
// then per model:
//   model <index>
//   widths <w0> <w1> ... <wn>
//   activation tanh
//   encoding <pose|obstacle_relative>
//   seed <seed>
//   <W0, row-major>
//   <b0>
//   <W1>
//   ...
// one array per line, space separated, 17 significant digits.

inline constexpr const char* checkpoint_magic = "hocbf-checkpoint";
inline constexpr int checkpoint_version = 1;

inline void write_checkpoint(std::ostream& os, std::span<const EstimatorModel> models,
                             std::uint64_t seed) {
  os << checkpoint_magic << ' ' << checkpoint_version << '\n';
  os << "models " << models.size() << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < models.size(); ++i) {
    const EstimatorModel& m = models[i];
    os << "model " << i << '\n';
    os << "widths";
    for (int w : m.net.widths()) os << ' ' << w;
    os << '\n';
    os << "activation tanh\n";
    os << "encoding " << to_string(m.encoding) << '\n';
    os << "seed " << seed + i << '\n';
    const MlpParameters& p = m.net.params();
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
      const auto& w = p.weights[l];
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) os << (r + c == 0 ? "" : " ") << w(r, c);
      os << '\n';
      const auto& b = p.biases[l];
      for (Eigen::Index r = 0; r < b.size(); ++r) os << (r == 0 ? "" : " ") << b[r];
      os << '\n';
    }
  }
  if (!os) throw CheckpointError("failed writing checkpoint");
}

inline void save_checkpoint(const std::string& path, std::span<const EstimatorModel> models,
                            std::uint64_t seed) {
  std::ofstream os(path);
  if (!os) throw CheckpointError("cannot open '" + path + "' for writing");
  write_checkpoint(os, models, seed);
}

namespace detail {

inline std::string expect_line(std::istream& is, const std::string& what) {
  std::string line;
  if (!std::getline(is, line)) throw CheckpointError("checkpoint truncated: expected " + what);
  return line;
}

inline std::istringstream keyed(std::istream& is, const std::string& key) {
  std::istringstream ls(expect_line(is, key));
  std::string k;
  ls >> k;
  if (k != key) throw CheckpointError("checkpoint: expected '" + key + "', found '" + k + "'");
  return ls;
}

inline void read_array(std::istream& is, double* dst, Eigen::Index n, const std::string& what) {
  std::istringstream ls(expect_line(is, what));
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(ls >> dst[i])) throw CheckpointError("checkpoint: short array for " + what);
  double extra = 0.0;
  if (ls >> extra) throw CheckpointError("checkpoint: long array for " + what);
}

}  // namespace detail

/// Reads one estimator per scenario barrier. The stored widths must equal
/// the widths the scenario implies (encoding, hidden layers, two outputs).
inline std::vector<EstimatorModel> read_checkpoint(std::istream& is, const ScenarioConfig& sc) {
  {
    auto ls = detail::keyed(is, checkpoint_magic);
    int version = 0;
    if (!(ls >> version) || version != checkpoint_version)
      throw CheckpointError("unsupported checkpoint version");
  }
  std::size_t count = 0;
  if (!(detail::keyed(is, "models") >> count)) throw CheckpointError("checkpoint: bad model count");
  if (count != sc.barriers.size())
    throw CheckpointError("checkpoint holds " + std::to_string(count) + " models, scenario has " +
                          std::to_string(sc.barriers.size()) + " barriers");
  std::vector<EstimatorModel> models;
  for (std::size_t i = 0; i < count; ++i) {
    detail::keyed(is, "model");
    auto wl = detail::keyed(is, "widths");
    std::vector<int> widths;
    for (int w; wl >> w;) widths.push_back(w);
    std::string activation;
    detail::keyed(is, "activation") >> activation;
    if (activation != "tanh") throw CheckpointError("checkpoint: unsupported activation " + activation);
    std::string enc;
    detail::keyed(is, "encoding") >> enc;
    std::uint64_t seed = 0;
    detail::keyed(is, "seed") >> seed;

    const InputEncoding encoding = parse_encoding(enc);
    EstimatorModel m = make_estimator(sc.barriers[i], sc.nominal, sc.train.hidden, seed, encoding);
    if (encoding != default_encoding(sc.barriers[i]))
      throw CheckpointError("checkpoint: encoding '" + enc + "' does not match barrier " + std::to_string(i));
    if (widths != m.net.widths()) {
      std::ostringstream msg;
      msg << "checkpoint: width mismatch for model " << i << " (file";
      for (int w : widths) msg << ' ' << w;
      msg << ", scenario";
      for (int w : m.net.widths()) msg << ' ' << w;
      msg << ')';
      throw CheckpointError(msg.str());
    }
    MlpParameters& p = m.net.params();
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w(p.weights[l].rows(),
                                                                            p.weights[l].cols());
      detail::read_array(is, w.data(), w.size(), "W" + std::to_string(l));
      p.weights[l] = w;
      detail::read_array(is, p.biases[l].data(), p.biases[l].size(), "b" + std::to_string(l));
    }
    if (!p.all_finite()) throw CheckpointError("checkpoint: non-finite parameter");
    models.push_back(std::move(m));
  }
  return models;
}

inline std::vector<EstimatorModel> load_checkpoint(const std::string& path, const ScenarioConfig& sc) {
  std::ifstream is(path);
  if (!is) throw CheckpointError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(is, sc);
}

}  // namespace hocbf
