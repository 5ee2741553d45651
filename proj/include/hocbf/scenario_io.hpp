#pragma once

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hocbf/errors.hpp"
#include "hocbf/scenario.hpp"

namespace hocbf {

// Scenario files are line oriented:
//
//   # comment
//   key = value                 (top-level keys before any section)
//   [section]
//   key = value
//
// Values are a single number, a comma-separated list of numbers, or a word.
// Sections: nominal, true, goal, controller, filter, train, eval, and any
// number of [obstacle] blocks. Unknown sections and keys are errors.

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Entry {
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::map<std::string, Entry> entries;
};

class SectionReader {
 public:
  SectionReader(const Section& sec, std::string file) : sec_(sec), file_(std::move(file)) {}

  ~SectionReader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, e] : sec_.entries)
      if (!used_.count(key))
        throw ParseError(file_, e.line, "unknown key '" + key + "' in [" + sec_.name + "]");
  }

  [[nodiscard]] bool has(const std::string& key) const { return sec_.entries.count(key) > 0; }

  std::vector<double> numbers(const std::string& key, std::size_t expected = 0) {
    const Entry& e = require(key);
    std::vector<double> out;
    std::stringstream ss(e.value);
    for (std::string item; std::getline(ss, item, ',');) {
      const std::string tok = trim(item);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(file_, e.line, "key '" + key + "': '" + tok + "' is not a number");
      out.push_back(v);
    }
    if (expected != 0 && out.size() != expected)
      throw ParseError(file_, e.line, "key '" + key + "' expects " + std::to_string(expected) +
                                          " values, got " + std::to_string(out.size()));
    return out;
  }

  double number(const std::string& key) { return numbers(key, 1)[0]; }

  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const double v = number(key);
    if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw ParseError(file_, sec_.entries.at(key).line, "key '" + key + "' must be a nonnegative integer");
    return static_cast<std::size_t>(v);
  }

  std::string word(const std::string& key) { return trim(require(key).value); }

  std::string word(const std::string& key, const std::string& fallback) {
    return has(key) ? word(key) : fallback;
  }

  Region region(const std::string& key) {
    const auto v = numbers(key, 4);
    return {v[0], v[1], v[2], v[3]};
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ParseError(file_, sec_.entries.at(key).line, msg);
  }

 private:
  const Entry& require(const std::string& key) {
    const auto it = sec_.entries.find(key);
    if (it == sec_.entries.end())
      throw ParseError(file_, sec_.line, "missing key '" + key + "' in [" + sec_.name + "]");
    used_.insert(key);
    return it->second;
  }

  const Section& sec_;
  std::string file_;
  std::set<std::string> used_;
};

inline std::vector<Section> split_sections(std::istream& is, const std::string& file) {
  static const std::set<std::string> known{"scenario", "nominal", "true", "goal", "controller",
                                           "filter",   "obstacle", "train", "eval"};
  std::vector<Section> out{{"scenario", 0, {}}};
  std::string raw;
  for (int line_no = 1; std::getline(is, raw); ++line_no) {
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(file, line_no, "malformed section header");
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known.count(name)) throw ParseError(file, line_no, "unknown section [" + name + "]");
      if (name != "obstacle")
        for (const auto& s : out)
          if (s.name == name && s.line != 0)
            throw ParseError(file, line_no, "duplicate section [" + name + "]");
      out.push_back({name, line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(file, line_no, "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ParseError(file, line_no, "empty key");
    if (value.empty()) throw ParseError(file, line_no, "empty value for '" + key + "'");
    auto& entries = out.back().entries;
    if (entries.count(key)) throw ParseError(file, line_no, "duplicate key '" + key + "'");
    entries[key] = {value, line_no};
  }
  return out;
}

inline SystemParams read_params(SectionReader& r) {
  return {r.number("r"), r.number("L"), r.number("u")};
}

inline BarrierSpec read_obstacle(SectionReader& r) {
  const std::string kind = r.word("kind");
  const auto c = r.numbers("center", 2);
  const double radius = r.number("radius");
  if (kind == "circle") return BarrierSpec::circle(c[0], c[1], radius);
  if (kind == "ellipse") {
    const auto w = r.numbers("weights", 2);
    return BarrierSpec::ellipse(c[0], c[1], w[0], w[1], radius);
  }
  if (kind == "moving_circle") {
    const auto v = r.numbers("velocity", 2);
    return BarrierSpec::moving_circle(c[0], c[1], v[0], v[1], radius);
  }
  r.fail("kind", "unknown obstacle kind '" + kind + "'");
}

inline FilterSpec read_filter(SectionReader& r) {
  FilterSpec f;
  const std::string type = r.word("type", "ecbf");
  if (type == "ecbf") {
    f.kind = FilterKind::ecbf;
    if (r.has("gain") && r.has("poles")) r.fail("poles", "give either 'gain' or 'poles', not both");
    if (r.has("poles")) {
      const auto poles = r.numbers("poles");
      try {
        f.gain = pole_placement(poles);
      } catch (const NonHurwitz& e) {
        r.fail("poles", e.what());
      }
    } else {
      f.gain = EcbfGain{r.numbers("gain")};
    }
  } else if (type == "hocbf") {
    f.kind = FilterKind::hocbf;
    const auto powers = r.numbers("alpha");
    f.chain.c = r.numbers("c");
    for (double p : powers) {
      if (p < 1.0 || p != static_cast<double>(static_cast<int>(p)))
        r.fail("alpha", "class-K powers must be integers >= 1");
      f.chain.alpha.push_back(ClassK{static_cast<int>(p)});
    }
  } else {
    r.fail("type", "unknown filter type '" + type + "'");
  }
  if (r.has("omega_box")) {
    const auto b = r.numbers("omega_box", 2);
    f.box = ControlBox{b[0], b[1]};
  }
  return f;
}

}  // namespace detail

/// Parses and validates a scenario. Syntax problems raise ParseError with the
/// offending line; semantic problems raise ValidationError.
inline ScenarioConfig parse_scenario(std::istream& is, const std::string& file = "<scenario>") {
  using detail::SectionReader;
  ScenarioConfig sc;
  bool have_nominal = false, have_true = false, have_goal = false;
  for (const auto& sec : detail::split_sections(is, file)) {
    SectionReader r(sec, file);
    if (sec.name == "scenario") {
      sc.name = r.word("name", sc.name);
      sc.dt = r.number("dt", sc.dt);
      sc.max_steps = r.count("max_steps", sc.max_steps);
      if (r.has("workspace")) sc.workspace = r.region("workspace");
    } else if (sec.name == "nominal") {
      sc.nominal = detail::read_params(r);
      have_nominal = true;
    } else if (sec.name == "true") {
      sc.truth = detail::read_params(r);
      have_true = true;
    } else if (sec.name == "goal") {
      const auto c = r.numbers("center", 2);
      sc.goal.center = {c[0], c[1]};
      sc.goal.half_width = r.number("half_width");
      have_goal = true;
    } else if (sec.name == "controller") {
      sc.controller.k_theta = r.number("k_theta", sc.controller.k_theta);
      sc.controller.omega_max = r.number("omega_max", sc.controller.omega_max);
    } else if (sec.name == "filter") {
      sc.filter = detail::read_filter(r);
    } else if (sec.name == "obstacle") {
      sc.barriers.push_back(detail::read_obstacle(r));
    } else if (sec.name == "train") {
      TrainConfig& t = sc.train;
      t.trajectories = r.count("trajectories", t.trajectories);
      t.steps = r.count("steps", t.steps);
      t.batch = r.count("batch", t.batch);
      t.buffer = r.count("buffer", t.buffer);
      t.learning_rate = r.number("learning_rate", t.learning_rate);
      t.seed = r.count("seed", t.seed);
      t.label_window = r.count("label_window", t.label_window);
      t.updates_per_step = r.count("updates_per_step", t.updates_per_step);
      t.exploration_std = r.number("exploration_std", t.exploration_std);
      t.start_time_max = r.number("start_time_max", t.start_time_max);
      if (r.has("label_control")) {
        const std::string mode = r.word("label_control");
        if (mode == "center")
          t.label_control = LabelControl::center;
        else if (mode == "window_mean")
          t.label_control = LabelControl::window_mean;
        else
          r.fail("label_control", "label_control must be 'center' or 'window_mean'");
      }
      if (r.has("hidden")) {
        t.hidden.clear();
        for (double w : r.numbers("hidden")) {
          if (w < 1.0 || w != static_cast<double>(static_cast<int>(w)))
            r.fail("hidden", "hidden widths must be positive integers");
          t.hidden.push_back(static_cast<int>(w));
        }
      }
      if (r.has("region")) t.region = r.region("region");
    } else if (sec.name == "eval") {
      if (r.has("region")) sc.eval.region = r.region("region");
      sc.eval.samples = r.count("samples", sc.eval.samples);
      sc.eval.seed = r.count("seed", sc.eval.seed);
    }
  }
  if (!have_nominal) throw ValidationError("scenario is missing the [nominal] section");
  if (!have_true) throw ValidationError("scenario is missing the [true] section");
  if (!have_goal) throw ValidationError("scenario is missing the [goal] section");
  if (sc.name.empty()) sc.name = file;
  sc.validate();
  return sc;
}

inline ScenarioConfig parse_scenario_string(const std::string& text, const std::string& file = "<string>") {
  std::istringstream is(text);
  return parse_scenario(is, file);
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open scenario '" + path + "'");
  return parse_scenario(is, path);
}

}  // namespace hocbf
