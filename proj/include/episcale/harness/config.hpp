#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "episcale/core/format.hpp"
#include "episcale/core/initial_distribution.hpp"
#include "episcale/core/model.hpp"

namespace episcale {

/// Invalid configuration; the message names the line and the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything an experiment needs. Round-trips through to_ini() and
/// parse_config() without loss.
struct ExperimentConfig {
  ModelParams params;
  std::string kernel_name = "constant";
  double kernel_amplitude = 1.0;
  double kernel_sigma = 0.2;

  std::string density = "uniform";
  CompartmentProfile compartments;
  InitialDistribution initial;

  std::vector<std::size_t> population_sizes{1000};
  std::size_t replicas = 1;
  std::vector<double> snapshot_times;
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  std::size_t grid = 64;
  double dt = 1e-3;

  std::size_t transport_grid = 32;
  double commutator_alpha = 0.25;
  std::vector<double> increment_lags{0.1, 0.2, 0.4};
  double increment_base = 0.0;

  std::size_t solver_steps() const {
    return static_cast<std::size_t>(std::llround(params.horizon / dt));
  }
};

namespace detail {

inline std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, t.data() + t.size(), out);
  return res.ec == std::errc{} && res.ptr == t.data() + t.size() && std::isfinite(out);
}

inline bool parse_unsigned(const std::string& text, std::uint64_t& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  return res.ec == std::errc{} && res.ptr == t.data() + t.size();
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[k]);
    } else {
      out += std::to_string(values[k]);
    }
  }
  return out;
}

/// Parses "w1*shape1 + w2*shape2 + ..." where shape is uniform, sine_bump or
/// gaussian(cx, cy, sigma). Weights default to 1.
inline SpatialDensity parse_density(const std::string& text) {
  std::vector<MixtureComponent> parts;
  for (const std::string& term : split(text, '+')) {
    if (term.empty()) throw std::invalid_argument("empty density term");
    std::string shape = term;
    double weight = 1.0;
    const auto star = term.find('*');
    if (star != std::string::npos) {
      if (!parse_double(term.substr(0, star), weight))
        throw std::invalid_argument("bad mixture weight in '" + term + "'");
      shape = trim(term.substr(star + 1));
    }
    if (shape == "uniform") {
      parts.push_back({UniformDensity{}, weight});
    } else if (shape == "sine_bump") {
      parts.push_back({SineBumpDensity{}, weight});
    } else if (shape.rfind("gaussian(", 0) == 0 && shape.back() == ')') {
      const auto args = split(shape.substr(9, shape.size() - 10), ',');
      double cx, cy, sigma;
      if (args.size() != 3 || !parse_double(args[0], cx) || !parse_double(args[1], cy) ||
          !parse_double(args[2], sigma))
        throw std::invalid_argument("gaussian needs (cx, cy, sigma) in '" + shape + "'");
      parts.push_back({GaussianDensity{{cx, cy}, sigma}, weight});
    } else {
      throw std::invalid_argument("unknown density shape '" + shape +
                                  "' (uniform, sine_bump, gaussian(cx, cy, sigma))");
    }
  }
  return SpatialDensity(std::move(parts));
}

/// Line number of every "section.key" in an INI text.
inline std::map<std::string, int> key_lines(std::istream& in) {
  std::map<std::string, int> lines;
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      lines[section] = number;
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos) lines[section + "." + trim(t.substr(0, eq))] = number;
  }
  return lines;
}

class ConfigReader {
 public:
  ConfigReader(const boost::property_tree::ptree& tree, std::map<std::string, int> lines,
               std::string source)
      : tree_(tree), lines_(std::move(lines)), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    std::string where = source_;
    if (auto it = lines_.find(key); it != lines_.end()) where += ":" + std::to_string(it->second);
    throw ConfigError(where + ": [" + section_of(key) + "] " + name_of(key) + ": " + message);
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return static_cast<bool>(tree_.get_optional<std::string>(key));
  }

  std::string text(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    return trim(tree_.get<std::string>(key, fallback));
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    double v;
    if (!parse_double(text(key, ""), v)) fail(key, "expected a number, got '" + text(key, "") + "'");
    return v;
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    std::uint64_t v;
    if (!parse_unsigned(text(key, ""), v))
      fail(key, "expected a non-negative integer, got '" + text(key, "") + "'");
    return v;
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) {
    if (!has(key)) return fallback;
    std::vector<double> out;
    const std::string raw = text(key, "");
    if (raw.empty()) return out;
    for (const std::string& item : split(raw, ',')) {
      double v;
      if (!parse_double(item, v)) fail(key, "expected a comma-separated list of numbers, got '" + item + "'");
      out.push_back(v);
    }
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key, const std::vector<std::size_t>& fallback) {
    if (!has(key)) return fallback;
    std::vector<std::size_t> out;
    for (const std::string& item : split(text(key, ""), ',')) {
      std::uint64_t v;
      if (!parse_unsigned(item, v)) fail(key, "expected a comma-separated list of integers, got '" + item + "'");
      out.push_back(static_cast<std::size_t>(v));
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty()) fail(section, "key outside of any section");
      for (const auto& [key, value] : body) {
        const std::string full = section + "." + key;
        if (!used_.count(full)) fail(full, "unknown field");
      }
    }
  }

 private:
  static std::string section_of(const std::string& key) {
    const auto dot = key.find('.');
    return dot == std::string::npos ? key : key.substr(0, dot);
  }
  static std::string name_of(const std::string& key) {
    const auto dot = key.find('.');
    return dot == std::string::npos ? std::string() : key.substr(dot + 1);
  }

  const boost::property_tree::ptree& tree_;
  std::map<std::string, int> lines_;
  std::string source_;
  std::set<std::string> used_;
};

}  // namespace detail

/// Parses and validates an INI experiment description.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  boost::property_tree::ptree tree;
  {
    std::istringstream in(text);
    try {
      boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
    }
  }
  std::istringstream scan(text);
  detail::ConfigReader r(tree, detail::key_lines(scan), source);
  ExperimentConfig c;

  // [model]
  c.params.p = r.number("model.p", c.params.p);
  c.params.q = r.number("model.q", c.params.q);
  c.params.horizon = r.number("model.horizon", c.params.horizon);
  if (!(c.params.p >= 0.0)) r.fail("model.p", "must be >= 0");
  if (!(c.params.q >= 0.0)) r.fail("model.q", "must be >= 0");
  if (!(c.params.horizon > 0.0)) r.fail("model.horizon", "must be > 0");
  const std::string regime = r.text("model.regime", "meanfield");
  if (regime == "meanfield") {
    c.kernel_name = r.text("model.kernel", "constant");
    c.kernel_amplitude = r.number("model.kernel_amplitude", 1.0);
    c.kernel_sigma = r.number("model.kernel_sigma", 0.2);
    try {
      if (c.kernel_name == "constant") {
        c.params.regime = MeanFieldRegime{InteractionKernel::constant(c.kernel_amplitude)};
      } else if (c.kernel_name == "gaussian") {
        c.params.regime =
            MeanFieldRegime{InteractionKernel::gaussian(c.kernel_amplitude, c.kernel_sigma)};
      } else {
        r.fail("model.kernel", "unknown kernel '" + c.kernel_name + "' (constant, gaussian)");
      }
    } catch (const std::invalid_argument& e) {
      r.fail("model.kernel", e.what());
    }
  } else if (regime == "local") {
    LocalRegime local;
    local.beta = r.number("model.beta", local.beta);
    local.exponent_divisor = r.number("model.exponent_divisor", local.exponent_divisor);
    if (!(local.beta > 0.0 && local.beta < 1.0 / 3.0))
      r.fail("model.beta", "must lie in (0, 1/3), got " + detail::format_double(local.beta));
    if (!(local.exponent_divisor > 0.0)) r.fail("model.exponent_divisor", "must be > 0");
    c.params.regime = local;
  } else {
    r.fail("model.regime", "must be 'meanfield' or 'local', got '" + regime + "'");
  }

  // [initial]
  c.density = r.text("initial.density", "uniform");
  SpatialDensity density;
  try {
    density = detail::parse_density(c.density);
  } catch (const std::invalid_argument& e) {
    r.fail("initial.density", e.what());
  }
  c.compartments.infected_base = r.number("initial.infected_base", 0.1);
  c.compartments.infected_amplitude = r.number("initial.infected_amplitude", 0.0);
  const auto center = r.numbers("initial.infected_center", {0.5, 0.5});
  if (center.size() != 2) r.fail("initial.infected_center", "expected two coordinates");
  c.compartments.infected_center = {center[0], center[1]};
  c.compartments.infected_width = r.number("initial.infected_width", 0.1);
  c.compartments.removed_fraction = r.number("initial.removed_fraction", 0.0);
  c.initial = InitialDistribution(density, c.compartments);
  try {
    c.initial.validate();
  } catch (const std::invalid_argument& e) {
    r.fail("initial.density", e.what());
  }

  // [experiment]
  c.population_sizes = r.counts("experiment.N", c.population_sizes);
  if (c.population_sizes.empty()) r.fail("experiment.N", "needs at least one population size");
  for (std::size_t k = 0; k < c.population_sizes.size(); ++k) {
    if (c.population_sizes[k] == 0) r.fail("experiment.N", "population sizes must be >= 1");
    if (k > 0 && c.population_sizes[k] <= c.population_sizes[k - 1])
      r.fail("experiment.N", "list must be strictly increasing");
  }
  c.replicas = r.count("experiment.replicas", 1);
  if (c.replicas == 0) r.fail("experiment.replicas", "must be >= 1");
  c.seed = r.count("experiment.seed", 1);
  c.workers = r.count("experiment.workers", 1);
  if (c.workers == 0) r.fail("experiment.workers", "must be >= 1");
  c.snapshot_times = r.numbers("experiment.snapshots", {c.params.horizon});
  for (std::size_t k = 0; k < c.snapshot_times.size(); ++k) {
    if (!(c.snapshot_times[k] >= 0.0 && c.snapshot_times[k] <= c.params.horizon))
      r.fail("experiment.snapshots", "times must lie in [0, horizon]");
    if (k > 0 && !(c.snapshot_times[k] > c.snapshot_times[k - 1]))
      r.fail("experiment.snapshots", "times must be strictly increasing");
  }

  // [solver]
  c.grid = r.count("solver.grid", c.grid);
  if (c.grid < 2) r.fail("solver.grid", "must be >= 2");
  c.dt = r.number("solver.dt", c.dt);
  if (!(c.dt > 0.0)) r.fail("solver.dt", "must be > 0");
  auto on_step = [&](double t) {
    const double k = std::round(t / c.dt);
    return std::abs(k * c.dt - t) <= 1e-9 * std::max(1.0, t);
  };
  if (!on_step(c.params.horizon)) r.fail("solver.dt", "horizon must be a whole number of steps");
  for (double t : c.snapshot_times) {
    if (!on_step(t)) r.fail("experiment.snapshots", "time " + detail::format_double(t) + " is not a multiple of dt");
  }

  // [metrics]
  c.transport_grid = r.count("metrics.transport_grid", c.transport_grid);
  if (c.transport_grid < 1 || c.transport_grid > 64) r.fail("metrics.transport_grid", "must lie in [1, 64]");
  c.commutator_alpha = r.number("metrics.commutator_alpha", c.commutator_alpha);
  if (!(c.commutator_alpha > 0.0 && c.commutator_alpha < 0.5))
    r.fail("metrics.commutator_alpha", "must lie in (0, 1/2)");
  c.increment_lags = r.numbers("metrics.increment_lags", c.increment_lags);
  c.increment_base = r.number("metrics.increment_base", c.increment_base);
  for (double lag : c.increment_lags) {
    if (!(lag > 0.0) || !(c.increment_base + lag <= c.params.horizon))
      r.fail("metrics.increment_lags", "lags must be > 0 and end within the horizon");
  }

  r.reject_unknown();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

/// Canonical INI text; parse_config(to_ini(c)) reproduces c.
inline std::string to_ini(const ExperimentConfig& c) {
  using detail::format_double;
  std::ostringstream out;
  out << "[model]\n";
  out << "p = " << format_double(c.params.p) << "\n";
  out << "q = " << format_double(c.params.q) << "\n";
  out << "horizon = " << format_double(c.params.horizon) << "\n";
  if (const auto* local = std::get_if<LocalRegime>(&c.params.regime)) {
    out << "regime = local\n";
    out << "beta = " << format_double(local->beta) << "\n";
    out << "exponent_divisor = " << format_double(local->exponent_divisor) << "\n";
  } else {
    out << "regime = meanfield\n";
    out << "kernel = " << c.kernel_name << "\n";
    out << "kernel_amplitude = " << format_double(c.kernel_amplitude) << "\n";
    if (c.kernel_name == "gaussian") out << "kernel_sigma = " << format_double(c.kernel_sigma) << "\n";
  }
  out << "\n[initial]\n";
  out << "density = " << c.density << "\n";
  out << "infected_base = " << format_double(c.compartments.infected_base) << "\n";
  out << "infected_amplitude = " << format_double(c.compartments.infected_amplitude) << "\n";
  out << "infected_center = " << format_double(c.compartments.infected_center.x) << ", "
      << format_double(c.compartments.infected_center.y) << "\n";
  out << "infected_width = " << format_double(c.compartments.infected_width) << "\n";
  out << "removed_fraction = " << format_double(c.compartments.removed_fraction) << "\n";
  out << "\n[experiment]\n";
  out << "N = " << detail::join(c.population_sizes) << "\n";
  out << "replicas = " << c.replicas << "\n";
  out << "seed = " << c.seed << "\n";
  out << "workers = " << c.workers << "\n";
  out << "snapshots = " << detail::join(c.snapshot_times) << "\n";
  out << "\n[solver]\n";
  out << "grid = " << c.grid << "\n";
  out << "dt = " << format_double(c.dt) << "\n";
  out << "\n[metrics]\n";
  out << "transport_grid = " << c.transport_grid << "\n";
  out << "commutator_alpha = " << format_double(c.commutator_alpha) << "\n";
  out << "increment_lags = " << detail::join(c.increment_lags) << "\n";
  out << "increment_base = " << format_double(c.increment_base) << "\n";
  return out.str();
}

}  // namespace episcale
