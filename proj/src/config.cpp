#include "opzosa/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace opzosa {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& key, const std::string& value) {
  std::vector<std::string> items;
  std::string_view rest = value;
  while (true) {
    const auto comma = rest.find(',');
    std::string item = trim(rest.substr(0, comma));
    if (item.empty()) throw ConfigError(key, "empty list item");
    items.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return items;
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ConfigError(key, "expected a finite number, got '" + value + "'");
  }
  return out;
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  std::int64_t out = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key, "expected an integer, got '" + value + "'");
  }
  return out;
}

std::uint64_t to_seed(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key, "expected a nonnegative integer, got '" + value + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + value + "'");
}

int to_count(const std::string& key, const std::string& value) {
  const std::int64_t v = to_int(key, value);
  if (v < 0 || v > std::numeric_limits<int>::max()) throw ConfigError(key, "out of range");
  return static_cast<int>(v);
}

template <class T, class Fn>
std::vector<T> map_list(const std::string& key, const std::string& value, Fn&& fn) {
  std::vector<T> out;
  for (const std::string& item : split_list(key, value)) out.push_back(fn(key, item));
  return out;
}

// Re-throws library parse errors (unknown names and the like) against a key.
template <class Fn>
auto keyed(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

using Setter = std::function<void(Config&, const std::string&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"problem.kind",
       [](Config& c, const std::string& k, const std::string& v) {
         if (v == "desk") {
           c.kind = ProblemKind::desk;
         } else if (v == "geomedian") {
           c.kind = ProblemKind::geomedian;
         } else {
           throw ConfigError(k, "expected desk or geomedian, got '" + v + "'");
         }
       }},
      {"problem.n", [](Config& c, const std::string& k, const std::string& v) { c.n = to_int(k, v); }},
      {"problem.L", [](Config& c, const std::string& k, const std::string& v) { c.L = to_double(k, v); }},
      {"problem.radius",
       [](Config& c, const std::string& k, const std::string& v) { c.radius = to_double(k, v); }},
      {"problem.sigma",
       [](Config& c, const std::string& k, const std::string& v) { c.sigma = to_double(k, v); }},
      {"problem.r", [](Config& c, const std::string& k, const std::string& v) { c.r = to_double(k, v); }},
      {"problem.g_center",
       [](Config& c, const std::string& k, const std::string& v) {
         c.g_center = map_list<double>(k, v, to_double);
       }},
      {"problem.f_center",
       [](Config& c, const std::string& k, const std::string& v) {
         c.f_center = map_list<double>(k, v, to_double);
       }},
      {"problem.M", [](Config& c, const std::string& k, const std::string& v) { c.M = to_int(k, v); }},
      {"problem.lambda",
       [](Config& c, const std::string& k, const std::string& v) { c.lambda = to_double(k, v); }},
      {"problem.topology",
       [](Config& c, const std::string& k, const std::string& v) {
         if (v != "centralized") keyed(k, [&] { return parse_topology(v); });
         c.topology = v;
       }},
      {"problem.penalty_scale",
       [](Config& c, const std::string& k, const std::string& v) {
         c.penalty_scale = keyed(k, [&] { return parse_penalty_scale(v); });
       }},
      {"problem.data_seed",
       [](Config& c, const std::string& k, const std::string& v) { c.data_seed = to_seed(k, v); }},
      {"solver.algo",
       [](Config& c, const std::string& k, const std::string& v) {
         c.algo = keyed(k, [&] { return parse_algorithm(v); });
       }},
      {"solver.N", [](Config& c, const std::string& k, const std::string& v) { c.N = to_count(k, v); }},
      {"solver.anchor",
       [](Config& c, const std::string& k, const std::string& v) {
         if (v == "lower") {
           c.anchor = GradientAnchor::lower_point;
         } else if (v == "literal") {
           c.anchor = GradientAnchor::previous_iterate;
         } else {
           throw ConfigError(k, "expected lower or literal, got '" + v + "'");
         }
       }},
      {"solver.T_cap",
       [](Config& c, const std::string& k, const std::string& v) { c.T_cap = to_int(k, v); }},
      {"solver.step",
       [](Config& c, const std::string& k, const std::string& v) { c.step = to_double(k, v); }},
      {"solver.step_grid",
       [](Config& c, const std::string& k, const std::string& v) {
         c.step_grid = map_list<double>(k, v, to_double);
       }},
      {"solver.seed",
       [](Config& c, const std::string& k, const std::string& v) { c.seed = to_seed(k, v); }},
      {"bench.topologies",
       [](Config& c, const std::string& k, const std::string& v) {
         c.topologies = split_list(k, v);
         for (const auto& t : c.topologies) {
           if (t != "centralized") keyed(k, [&] { return parse_topology(t); });
         }
       }},
      {"bench.algorithms",
       [](Config& c, const std::string& k, const std::string& v) {
         c.algorithms = map_list<Algorithm>(k, v, [](const std::string& key, const std::string& item) {
           return keyed(key, [&] { return parse_algorithm(item); });
         });
       }},
      {"bench.seeds",
       [](Config& c, const std::string& k, const std::string& v) {
         c.seeds = map_list<std::uint64_t>(k, v, to_seed);
       }},
      {"bench.tune_seeds",
       [](Config& c, const std::string& k, const std::string& v) {
         c.tune_seeds = map_list<std::uint64_t>(k, v, to_seed);
       }},
      {"bench.md_steps",
       [](Config& c, const std::string& k, const std::string& v) { c.md_steps = to_count(k, v); }},
      {"bench.reference_tol",
       [](Config& c, const std::string& k, const std::string& v) { c.reference_tol = to_double(k, v); }},
      {"output.timing",
       [](Config& c, const std::string& k, const std::string& v) { c.timing = to_bool(k, v); }},
  };
  return table;
}

void require(bool ok, const char* key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

}  // namespace

ConfigError::ConfigError(std::string key, const std::string& message)
    : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [key, setter] : setters()) out.push_back(key);
    return out;
  }();
  return keys;
}

void apply_setting(Config& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, setter] : setters()) {
    if (name == key) {
      if (value.empty()) throw ConfigError(key, "empty value");
      setter(cfg, key, value);
      return;
    }
  }
  throw ConfigError(key, "unknown key");
}

Config parse_config_text(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(cfg, trim(std::string_view(body).substr(0, eq)),
                  trim(std::string_view(body).substr(eq + 1)));
  }
  return cfg;
}

Config load_config(const std::string& path, const std::vector<std::string>& overrides) {
  Config cfg;
  if (!path.empty()) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw ConfigError("", "cannot read config file '" + path + "'");
    std::ostringstream text;
    text << file.rdbuf();
    cfg = parse_config_text(text.str(), path);
  }
  for (const std::string& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("", "override '" + item + "' is not key=value");
    apply_setting(cfg, trim(std::string_view(item).substr(0, eq)),
                  trim(std::string_view(item).substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

Index Config::dimension() const {
  if (n) return *n;
  return kind == ProblemKind::desk ? 2 : 20;
}

double Config::noise() const {
  if (sigma) return *sigma;
  return kind == ProblemKind::desk ? 0.0 : 0.01;
}

double Config::smoothing_radius() const {
  if (r) return *r;
  return kind == ProblemKind::desk ? 1e-3 : 1e-2;
}

void Config::validate() const {
  require(dimension() >= 1, "problem.n", "must be at least 1");
  require(noise() >= 0.0, "problem.sigma", "must be nonnegative");
  require(smoothing_radius() > 0.0, "problem.r", "must be positive");
  require(N >= 1, "solver.N", "must be at least 1");
  require(T_cap >= 1, "solver.T_cap", "must be at least 1");
  require(!step || *step > 0.0, "solver.step", "must be positive");
  require(!step_grid.empty(), "solver.step_grid", "must not be empty");
  for (double s : step_grid) require(s > 0.0, "solver.step_grid", "steps must be positive");
  require(!seeds.empty(), "bench.seeds", "must not be empty");
  require(!tune_seeds.empty(), "bench.tune_seeds", "must not be empty");
  require(reference_tol > 0.0, "bench.reference_tol", "must be positive");

  if (kind == ProblemKind::desk) {
    require(L > 0.0, "problem.L", "must be positive");
    require(radius > 0.0, "problem.radius", "must be positive");
    const auto n = static_cast<std::size_t>(dimension());
    require(g_center.empty() || g_center.size() == n, "problem.g_center",
            "needs problem.n entries");
    require(f_center.empty() || f_center.size() == n, "problem.f_center",
            "needs problem.n entries");
    return;
  }
  require(M >= 2, "problem.M", "must be at least 2");
  require(lambda > 0.0, "problem.lambda", "must be positive");
  bool decentralized = topology != "centralized";
  for (const auto& t : topologies) decentralized = decentralized || t != "centralized";
  require(!decentralized || penalty_scale.has_value(), "problem.penalty_scale",
          "required for decentralized penalties (full or half)");
}

DeskProblemConfig Config::desk() const {
  DeskProblemConfig out;
  out.n = dimension();
  out.L = L;
  out.radius = radius;
  out.sigma = noise();
  out.r = smoothing_radius();
  if (!g_center.empty()) out.g_center = Eigen::Map<const Vector>(g_center.data(), out.n);
  if (!f_center.empty()) out.f_center = Eigen::Map<const Vector>(f_center.data(), out.n);
  return out;
}

ExperimentConfig Config::experiment() const {
  ExperimentConfig out;
  out.n = dimension();
  out.M = M;
  out.lambda = lambda;
  out.sigma = noise();
  out.r = smoothing_radius();
  out.md_r = smoothing_radius();
  out.scale = penalty_scale.value_or(PenaltyScale::half);
  out.topologies = topologies;
  out.algorithms = algorithms;
  out.N_outer = N;
  out.md_steps = md_steps;
  out.seeds = seeds;
  out.data_seed = data_seed;
  out.step_grid = step_grid;
  out.tune_seeds = tune_seeds;
  out.anchor = anchor;
  out.inner_cap = T_cap;
  out.reference_tolerance = reference_tol;
  out.record_timing = timing;
  return out;
}

}  // namespace opzosa
