#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "beamwander/errors.hpp"
#include "beamwander/experiment.hpp"

// Config files are plain text, one `key = value unit` per line, `#` starts a comment.
// Physical values in files must carry their unit; command-line overrides may omit it
// (SI assumed). Lists are comma separated with one trailing unit, or
// `logspace(first, last, count)`.

namespace beamwander::cli {

enum class Quantity { length, wavenumber, cn2, dimensionless, count, seed, text, list_cn2, list_ratio };

struct KeySpec {
  std::string_view name;
  Quantity quantity;
  std::string_view fallback; ///< empty: no default
  std::string_view help;
};

inline constexpr KeySpec kKeys[] = {
    {"cn2", Quantity::cn2, "", "refractive-index structure constant"},
    {"inner_scale", Quantity::length, "", "inner scale l0 (give this or inner_scale_reduced)"},
    {"inner_scale_reduced", Quantity::length, "", "reduced inner scale l0' = l0 / 2pi"},
    {"outer_scale", Quantity::length, "100 m", "outer scale L0"},
    {"z", Quantity::length, "", "propagation distance"},
    {"r0", Quantity::length, "", "aperture radius"},
    {"q0", Quantity::wavenumber, "1e7 1/m", "carrier wavenumber"},
    {"lambda_c", Quantity::length, "inf", "source coherence length (inf: coherent)"},
    {"r1_ratio", Quantity::dimensionless, "", "r1^2/r0^2, alternative to lambda_c"},
    {"estimator", Quantity::text, "wave", "wave | kinetic"},
    {"grid_n", Quantity::count, "256", "grid points per side"},
    {"grid_dx", Quantity::length, "", "grid pitch (give this or window)"},
    {"window", Quantity::length, "", "grid side length"},
    {"n_screens", Quantity::count, "", "turbulence layers (default max(10, z / 500 m))"},
    {"n_atm", Quantity::count, "200", "atmosphere realizations"},
    {"n_src", Quantity::count, "16", "source realizations per atmosphere"},
    {"ray_pairs", Quantity::count, "256", "kinetic estimator: antithetic ray pairs"},
    {"modes", Quantity::count, "256", "kinetic estimator: Fourier modes per layer"},
    {"seed", Quantity::seed, "1", "master seed"},
    {"workers", Quantity::count, "0", "worker threads (0: BEAMWANDER_WORKERS or all cores)"},
    {"cn2_grid", Quantity::list_cn2, "", "sweep turbulence strengths, ascending"},
    {"ratios", Quantity::list_ratio, "1", "sweep coherence ratios r1^2/r0^2"},
    {"screens", Quantity::count, "2000", "validate-screens: ensemble size"},
    {"dz", Quantity::length, "", "validate-screens: layer thickness (default z / n_screens)"},
    {"format", Quantity::text, "", "csv | json (default depends on subcommand)"},
    {"output", Quantity::text, "-", "output path, - for stdout"},
};

inline const KeySpec *find_key(std::string_view name) {
  for (const auto &k : kKeys)
    if (k.name == name)
      return &k;
  return nullptr;
}

/// Flag spelling of a key: grid_n -> grid-n.
inline std::string flag_name(std::string_view key) {
  std::string s(key);
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

struct RawValue {
  std::string text;
  bool from_file = false;
};

/// Key -> raw text after merging file values and overrides.
using RawConfig = std::map<std::string, RawValue>;

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::optional<double> parse_number(std::string_view s) {
  const std::string t = trim(s);
  if (t == "inf" || t == "infinity")
    return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto *end = t.data() + t.size();
  auto [p, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || p != end || t.empty())
    return std::nullopt;
  return v;
}

/// Scale factor to SI for a unit token of the given quantity, or nullopt.
inline std::optional<double> unit_scale(Quantity q, std::string_view unit) {
  switch (q) {
  case Quantity::length:
    if (unit == "m")
      return 1.0;
    if (unit == "cm")
      return 1e-2;
    if (unit == "mm")
      return 1e-3;
    if (unit == "km")
      return 1e3;
    return std::nullopt;
  case Quantity::wavenumber:
    if (unit == "1/m" || unit == "m^-1")
      return 1.0;
    return std::nullopt;
  case Quantity::cn2:
  case Quantity::list_cn2:
    if (unit == "m^-2/3" || unit == "m^(-2/3)")
      return 1.0;
    return std::nullopt;
  default:
    return std::nullopt;
  }
}

inline bool needs_unit(Quantity q) {
  return q == Quantity::length || q == Quantity::wavenumber || q == Quantity::cn2 ||
         q == Quantity::list_cn2;
}

} // namespace detail

/// Reads `key = value` lines into raw; rejects unknown and repeated keys.
inline void read_config_text(std::istream &in, RawConfig &raw) {
  std::string line;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty())
      continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(t, "expected `key = value`");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (!find_key(key))
      throw ConfigError(key, "unknown key");
    if (seen[key]++)
      throw ConfigError(key, "given more than once");
    if (value.empty())
      throw ConfigError(key, "empty value");
    raw[key] = {value, true};
  }
}

inline void read_config_file(const std::string &path, RawConfig &raw) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("config", "cannot open file " + path);
  read_config_text(in, raw);
}

inline void apply_override(RawConfig &raw, const std::string &key, const std::string &value) {
  if (!find_key(key))
    throw ConfigError(key, "unknown key");
  raw[key] = {detail::trim(value), false};
}

/// Value of a scalar physical key in SI units.
inline double parse_quantity(const std::string &key, const RawValue &raw) {
  const KeySpec *spec = find_key(key);
  if (!spec)
    throw ConfigError(key, "unknown key");
  std::istringstream is(raw.text);
  std::string number, unit, extra;
  is >> number >> unit >> extra;
  if (!extra.empty())
    throw ConfigError(key, "unexpected text after the unit: '" + extra + "'");
  const auto v = detail::parse_number(number);
  if (!v)
    throw ConfigError(key, "not a number: '" + number + "'");
  if (std::isinf(*v) && key != "lambda_c")
    throw ConfigError(key, "only lambda_c may be inf");
  if (!detail::needs_unit(spec->quantity)) {
    if (!unit.empty())
      throw ConfigError(key, "dimensionless value takes no unit, got '" + unit + "'");
    return *v;
  }
  if (unit.empty()) {
    if (raw.from_file && !std::isinf(*v))
      throw ConfigError(key, "missing unit");
    return *v;
  }
  const auto scale = detail::unit_scale(spec->quantity, unit);
  if (!scale)
    throw ConfigError(key, "unit '" + unit + "' is not valid here");
  return *v * *scale;
}

/// List value: `a, b, c [unit]` or `logspace(first, last, count) [unit]`.
inline std::vector<double> parse_list(const std::string &key, const RawValue &raw) {
  const KeySpec *spec = find_key(key);
  if (!spec)
    throw ConfigError(key, "unknown key");
  std::string body = detail::trim(raw.text);
  std::string unit;
  if (body.starts_with("logspace(")) {
    const auto close = body.find(')');
    if (close == std::string::npos)
      throw ConfigError(key, "unterminated logspace(...)");
    unit = detail::trim(body.substr(close + 1));
    body = body.substr(0, close + 1);
  } else {
    const auto sp = body.find_last_of(" \t");
    if (sp != std::string::npos && !detail::parse_number(body.substr(sp + 1)) &&
        body.substr(sp + 1).find(',') == std::string::npos) {
      unit = detail::trim(body.substr(sp + 1));
      body = detail::trim(body.substr(0, sp));
    }
  }
  double scale = 1.0;
  if (spec->quantity == Quantity::list_cn2) {
    if (unit.empty()) {
      if (raw.from_file)
        throw ConfigError(key, "missing unit");
    } else {
      const auto f = detail::unit_scale(spec->quantity, unit);
      if (!f)
        throw ConfigError(key, "unit '" + unit + "' is not valid here");
      scale = *f;
    }
  } else if (!unit.empty()) {
    throw ConfigError(key, "dimensionless list takes no unit, got '" + unit + "'");
  }

  std::vector<double> out;
  auto number = [&](std::string_view t) {
    const auto v = detail::parse_number(t);
    if (!v || !std::isfinite(*v))
      throw ConfigError(key, "not a finite number: '" + detail::trim(t) + "'");
    return *v;
  };
  if (body.starts_with("logspace(")) {
    std::string inner = body.substr(9, body.size() - 10);
    std::vector<std::string> parts;
    std::stringstream ss(inner);
    for (std::string p; std::getline(ss, p, ',');)
      parts.push_back(p);
    if (parts.size() != 3)
      throw ConfigError(key, "logspace needs (first, last, count)");
    const double a = number(parts[0]), b = number(parts[1]), c = number(parts[2]);
    if (!(a > 0.0) || !(b > a) || c < 2 || c != std::floor(c))
      throw ConfigError(key, "logspace needs 0 < first < last and integer count >= 2");
    const auto n = static_cast<std::size_t>(c);
    for (std::size_t i = 0; i < n; ++i)
      out.push_back(a * std::pow(b / a, static_cast<double>(i) / static_cast<double>(n - 1)));
    out.back() = b;
  } else {
    std::stringstream ss(body);
    for (std::string p; std::getline(ss, p, ',');)
      out.push_back(number(p));
  }
  if (out.empty())
    throw ConfigError(key, "empty list");
  for (double &v : out)
    v *= scale;
  return out;
}

enum class OutputFormat { csv, json };

/// Fully resolved run configuration.
struct RunConfig {
  ExperimentConfig experiment;
  std::vector<double> cn2_grid;
  std::vector<double> ratios{1.0};
  std::size_t screens = 2000;
  double dz = 0.0; ///< layer thickness used by validate-screens
  std::optional<OutputFormat> format;
  std::string output = "-";
  int workers = 0;
  /// Canonical `key = value unit` lines in schema order, for provenance.
  std::vector<std::pair<std::string, std::string>> echo;
};

namespace detail {

inline std::string format_double(double v) {
  if (std::isinf(v))
    return "inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::size_t as_count(const std::string &key, double v) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e15)
    throw ConfigError(key, "expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

} // namespace detail

/// Turns raw key/values into a RunConfig; checks required keys, units, domains and
/// mutually exclusive pairs. `env_workers` is the BEAMWANDER_WORKERS fallback.
inline RunConfig resolve_config(const RawConfig &raw, std::optional<int> env_workers = {}) {
  RunConfig rc;
  auto has = [&](const char *k) { return raw.count(k) > 0; };
  auto value = [&](const std::string &k) -> RawValue {
    if (auto it = raw.find(k); it != raw.end())
      return it->second;
    const KeySpec *spec = find_key(k);
    if (spec->fallback.empty())
      throw ConfigError(k, "missing required key");
    return {std::string(spec->fallback), false};
  };
  auto number = [&](const std::string &k) { return parse_quantity(k, value(k)); };
  auto count = [&](const std::string &k) { return detail::as_count(k, number(k)); };
  auto positive = [&](const std::string &k) {
    const double v = number(k);
    if (!(v > 0.0))
      throw ConfigError(k, "must be > 0");
    return v;
  };

  auto &e = rc.experiment;
  e.turb.cn2 = number("cn2");
  if (!(e.turb.cn2 >= 0.0))
    throw ConfigError("cn2", "must be >= 0");
  if (has("inner_scale") && has("inner_scale_reduced"))
    throw ConfigError("inner_scale_reduced", "conflicts with inner_scale; give one");
  if (has("inner_scale_reduced"))
    e.turb.inner_scale = 2.0 * std::numbers::pi * positive("inner_scale_reduced");
  else
    e.turb.inner_scale = positive("inner_scale");
  e.turb.outer_scale = positive("outer_scale");
  if (!(e.turb.outer_scale > e.turb.inner_scale))
    throw ConfigError("outer_scale", "must exceed the inner scale");
  e.geom.z = positive("z");
  e.src.r0 = positive("r0");
  e.src.q0 = positive("q0");
  if (has("lambda_c") && has("r1_ratio"))
    throw ConfigError("r1_ratio", "conflicts with lambda_c; give one");
  if (has("r1_ratio")) {
    const double r = number("r1_ratio");
    if (!(r > 0.0) || r > 1.0)
      throw ConfigError("r1_ratio", "must lie in (0, 1]");
    e.src.lambda_c = coherence_length_for_ratio(e.src.r0, r);
  } else {
    e.src.lambda_c = positive("lambda_c");
  }

  const std::string est = value("estimator").text;
  if (est == "wave")
    e.estimator = Estimator::wave;
  else if (est == "kinetic")
    e.estimator = Estimator::kinetic;
  else
    throw ConfigError("estimator", "expected wave or kinetic, got '" + est + "'");

  e.grid.n = count("grid_n");
  if (has("grid_dx") && has("window"))
    throw ConfigError("window", "conflicts with grid_dx; give one");
  if (has("window"))
    e.grid = SimGrid::from_window(e.grid.n, positive("window"));
  else if (has("grid_dx"))
    e.grid.dx = positive("grid_dx");
  else
    e.grid.dx = 2e-3;
  try {
    e.grid.validate();
  } catch (const ParameterError &err) {
    throw ConfigError("grid_n", err.what());
  }

  const std::size_t screens =
      has("n_screens") ? count("n_screens") : PropagationPlan::default_screen_count(e.geom.z);
  if (screens < 1)
    throw ConfigError("n_screens", "must be >= 1");
  e.plan = PropagationPlan::equispaced(e.geom.z, screens);
  try {
    e.plan.validate();
  } catch (const ParameterError &err) {
    throw ConfigError("n_screens", err.what());
  }

  e.n_atm = count("n_atm");
  e.n_src = count("n_src");
  if (e.n_atm < 1)
    throw ConfigError("n_atm", "must be >= 1");
  if (e.n_src < 1)
    throw ConfigError("n_src", "must be >= 1");
  e.kinetic.ray_pairs = count("ray_pairs");
  e.kinetic.modes = count("modes");
  try {
    e.kinetic.validate();
  } catch (const ParameterError &err) {
    throw ConfigError("ray_pairs", err.what());
  }
  {
    const std::string s = value("seed").text;
    std::uint64_t seed = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ConfigError("seed", "expected an unsigned integer");
    e.master_seed = seed;
  }
  rc.workers = static_cast<int>(count("workers"));
  if (!has("workers") && env_workers)
    rc.workers = *env_workers;
  e.workers = rc.workers;

  if (has("cn2_grid")) {
    rc.cn2_grid = parse_list("cn2_grid", value("cn2_grid"));
    for (std::size_t i = 0; i < rc.cn2_grid.size(); ++i) {
      if (!(rc.cn2_grid[i] >= 0.0))
        throw ConfigError("cn2_grid", "values must be >= 0");
      if (i > 0 && !(rc.cn2_grid[i] > rc.cn2_grid[i - 1]))
        throw ConfigError("cn2_grid", "values must be strictly ascending");
    }
  }
  rc.ratios = parse_list("ratios", value("ratios"));
  for (double r : rc.ratios)
    if (!(r > 0.0) || r > 1.0)
      throw ConfigError("ratios", "each ratio must lie in (0, 1]");

  rc.screens = count("screens");
  rc.dz = has("dz") ? positive("dz") : e.geom.z / static_cast<double>(screens);
  if (has("format")) {
    const std::string f = value("format").text;
    if (f == "csv")
      rc.format = OutputFormat::csv;
    else if (f == "json")
      rc.format = OutputFormat::json;
    else
      throw ConfigError("format", "expected csv or json, got '" + f + "'");
  }
  rc.output = value("output").text;

  using detail::format_double;
  auto list = [](const std::vector<double> &v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
      s += (i ? ", " : "") + format_double(v[i]);
    return s;
  };
  rc.echo = {
      {"cn2", format_double(e.turb.cn2) + " m^-2/3"},
      {"inner_scale", format_double(e.turb.inner_scale) + " m"},
      {"inner_scale_reduced", format_double(e.turb.reduced_inner_scale()) + " m"},
      {"outer_scale", format_double(e.turb.outer_scale) + " m"},
      {"z", format_double(e.geom.z) + " m"},
      {"r0", format_double(e.src.r0) + " m"},
      {"q0", format_double(e.src.q0) + " 1/m"},
      {"lambda_c", format_double(e.src.lambda_c) + (e.src.coherent() ? "" : " m")},
      {"r1_ratio", format_double(e.src.r1() * e.src.r1() / (e.src.r0 * e.src.r0))},
      {"estimator", std::string(to_string(e.estimator))},
      {"grid_n", std::to_string(e.grid.n)},
      {"grid_dx", format_double(e.grid.dx) + " m"},
      {"window", format_double(e.grid.window()) + " m"},
      {"n_screens", std::to_string(screens)},
      {"n_atm", std::to_string(e.n_atm)},
      {"n_src", std::to_string(e.n_src)},
      {"ray_pairs", std::to_string(e.kinetic.ray_pairs)},
      {"modes", std::to_string(e.kinetic.modes)},
      {"seed", std::to_string(e.master_seed)},
      {"cn2_grid", rc.cn2_grid.empty() ? "" : list(rc.cn2_grid) + " m^-2/3"},
      {"ratios", list(rc.ratios)},
      {"screens", std::to_string(rc.screens)},
      {"dz", format_double(rc.dz) + " m"},
  };
  return rc;
}

/// Echo text: one `key = value` line per resolved key, each prefixed by `prefix`.
inline std::string echo_text(const RunConfig &rc, std::string_view prefix = "") {
  std::string s;
  for (const auto &[k, v] : rc.echo)
    if (!v.empty())
      s += std::string(prefix) + k + " = " + v + "\n";
  return s;
}

} // namespace beamwander::cli
