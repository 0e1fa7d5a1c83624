#include "nlres/config.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "nlres/errors.hpp"
#include "nlres/io.hpp"

namespace nlres {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string where(const std::string& section, const std::string& key) {
  return "[" + section + "] " + key;
}

} // namespace

bool Config::has(const std::string& section, const std::string& key) const {
  return get(section, key).has_value();
}

std::optional<std::string> Config::get(const std::string& section, const std::string& key) const {
  const auto s = sections.find(section);
  if (s == sections.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

void Config::set(const std::string& section, const std::string& key, std::string value) {
  sections[section][key] = std::move(value);
}

std::string Config::text(const std::string& section, const std::string& key,
                         std::string fallback) const {
  return get(section, key).value_or(std::move(fallback));
}

double Config::number(const std::string& section, const std::string& key, double fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  try {
    return parse_double(*v);
  } catch (const IoError&) {
    throw ConfigError(where(section, key) + ": expected a number, got '" + *v + "'");
  }
}

int Config::integer(const std::string& section, const std::string& key, int fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  std::size_t used = 0;
  int out = 0;
  try {
    out = std::stoi(*v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v->size())
    throw ConfigError(where(section, key) + ": expected an integer, got '" + *v + "'");
  return out;
}

bool Config::flag(const std::string& section, const std::string& key, bool fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "yes" || *v == "1") return true;
  if (*v == "false" || *v == "no" || *v == "0") return false;
  throw ConfigError(where(section, key) + ": expected true or false, got '" + *v + "'");
}

std::vector<double> Config::numbers(const std::string& section, const std::string& key,
                                    std::vector<double> fallback, std::size_t count) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  std::istringstream ss(*v);
  std::vector<double> out;
  for (std::string tok; ss >> tok;) {
    try {
      out.push_back(parse_double(tok));
    } catch (const IoError&) {
      throw ConfigError(where(section, key) + ": '" + tok + "' is not a number");
    }
  }
  if (count && out.size() != count)
    throw ConfigError(where(section, key) + ": expected " + std::to_string(count) + " numbers");
  if (out.empty()) throw ConfigError(where(section, key) + ": empty list");
  return out;
}

void Config::restrict(const std::string& section, const std::vector<std::string>& allowed) const {
  const auto s = sections.find(section);
  if (s == sections.end()) return;
  for (const auto& [k, v] : s->second)
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ConfigError(where(section, k) + ": unknown key");
}

Config parse_config(std::string_view text) {
  Config c;
  std::string section;
  std::istringstream ss{std::string(text)};
  int lineno = 0;
  for (std::string raw; std::getline(ss, raw);) {
    ++lineno;
    const std::string line = trim(raw);
    const std::string at = "line " + std::to_string(lineno) + ": ";
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at + "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(at + "empty section name");
      c.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(at + "expected 'key = value'");
    if (section.empty()) throw ConfigError(at + "key outside any section");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError(at + "empty key");
    if (c.has(section, key)) throw ConfigError(at + "duplicate key '" + key + "'");
    c.set(section, key, trim(std::string_view(line).substr(eq + 1)));
  }
  return c;
}

std::string format_config(const Config& c) {
  std::string out;
  for (const auto& [name, keys] : c.sections) {
    out += "[" + name + "]\n";
    for (const auto& [k, v] : keys) out += k + " = " + v + "\n";
    out += "\n";
  }
  return out;
}

const std::vector<ToleranceKey> kToleranceKeys{
    {"ode_rel", true},          {"ode_abs", true},
    {"newton_target", true},    {"newton_accept", true},
    {"newton_max_iterations", false}, {"newton_max_halvings", false},
    {"symmetry_tol", true},     {"corrector_residual", true},
    {"corrector_step", true},   {"corrector_max_iterations", false},
    {"step_initial", false},    {"step_min", false},
    {"step_max", false},        {"step_grow", false},
    {"step_grow_after", false}, {"closure_tol", true},
    {"closure_min_steps", false}, {"min_cos", false},
    {"localize_tol", true},     {"merge_tol", true},
    {"cusp_tol", true},         {"max_points", false},
    {"strobe_tol", true},       {"settle_factor", false},
};

Numerics numerics_from(const Config& c, double k) {
  if (!(k > 0.0)) throw ConfigError("tolerance scale must be positive");
  std::vector<std::string> names;
  for (const auto& t : kToleranceKeys) names.push_back(t.name);
  c.restrict("tolerances", names);
  const std::string T = "tolerances";
  auto num = [&](const char* key, double def, bool scale) {
    const double v = c.number(T, key, def);
    if (!(v > 0.0)) throw ConfigError(where(T, key) + ": must be positive");
    return scale ? v * k : v;
  };
  auto count = [&](const char* key, int def) {
    const int v = c.integer(T, key, def);
    if (v < 1) throw ConfigError(where(T, key) + ": must be at least 1");
    return v;
  };

  Numerics n;
  OrbitOptions& o = n.continuation.orbit;
  o.tol.rel = num("ode_rel", o.tol.rel, true);
  o.tol.abs = num("ode_abs", o.tol.abs, true);
  o.target = num("newton_target", o.target, true);
  o.accept = num("newton_accept", o.accept, true);
  o.max_iterations = count("newton_max_iterations", o.max_iterations);
  o.max_halvings = count("newton_max_halvings", o.max_halvings);
  o.symmetry_tol = num("symmetry_tol", o.symmetry_tol, true);
  if (o.target > o.accept) throw ConfigError("newton_target exceeds newton_accept");

  ContinuationOptions& co = n.continuation;
  co.corrector.residual_tol = num("corrector_residual", co.corrector.residual_tol, true);
  co.corrector.step_tol = num("corrector_step", co.corrector.step_tol, true);
  co.corrector.max_iterations = count("corrector_max_iterations", co.corrector.max_iterations);
  co.step.initial = num("step_initial", co.step.initial, false);
  co.step.min = num("step_min", co.step.min, false);
  co.step.max = num("step_max", co.step.max, false);
  co.step.grow = num("step_grow", co.step.grow, false);
  co.step.grow_after = count("step_grow_after", co.step.grow_after);
  if (co.step.min > co.step.initial || co.step.initial > co.step.max)
    throw ConfigError("step sizes must satisfy step_min <= step_initial <= step_max");
  co.closure_tol = num("closure_tol", co.closure_tol, true);
  co.closure_min_steps = count("closure_min_steps", co.closure_min_steps);
  co.min_cos = num("min_cos", co.min_cos, false);
  if (co.min_cos >= 1.0) throw ConfigError(where(T, "min_cos") + ": must be below 1");
  co.localize_tol = num("localize_tol", co.localize_tol, true);
  co.merge_tol = num("merge_tol", co.merge_tol, true);
  co.max_points = count("max_points", co.max_points);

  TongueOptions& to = n.tongue;
  to.step = co.step;
  to.corrector = co.corrector;
  to.orbit = co.orbit;
  to.max_points = co.max_points;
  to.closure_tol = co.closure_tol;
  to.closure_min_steps = co.closure_min_steps;
  to.min_cos = co.min_cos;
  to.cusp_tol = num("cusp_tol", to.cusp_tol, true);

  SweepTiming& st = n.timing;
  st.tol = o.tol;
  st.strobe_tol = num("strobe_tol", st.strobe_tol, true);
  st.settle_factor = num("settle_factor", st.settle_factor, false);
  return n;
}

ModelParams model_from(const Config& c) {
  c.restrict("model", {"model", "gamma", "A", "omega"});
  ModelParams p;
  try {
    p.model = parse_model(c.text("model", "model", "duffing"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("[model] model: ") + e.what());
  }
  p.gamma = c.number("model", "gamma", p.gamma);
  p.A = c.number("model", "A", p.A);
  p.omega = c.number("model", "omega", p.omega);
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("[model]: ") + e.what());
  }
  return p;
}

} // namespace nlres
