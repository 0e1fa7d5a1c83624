#pragma once

// Run configuration: flat "key = value" text grouped in [sections].
//
//   [model]        model, gamma, A, omega
//   [tolerances]   every numerical tolerance, see kToleranceKeys
//   [sweep] [curve] [tongue] [orbit] [natfreq]   one per subcommand
//
// '#' starts a comment line. Values are free text; lists are separated by
// whitespace.

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nlres/codim2.hpp"
#include "nlres/continuation.hpp"
#include "nlres/model.hpp"
#include "nlres/sweep.hpp"

namespace nlres {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Config {
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key, std::string value);

  // Typed getters; a present but malformed value throws ConfigError.
  std::string text(const std::string& section, const std::string& key, std::string fallback) const;
  double number(const std::string& section, const std::string& key, double fallback) const;
  int integer(const std::string& section, const std::string& key, int fallback) const;
  bool flag(const std::string& section, const std::string& key, bool fallback) const;
  // Exactly `count` numbers, or the fallback when the key is absent.
  std::vector<double> numbers(const std::string& section, const std::string& key,
                              std::vector<double> fallback, std::size_t count = 0) const;

  // Throws ConfigError naming the first key of `section` not in `allowed`.
  void restrict(const std::string& section, const std::vector<std::string>& allowed) const;

  bool operator==(const Config&) const = default;
};

// Throws ConfigError with the offending line number.
Config parse_config(std::string_view text);
std::string format_config(const Config& c);

// Tolerance keys of the [tolerances] section. Those marked scalable are
// multiplied by the --tol-scale factor.
struct ToleranceKey {
  const char* name;
  bool scalable;
};
extern const std::vector<ToleranceKey> kToleranceKeys;

struct Numerics {
  ContinuationOptions continuation;
  TongueOptions tongue;
  SweepTiming timing;

  OrbitOptions orbit() const { return continuation.orbit; }
  Tolerances ode() const { return continuation.orbit.tol; }
};

// Defaults overridden by [tolerances], then scaled by tol_scale (> 0).
Numerics numerics_from(const Config& c, double tol_scale = 1.0);

// The [model] section; unset fields keep the ModelParams defaults.
ModelParams model_from(const Config& c);

struct RunConfig {
  std::string command;
  Config config;
  std::filesystem::path out = ".";
  int threads = 0;
  double tol_scale = 1.0;
};

} // namespace nlres
