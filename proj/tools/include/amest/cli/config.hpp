#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "amest/sim.hpp"

namespace amest::cli {

/// Malformed or out-of-range configuration. `line` is 0 when the problem is
/// not tied to a specific line (for example a cross-field check).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, int line, std::string key, const std::string& message);
  const std::string& source() const { return source_; }
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  std::string source_;
  int line_;
  std::string key_;
};

/// Parses the sectioned key = value format. Missing keys keep their default,
/// unknown sections or keys are rejected. `source` only labels diagnostics.
Scenario parse_config(const std::string& text, const std::string& source = "<config>");
Scenario load_config(const std::filesystem::path& path);

/// Renders a scenario in the same format, one annotated line per key.
/// format_config(Scenario{}) is the default configuration.
std::string format_config(const Scenario& scenario);

/// Resolved scenario as pretty-printed JSON, grouped by section.
std::string config_to_json(const Scenario& scenario);

}  // namespace amest::cli
