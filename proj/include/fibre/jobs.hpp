#pragma once

// Configuration-driven report jobs behind the fibre-forge command line.

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace fibre {

/// Schema or content error in a job configuration; `path` locates it (e.g. "bundle.degree").
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::invalid_argument(path.empty() ? message : path + ": " + message) {}
};

struct Thresholds {
  double residual = 1e-10;
  double route_delta = 1e-6;
  double integrality = 1e-3;
};

struct JobResult {
  nlohmann::json report;
  std::string csv;  // table mirror
  bool pass = false;
};

/// Parses config text; throws ConfigError with the byte offset of a syntax error.
nlohmann::json parse_config(const std::string& text);

/// Throw ConfigError on schema problems; numeric failures propagate as
/// DomainError, PartitionError or SizeCapExceeded.
JobResult run_bundle_report(const nlohmann::json& config, bool timings = false);
JobResult run_algebra_report(const nlohmann::json& config, bool timings = false);

/// Schema check plus dry-run resolution of expressions, charts and algebras.
/// Empty result means the config is valid.
std::vector<std::string> validate_config(const nlohmann::json& config);

}  // namespace fibre
