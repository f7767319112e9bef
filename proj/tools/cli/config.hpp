#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpspec/gpspec.hpp"

namespace gpspec::cli {

/// Invalid configuration; `what()` is already formatted as "file:line:col: error: ...".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemSection {
  int d = 1;
  double a0 = 1.0;
  double mu = 1.0;
  double power = 2.0;
  PotentialSpec potential{PotentialSpec::Kind::kCosine, 1.0, 0.5, 0.0, 1, {}};
};

struct EstimatorSection {
  enum class Certificate { kAuto, kOn, kOff };
  Certificate certificate = Certificate::kAuto;
  bool gap = true;
};

struct StudySection {
  std::vector<int> cutoffs{8, 12, 16, 24, 32};
  int reference_cutoff = 256;
  int threads = 1;
  int coarse_certificate_cutoff = 2;
};

struct RunConfig {
  std::string source = "<defaults>";
  ProblemSection problem;
  int cutoff = 16;
  int fine_factor = 4;
  SolverConfig solver;
  LinSolveConfig lin;
  std::vector<Scheme> schemes{Scheme::kNewton};
  Normalization normalization = Normalization::kAffine;
  EstimatorSection estimator;
  StudySection study;
  std::filesystem::path output = "gpspec-out";
  std::uint64_t seed = 1;
};

/// Parse a YAML run configuration. Unknown keys, wrong types and out-of-range values
/// raise ConfigError anchored at the offending line.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::string& source);

/// Cross-field validation after flag overrides (fine factor, cutoffs, study sizes).
void validate(const RunConfig& cfg);

/// Build the Problem described by the config (reads coefficient files when needed).
Problem build_problem(const RunConfig& cfg);

/// Echo of the effective configuration for reports.
io::Json config_to_json(const RunConfig& cfg);

}  // namespace gpspec::cli
