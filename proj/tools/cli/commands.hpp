#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "cli/config.hpp"

namespace gpspec::cli {

// Each command validates the configuration, writes its files below cfg.output and
// returns 0; failures propagate as ConfigError / gpspec::Error for exit_code().

/// ground_state.json, u.json, trace.csv
int cmd_solve(const RunConfig& cfg, std::ostream& out);

/// correction_<scheme>.json per selected scheme. `state` names a ground_state.json to reuse.
int cmd_postprocess(const RunConfig& cfg, const std::optional<std::filesystem::path>& state, std::ostream& out);

/// estimate.json plus a table on `out`
int cmd_estimate(const RunConfig& cfg, const std::optional<std::filesystem::path>& state, std::ostream& out);

/// study.csv, report.json, plot_study.py
int cmd_study(const RunConfig& cfg, std::ostream& out);

/// oracle.json (ground-state format plus the Fock spectrum) and u.json; at most 200 modes
int cmd_oracle(const RunConfig& cfg, std::ostream& out);

/// 0 success, 2 configuration, 3 nonconvergence, 4 certificate / failed precondition, 1 anything else.
int exit_code(const std::exception& e);

/// Study table, one row per cutoff (shared with the acceptance binary).
std::string study_csv(const study::StudyReport& rep);
io::Json study_report_json(const study::StudyReport& rep);
std::string plot_script();

}  // namespace gpspec::cli
