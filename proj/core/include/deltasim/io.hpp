#pragma once

#include <string>
#include <vector>

#include "deltasim/experiments.hpp"

namespace deltasim {

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 17 significant digits: parses back to the identical double.
std::string format_real(double x);

// Per-trial CSV (LF line endings). Optional fields serialize as empty cells,
// booleans as 0/1.
std::string trial_csv_header();
std::string trial_csv_row(const TrialResult& t);
std::string trials_to_csv(const std::vector<TrialResult>& trials);

// Training trace CSV with header step,cosine,norm.
std::string trace_csv(const TrainTrace& trace);

// Minimal CSV reader for round-trip checks (no quoting; our emitters never
// produce quoted fields).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

// Certificate object with its documented key order; prescription keys are
// omitted when C1 fails.
ordered_json certificate_to_json(const Certificate& cert);

ordered_json report_to_json(const ExperimentReport& rep);

ordered_json sweep_to_json(const SweepResult& result);

// Wraps a payload with schema_version (1) and the full config echo.
ordered_json envelope(const std::string& command, const ordered_json& config,
                      const std::string& payload_key, ordered_json payload);

void write_text_file(const std::string& path, const std::string& content);

// Merges a JSON config file with flag-provided values; flags win per key.
// Keys must come from the known flag set (hyphens become underscores).
// Exactly one of the alpha/acc forms may be active per role after merging;
// both present in one layer is a usage error, and a flag of either form
// masks both file forms of that role.
ordered_json merge_config(const ordered_json& file_json, const ordered_json& flag_json);

// Reads the alpha for a role ("0", "c", "r") from a merged config, applying
// the accuracy conversion (and the percent convention) when the acc form is
// the active one. Throws UsageError when absent and required.
double resolve_alpha(const ordered_json& cfg, const std::string& role);
bool has_alpha(const ordered_json& cfg, const std::string& role);

} // namespace deltasim
