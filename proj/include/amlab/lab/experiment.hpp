#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace amlab::lab {

struct Diagnostic {
    std::string level;  // "error" or "warning"
    std::string code;
    std::string message;
};

nlohmann::json to_json(const std::vector<Diagnostic>& diags);

/// Dry-run validation of a config document; no heavy computation.
std::vector<Diagnostic> validate_config(const nlohmann::json& config);

struct RunOptions {
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
};

struct RunResult {
    std::string out_dir;
    nlohmann::json verdicts;
    std::vector<std::string> files;
};

/// Runs the configured experiment, writing verdicts.json, manifest.json and CSVs.
/// Throws LabError on invalid configs and module failures.
RunResult run_experiment(const nlohmann::json& config, const RunOptions& options = {});

nlohmann::json load_config(const std::string& path);

} // namespace amlab::lab
