#pragma once

#include <string>

#include <json.hpp>

#include "nfnoma/experiments.hpp"

namespace nfnoma {

inline constexpr const char* kToolVersion = "0.1.0";

// Fixed 9-significant-digit scientific notation; the bit-exact CSV contract.
std::string format_sci9(double v);

// Content-derived hex run id (two FNV-1a 64 lanes).
std::string content_run_id(const std::string& content);

std::string iso8601_utc_now();

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// CSV schema: scheme,trial,seed,x_var,x_value,sum_rate,rate_nu_1..K,rate_fu_1..K,feasible
std::string sweep_csv(const SweepResult& result);

nlohmann::json config_to_json(const ScenarioConfig& cfg);
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const SweepSpec& spec);
SweepSpec spec_from_json(const nlohmann::json& j);

nlohmann::json sweep_summary(const SweepResult& result, const std::string& run_id);

// Manifest written next to every output; "config" holds the fully resolved
// configuration so re-running from the manifest reproduces the outputs.
nlohmann::json make_manifest(const std::string& subcommand, const ScenarioConfig& cfg,
                             const nlohmann::json& params, const std::string& run_id,
                             const std::string& started_utc, const std::string& finished_utc);

}  // namespace nfnoma
