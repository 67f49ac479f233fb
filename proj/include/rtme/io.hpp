#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtme/config.hpp"
#include "rtme/estimator.hpp"
#include "rtme/harness.hpp"
#include "rtme/markov.hpp"
#include "rtme/simulator.hpp"

namespace rtme::io {

using nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kCheckpointVersion = 1;

// ---- matrices and covariate points: {"dim": S, "rows": [[...], ...]} ----
json matrix_to_json(const SquareMatrix& m);
SquareMatrix matrix_from_json(const json& j);
json point_to_json(const CovariatePoint& z);
CovariatePoint point_from_json(const json& j);

// ---- datasets: one JSON object per line ----
json path_to_json(const SamplePath& p);
SamplePath path_from_json(const json& j);
void write_dataset(const std::filesystem::path& file, const std::vector<SamplePath>& paths);
std::vector<SamplePath> read_dataset(const std::filesystem::path& file);

// ---- configuration files (JSON, // and /* */ comments allowed) ----
json parse_config_text(const std::string& text);
json load_config_file(const std::filesystem::path& file);
SimConfig sim_config_from_json(const json& j);
EstimatorConfig estimator_config_from_json(const json& j);
ExperimentSpec experiment_spec_from_json(const json& j);
std::vector<CovariatePoint> grid_from_json(const json& j);

/// Grid override in CLI syntax: "unconditional" or semicolon-separated
/// points "zc1,zc2@zd1,zd2" (either side may be empty).
std::vector<CovariatePoint> grid_from_string(const std::string& text);

// ---- bank checkpoints (versioned JSON snapshot, exact double round-trip) ----
json checkpoint_to_json(const EstimatorConfig& cfg, const AccumulatorBank& bank);
std::pair<EstimatorConfig, AccumulatorBank> checkpoint_from_json(const json& j);
void save_checkpoint(const std::filesystem::path& file, const EstimatorConfig& cfg,
                     const AccumulatorBank& bank);
std::pair<EstimatorConfig, AccumulatorBank> load_checkpoint(const std::filesystem::path& file);

// ---- estimation output ----
json estimate_result_to_json(const EstimateResult& result);

// ---- experiment output ----
std::string experiment_csv(const std::vector<ErrorRecord>& records);
json summary_to_json(const std::vector<SummaryCell>& cells);
std::string summary_table(const std::vector<SummaryCell>& cells);

// ---- run manifests ----
std::string fnv1a64_hex(const std::string& bytes);
std::string file_digest(const std::filesystem::path& file);
void append_manifest(const std::filesystem::path& manifest_file, const std::string& command,
                     const std::string& config_digest, std::uint64_t seed,
                     const std::vector<std::string>& inputs, const std::vector<std::string>& outputs);

std::string read_text_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, const std::string& text);

}  // namespace rtme::io
