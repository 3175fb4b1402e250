#pragma once

#include <json.hpp>
#include <map>
#include <string>

#include "qpcm/config.hpp"
#include "qpcm/ingest.hpp"
#include "qpcm/types.hpp"

namespace qpcm {

inline constexpr const char* kToolVersion = "qpcm 1.0.0";
inline constexpr const char* kReportSchemaVersion = "qpcm-report/1";

struct InputProvenance {
  std::string kind;
  std::string path;
  std::string checksum;
};

struct PipelineOutput {
  nlohmann::json report;  // deterministic body; no timestamps
  // Deterministic SVG artifacts, keyed by file name.
  std::map<std::string, std::string> artifacts;
};

// Runs every analysis whose inputs are present (absent ones are reported as
// SKIPPED) and assembles the versioned report.
PipelineOutput run_pipeline(const WaferDataset& dataset,
                            const AnalysisConfig& config,
                            const std::vector<InputProvenance>& inputs = {});

// Loads the manifest, hashes the inputs, and runs the pipeline.
PipelineOutput run_pipeline(const std::string& manifest_path,
                            const AnalysisConfig& config);

// Structural validation of a report document: required keys, types, and no
// unknown fields anywhere. Throws SchemaMismatch on the first violation.
void validate_report(const nlohmann::json& report);

// Writes report.json, the SVG artifacts, and a detachable envelope
// (report.meta.json) carrying the timestamp. Returns the report path.
std::string write_report_bundle(const PipelineOutput& out,
                                const std::string& dir);

nlohmann::json stat_summary_json(const StatSummary& s);

}  // namespace qpcm
