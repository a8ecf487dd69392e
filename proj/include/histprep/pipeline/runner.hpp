#pragma once

#include <string>
#include <vector>

#include "histprep/diagnostics/report.hpp"
#include "histprep/ingest/dataset.hpp"
#include "histprep/pipeline/config.hpp"

namespace histprep::pipeline {

struct RunResult {
  diag::DiagnosticReport report;
  int exit_code = 0;                  // 0: clean, 2: Error-severity findings
  std::vector<std::string> artifacts; // files written, relative to output dir
};

/// Execute the configured steps in order over the ingested dataset and write
/// every artifact (gridded CSVs, segment CSVs, lab audit CSVs, alignment
/// tables, the report). Paths in the config resolve against base_dir.
/// Execution failures (missing tags, validation errors) throw; the caller
/// maps them to exit code 1. Fixed inputs produce byte-identical artifacts.
RunResult run_pipeline(const PipelineConfig& cfg, const std::string& base_dir);

/// Variant for callers that already hold a dataset (skips file ingest).
RunResult run_pipeline_on(ingest::Dataset dataset, const PipelineConfig& cfg,
                          const std::string& base_dir);

} // namespace histprep::pipeline
