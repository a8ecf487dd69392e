#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "histprep/cleanse/compression.hpp"
#include "histprep/cleanse/outliers.hpp"
#include "histprep/core/json_util.hpp"
#include "histprep/diagnostics/findings.hpp"
#include "histprep/steadystate/rstat.hpp"

namespace histprep::pipeline {

struct InputSpec {
  std::string file;
  std::string source;
  std::optional<Duration> clock_offset; // declared correction, applied at ingest
};

struct GridStep {
  std::vector<TagId> tags;
  Duration interval;
  GridMethod method = GridMethod::Linear;
  Duration max_gap{0}; // 0: default to 4x the detected resolution per tag
  std::optional<Timestamp> start;
  std::optional<Timestamp> end;
};

struct ResolutionStep {
  std::vector<TagId> tags; // empty: all tags
  double mismatch_ratio = 3.0;
};

struct ClockSyncStep {
  TagId tag_a; // reference
  TagId tag_b; // tag on the skewed source
  Duration max_offset;
  Duration grid_interval{0};
  bool apply = true;
};

struct OutlierStep {
  std::vector<TagId> tags;
  cleanse::OutlierParams params;
  bool drop = false; // drop: flagged slots become absent
};

struct ModesStep {
  TagId tag;
  std::vector<double> thresholds;
  Duration min_mode_duration{0};
};

struct ShutdownStep {
  TagId tag;
  double threshold = 0.0;
  Duration min_duration;
};

struct StaticStep {
  std::vector<TagId> tags;
  double noise_band = 0.0;
  Duration min_duration;
};

struct CompressionStep {
  std::vector<TagId> tags;
  Duration nominal_scan{0}; // 0: use TagMeta scan_interval
  cleanse::CompressionParams params;
};

struct SteadyStep {
  std::vector<TagId> tags;
  steady::RStatParams params;
  bool auto_rcrit = false; // calibrate r_crit by Monte Carlo
  double alpha = 0.05;
  std::uint64_t mc_seed = 20210301;
  std::size_t mc_samples = 20000;
};

struct TrimStep {
  std::vector<TagId> tags;
  steady::RStatParams params;
  Duration margin{0};
  Duration min_length;
  bool apply = true; // drop the returned segments from the key tags
};

struct DelayStep {
  TagId input;
  TagId output;
  Duration max_lag;
  bool apply_shift = false;
  bool allow_negative = false;
};

struct LabStep {
  TagId indicator;
  TagId results;
  std::optional<TagId> acceptance;
  Duration accept_window;
  Duration delta_t{0};
  std::optional<TagId> predictions; // gridded tag for residuals
  double bias_alpha = 0.3;
  std::optional<Duration> stale_horizon; // StaleBias finding beyond this
};

struct CollinearStep {
  std::vector<TagId> tags;
  double rho_threshold = 0.95;
  double vif_threshold = 10.0;
};

struct BalanceStep {
  std::vector<TagId> in_flows;
  std::vector<TagId> out_flows;
  Duration window;
  double tolerance = 0.02;
};

struct LoopModeStep {
  TagId tag;
  std::map<std::int64_t, diag::LoopMode> mode_map;
};

struct SignCheckStep {
  TagId mv;
  TagId cv;
  TagId mode_tag; // previously segmented by a loop_mode step
  int expected_sign = 1;
  std::size_t min_pairs = 30;
  bool differenced = false;
};

using Step = std::variant<GridStep, ResolutionStep, ClockSyncStep, OutlierStep,
                          ModesStep, ShutdownStep, StaticStep, CompressionStep,
                          SteadyStep, TrimStep, DelayStep, LabStep, CollinearStep,
                          BalanceStep, LoopModeStep, SignCheckStep>;

struct OutputSpec {
  std::string dir = "out";
  bool write_gridded = true;
  bool write_segments = true;
  bool stamp = false; // prepend a generation-time header line to the report
};

/// Pipeline configuration. Parsing is strict: unknown keys anywhere are
/// errors (silent misconfiguration is exactly the failure mode this tool
/// exists to prevent).
struct PipelineConfig {
  int schema_version = 1;
  std::string dataset_id = "dataset";
  std::vector<InputSpec> inputs;
  double max_error_rate = 0.01;
  std::map<TagId, TagMeta> tag_meta; // overrides applied after ingest
  std::map<std::string, diag::Severity> severity_policy; // by finding kind name
  std::vector<Step> steps;
  OutputSpec output;

  static PipelineConfig from_json(const Json& j);
  static PipelineConfig from_file(const std::string& path);
};

/// Default severity per finding kind (config may override).
diag::Severity default_severity(diag::FindingKind kind);

} // namespace histprep::pipeline
