#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "histprep/ingest/dataset.hpp"
#include "histprep/synth/lab_channel.hpp"

namespace histprep::synth {

struct SwingingDoorCompression {
  double deviation = 0.0; // engineering units; 0 keeps every point
};

struct StuckSensor {
  Timestamp start;
  Duration duration;
};

struct Spike {
  std::vector<Timestamp> times;
  std::vector<double> magnitudes; // same length as times
};

struct ClockSkew {
  Duration offset; // applied to every series of the target's source
};

struct Miscalibration {
  double scale = 1.0;
};

struct DefectSpec {
  std::variant<SwingingDoorCompression, StuckSensor, Spike, ClockSkew, Miscalibration> kind;
  TagId target;
};

const char* defect_kind_name(const DefectSpec& spec);

struct DefectRecord {
  std::string kind;
  TagId target;
  std::optional<Timestamp> start; // windowed defects
  std::optional<Timestamp> end;
  std::map<std::string, double> params;
  std::vector<Timestamp> times;   // spike sample times actually hit
  std::vector<TagId> affected;    // clock skew: all tags of the source
};

struct ModeTruth {
  Timestamp start;
  Timestamp end;
  int mode = 0;
};

/// Everything the acceptance tests need to judge the detectors: all truth is
/// consumed from here, never regenerated.
struct TruthManifest {
  std::vector<DefectRecord> defects;
  std::map<TagId, std::vector<ModeTruth>> mode_truth;
  std::map<TagId, std::vector<LabEventTruth>> lab_truth; // by indicator tag
  std::map<TagId, int> dead_steps;                        // FOPTD paths
  std::map<std::string, Duration> clock_skew;             // by source
  /// Loop-mode timeline: (time, code) change points per mode tag.
  std::map<TagId, std::vector<std::pair<Timestamp, int>>> loop_mode_truth;

  std::string to_json() const;
  static TruthManifest from_json(const std::string& text);
};

/// Classic swinging-door re-archival: keeps first/last plus every sample
/// needed so that linear reconstruction stays within `deviation` everywhere
/// (the compressor's defining guarantee). deviation 0 keeps all samples.
RawSeries swinging_door(const RawSeries& s, double deviation);

/// Apply defect specs to a dataset and record the ground truth. At most one
/// spec per target tag (conflicting kinds on one tag are a generation
/// error). Deterministic given seed.
std::pair<ingest::Dataset, TruthManifest>
inject_defects(ingest::Dataset d, std::span<const DefectSpec> specs, std::uint64_t seed);

} // namespace histprep::synth
