#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "histprep/core/json_util.hpp"
#include "histprep/synth/defects.hpp"
#include "histprep/synth/foptd.hpp"
#include "histprep/synth/lab_channel.hpp"

namespace histprep::synth {

/// Four-level feed program: modes cycle through a fixed pattern with the
/// given dwell; levels index shutdown/low/normal/high.
struct FeedSpec {
  std::vector<double> levels = {2.0, 40.0, 100.0, 160.0};
  std::vector<int> pattern = {2, 3, 2, 1, 0, 2};
  Duration dwell = hours(4);
  double noise_sigma = 2.0;
  std::vector<double> thresholds = {20.0, 70.0, 130.0}; // suggested cut points
};

struct LoopSpec {
  FoptdParams plant{2.0, minutes(2), seconds(10), 0.05};
  PiGains pi{0.4, 0.04};
  double setpoint = 50.0;
  double disturbance_sigma = 2.0;
};

struct LabSpec {
  Duration period = hours(4);
  LabChannelParams channel{hours(1), hours(3), 0.1, 0.05, seconds(30)};
};

struct TempsSpec {
  double base = 80.0;
  double amplitude = 8.0;
  Duration period = hours(12);
  double noise_sigma = 0.8;
};

struct FlowsSpec {
  double base = 120.0;
  double noise_sigma = 1.0;
};

/// The canonical full plant scenario: a 4-mode feed, two FOPTD quality
/// paths, one closed PI loop, redundant temperature sensors across two
/// sources, a flow pair, one lab channel, and five injected defects.
struct Scenario {
  int schema_version = 1;
  std::string id = "full_demo";
  Timestamp start = parse_iso8601("2021-03-01T00:00:00Z");
  Duration interval = seconds(5);
  Duration duration = hours(48);
  std::uint64_t seed = 42;

  FeedSpec feed;
  FoptdParams quality1{0.5, minutes(10), seconds(30), 0.1};
  FoptdParams quality2{0.3, minutes(20), minutes(1), 0.2};
  LoopSpec loop;
  LabSpec lab;
  TempsSpec temps;
  FlowsSpec flows;
  double prediction_offset = 1.5;
  std::vector<DefectSpec> defects; // empty means the canonical five

  static Scenario from_json(const Json& j);
  Json to_json() const;
};

/// The built-in canonical scenario (matches scenarios/full_demo.json).
Scenario full_demo_scenario();

/// The canonical five defects for a scenario (used when defects is empty).
std::vector<DefectSpec> default_defects(const Scenario& sc);

struct ScenarioOutput {
  ingest::Dataset dataset; // after defect injection
  TruthManifest manifest;
};

/// Generate the whole dataset and its ground-truth manifest. Bit-reproducible
/// for a given (scenario, seed): per-signal streams use seeds derived from
/// the scenario seed.
ScenarioOutput generate_scenario(const Scenario& sc);

} // namespace histprep::synth
