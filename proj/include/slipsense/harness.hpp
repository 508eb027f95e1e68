#pragma once

// Batch experiment runner: the 240-trial benchmark with its metrics table,
// the grip-force control loop, sequence ingestion, and the latency bench.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "slipsense/detector.hpp"
#include "slipsense/simulator.hpp"

namespace slipsense {

struct TrialOutcome {
  int trial_id = 0;
  std::string object_name;
  double texture_strength = 0;
  int force_level = 0;
  bool is_rotation = false;
  bool gt_slip = false;
  int gt_onset = -1;  // first ground-truth slipping frame, -1 if none
  // Raster (image) path is the primary verdict; the marker-table path runs
  // alongside to measure cross-path agreement.
  bool detected = false;
  int detect_onset = -1;
  bool detected_csv = false;
  int detect_onset_csv = -1;
  std::string classification;  // success | false_positive | false_negative | indeterminate
  std::string diagnostic;      // non-empty only for indeterminate trials
  int frames = 0;
  int agree_frames = 0;  // frames where both paths give the same verdict
  int latency_frames = -1;  // detect_onset - gt_onset when both exist
  // Mean distance to the contact boundary at the first detection, for the
  // detected slipped markers vs. every in-contact marker in that frame.
  double first_bd_slipped_mm = -1;
  double first_bd_contact_mm = -1;
};

nlohmann::json outcome_to_json(const TrialOutcome& o);

struct MetricsTable {
  struct Row {
    std::string object;
    int trials = 0;
    double success_pct = 0;
    double false_positive_pct = 0;
    double false_negative_pct = 0;
    double indeterminate_pct = 0;
  };
  std::vector<Row> rows;  // one per object, roster order
  Row total;              // trial-weighted aggregate

  // Layout mirrors the usual accuracy table: one column per object plus a
  // Total column; rows are the success, false-positive, and false-negative
  // percentages of that object's trials (indeterminates appear in to_json).
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

MetricsTable metrics_from_outcomes(const std::vector<TrialOutcome>& outcomes);

struct BenchmarkOptions {
  std::uint64_t seed = 7;
  std::string out_dir;   // empty: no artifacts written
  bool echo = false;     // progress lines on stderr
};

struct BenchmarkResult {
  std::vector<TrialOutcome> outcomes;
  MetricsTable table;
  long frames_total = 0;
  long frames_agree = 0;
  // Among detected dome-pressure slip trials: fraction whose first
  // detection saw slipped markers closer to the boundary than the average
  // contact marker.
  int peripheral_eligible = 0;
  int peripheral_first = 0;

  double agreement() const {
    return frames_total ? static_cast<double>(frames_agree) / frames_total : 0.0;
  }
  double peripheral_rate() const {
    return peripheral_eligible ? static_cast<double>(peripheral_first) / peripheral_eligible : 0.0;
  }
  nlohmann::json to_json() const;  // stable: no wall-clock content
};

// Runs the full synthetic suite through both ingestion paths.  When
// out_dir is set, writes metrics.json, metrics.csv and trials.jsonl there.
BenchmarkResult run_benchmark(const GelModel& model, const DetectorConfig& dcfg,
                              const RasterConfig& rcfg, const BenchmarkOptions& opts);

enum class GripScenario { kScrew, kUnscrew };

struct GripControlConfig {
  GripScenario scenario = GripScenario::kScrew;
  std::uint64_t seed = 1;
  double force_init_n = 10.0;
  double force_step_n = 10.0;
  double force_max_n = 60.0;
  double newtons_per_scale = 10.0;  // normal_scale = force / this
  double screw_rate_mm = 0.05;      // tangential rim travel per frame while screwing
  double unscrew_rate_mm = 0.15;    // rim travel per frame until the thread releases
  double release_travel_mm = 1.1;   // unscrew: relative travel at which the cap comes free
  double friction_mu = 0.8;         // cap/gel friction coefficient
  int pause_frames = 3;             // motion hold after each force increment
  int dwell_frames = 40;            // unscrew: consecutive quiet frames before stopping
  int max_frames = 600;
  bool use_raster = false;  // marker-table path by default; raster optional
};

struct GripControlResult {
  std::vector<double> force_trace;  // per processed frame
  std::vector<int> slip_event_frames;
  double terminal_force_n = 0;
  bool reached_force_max = false;
  bool stalled = false;  // no slip event within max_frames
  int frames = 0;
  nlohmann::json to_json() const;
};

GripControlResult run_control_loop(const GelModel& model, const DetectorConfig& dcfg,
                                   const RasterConfig& rcfg, const GripControlConfig& cfg);

enum class IngestFormat { kPgmSequence, kMarkerCsv };

// Loads a recorded sequence directory (manifest.json plus frame_*.pgm or
// markers.csv) as FrameSnapshots in index order.
std::vector<FrameSnapshot> ingest(const std::string& dir, IngestFormat format);

// Frame 0 becomes the reference; returns one decision per later frame.
std::vector<SlipDecision> run_detector(const std::vector<FrameSnapshot>& frames,
                                       const SensorGeometry& geometry, const DetectorConfig& dcfg,
                                       const RasterConfig& rcfg);

struct LatencyReport {
  int frames = 0;
  double median_ms = 0;
  double p95_ms = 0;
  double budget_ms = 41.6;
  int small_frames = 0;
  double small_median_ms = 0;  // reduced sensor, ~100 markers
  bool within_budget = false;
  bool small_strictly_faster = false;
  nlohmann::json to_json() const;
};

// Times detector step() on rendered frames: the full 475-marker sensor
// against the 41.6 ms budget, and a ~100-marker sensor for the size
// scaling check.  frames is the number of timed steps (>= 1000 for the
// acceptance gate).
LatencyReport bench_latency(const GelModel& model, const DetectorConfig& dcfg,
                            const RasterConfig& rcfg, int frames, std::uint64_t seed);

}  // namespace slipsense
