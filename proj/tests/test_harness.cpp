#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "slipsense/harness.hpp"
#include "slipsense/io.hpp"
#include "slipsense/pgm.hpp"

using namespace slipsense;
namespace fs = std::filesystem;

namespace {

TrialOutcome outcome(const std::string& object, const std::string& cls) {
  TrialOutcome o;
  o.object_name = object;
  o.classification = cls;
  return o;
}

}  // namespace

TEST_CASE("metrics aggregate per object in first-seen order") {
  std::vector<TrialOutcome> outs;
  for (int i = 0; i < 3; ++i) outs.push_back(outcome("tape", "success"));
  outs.push_back(outcome("tape", "false_positive"));
  outs.push_back(outcome("crayon", "success"));
  outs.push_back(outcome("crayon", "false_negative"));
  outs.push_back(outcome("crayon", "indeterminate"));

  MetricsTable t = metrics_from_outcomes(outs);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].object == "tape");
  CHECK(t.rows[1].object == "crayon");
  CHECK(t.rows[0].trials == 4);
  CHECK(t.rows[0].success_pct == doctest::Approx(75.0));
  CHECK(t.rows[0].false_positive_pct == doctest::Approx(25.0));
  CHECK(t.rows[0].false_negative_pct == 0.0);
  CHECK(t.rows[1].trials == 3);
  CHECK(t.rows[1].success_pct == doctest::Approx(100.0 / 3));
  CHECK(t.rows[1].false_negative_pct == doctest::Approx(100.0 / 3));
  CHECK(t.rows[1].indeterminate_pct == doctest::Approx(100.0 / 3));

  CHECK(t.total.trials == 7);
  CHECK(t.total.success_pct == doctest::Approx(100.0 * 4 / 7));

  for (const auto& r : t.rows) {
    double sum =
        r.success_pct + r.false_positive_pct + r.false_negative_pct + r.indeterminate_pct;
    CHECK(sum == doctest::Approx(100.0).epsilon(1e-9));
  }
}

TEST_CASE("CSV table layout: one column per object, three failure rows") {
  std::vector<TrialOutcome> outs;
  outs.push_back(outcome("tape", "success"));
  outs.push_back(outcome("crayon", "false_positive"));
  MetricsTable t = metrics_from_outcomes(outs);
  std::string csv = t.to_csv();

  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "metric,tape,crayon,Total");
  CHECK(lines[1] == "success_rate,100.00,0.00,50.00");
  CHECK(lines[2] == "failure_false_positives,0.00,100.00,50.00");
  CHECK(lines[3] == "failure_false_negatives,0.00,0.00,0.00");
}

TEST_CASE("screwing raises the grip force in 10 N steps up to 60 N") {
  GelModel model;
  GripControlConfig cfg;
  cfg.scenario = GripScenario::kScrew;
  cfg.seed = 2;
  GripControlResult r = run_control_loop(model, DetectorConfig{}, RasterConfig{}, cfg);

  REQUIRE(!r.force_trace.empty());
  CHECK(r.force_trace.front() == 10.0);
  CHECK(r.force_trace.back() == 60.0);
  CHECK(r.terminal_force_n == 60.0);
  CHECK(r.reached_force_max);
  CHECK_FALSE(r.stalled);
  CHECK(r.slip_event_frames.size() == 5);  // 10 -> 60 in five events

  double prev = r.force_trace.front();
  for (double f : r.force_trace) {
    CHECK((f == prev || f == prev + 10.0));  // never skips a step
    CHECK(f <= 60.0);
    CHECK(f >= prev);  // force never decreases
    prev = f;
  }
}

TEST_CASE("unscrewing slips early and finishes below the force cap") {
  GelModel model;
  GripControlConfig cfg;
  cfg.scenario = GripScenario::kUnscrew;
  cfg.seed = 3;
  GripControlResult r = run_control_loop(model, DetectorConfig{}, RasterConfig{}, cfg);

  REQUIRE_FALSE(r.stalled);
  REQUIRE(!r.slip_event_frames.empty());
  // The cap lets go almost immediately: within the first tenth of the run.
  CHECK(r.slip_event_frames.front() <= r.frames / 10);
  CHECK(r.terminal_force_n < 60.0);
  CHECK_FALSE(r.reached_force_max);
}

TEST_CASE("a cap that cannot slip stalls the loop at the initial force") {
  GelModel model;
  GripControlConfig cfg;
  cfg.scenario = GripScenario::kScrew;
  cfg.seed = 4;
  cfg.friction_mu = 50.0;  // no physical slip possible in this window
  cfg.max_frames = 40;
  GripControlResult r = run_control_loop(model, DetectorConfig{}, RasterConfig{}, cfg);
  CHECK(r.stalled);
  CHECK(r.slip_event_frames.empty());
  CHECK(r.terminal_force_n == 10.0);
  for (double f : r.force_trace) CHECK(f == 10.0);
}

TEST_CASE("control loop runs are reproducible") {
  GelModel model;
  GripControlConfig cfg;
  cfg.scenario = GripScenario::kUnscrew;
  cfg.seed = 5;
  GripControlResult a = run_control_loop(model, DetectorConfig{}, RasterConfig{}, cfg);
  GripControlResult b = run_control_loop(model, DetectorConfig{}, RasterConfig{}, cfg);
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("sequence directories ingest through the manifest") {
  const fs::path dir = "harness_ingest_tmp";
  fs::remove_all(dir);
  fs::create_directories(dir);

  SequenceManifest m;
  m.frame_count = 3;
  m.has_images = true;
  m.has_markers = true;
  m.object_name = "probe";
  m.source = "simulator";
  write_manifest((dir / "manifest.json").string(), m);

  GrayImage img(m.geometry.width_px, m.geometry.height_px, 60);
  for (int i = 0; i < 3; ++i) write_pgm(dir / frame_file_name(i), img);

  std::vector<std::vector<MarkerObservation>> tables(3);
  for (int f = 0; f < 3; ++f)
    for (int i = 0; i < 20; ++i) {
      MarkerObservation o;
      o.position_mm = Vec2(2.0 + i, 15.0);
      o.in_contact = true;
      tables[f].push_back(o);
    }
  write_marker_csv((dir / "markers.csv").string(), tables);

  auto imgs = ingest(dir.string(), IngestFormat::kPgmSequence);
  REQUIRE(imgs.size() == 3);
  CHECK(imgs[0].image.has_value());
  CHECK(imgs[0].image->width == m.geometry.width_px);
  CHECK(imgs[2].index == 2);

  auto marks = ingest(dir.string(), IngestFormat::kMarkerCsv);
  REQUIRE(marks.size() == 3);
  CHECK_FALSE(marks[0].image.has_value());
  CHECK(marks[0].markers.size() == 20);
  CHECK(marks[1].geometry == m.geometry);

  // A frame that disagrees with the manifest geometry is rejected.
  write_pgm(dir / frame_file_name(1), GrayImage(64, 48, 0));
  CHECK_THROWS_AS(ingest(dir.string(), IngestFormat::kPgmSequence), std::runtime_error);

  fs::remove((dir / "manifest.json").string());
  CHECK_THROWS_AS(ingest(dir.string(), IngestFormat::kMarkerCsv), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("latency bench reports medians for both sensor sizes") {
  GelModel model;
  LatencyReport r = bench_latency(model, DetectorConfig{}, RasterConfig{}, 12, 6);
  CHECK(r.frames == 12);
  CHECK(r.small_frames == 200);  // small-sensor pass is floored at 200 steps
  CHECK(r.median_ms > 0.0);
  CHECK(r.p95_ms >= r.median_ms);
  CHECK(r.small_median_ms > 0.0);
  CHECK(r.budget_ms == 41.6);
  nlohmann::json j = r.to_json();
  CHECK(j.contains("median_ms"));
  CHECK(j.contains("small_median_ms"));
}

TEST_CASE("trial outcomes serialize their classification fields") {
  TrialOutcome o;
  o.trial_id = 12;
  o.object_name = "tape_ring";
  o.texture_strength = 0.85;
  o.force_level = 2;
  o.gt_slip = true;
  o.gt_onset = 9;
  o.detected = true;
  o.detect_onset = 11;
  o.classification = "success";
  o.frames = 30;
  o.agree_frames = 30;
  nlohmann::json j = outcome_to_json(o);
  CHECK(j["object"] == "tape_ring");
  CHECK(j["classification"] == "success");
  CHECK(j["gt_onset"] == 9);
  CHECK(j["detect_onset"] == 11);
  CHECK(j["force_level"] == 2);
  CHECK(j["texture_strength"] == 0.85);
}
