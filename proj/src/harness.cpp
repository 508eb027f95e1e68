#include "slipsense/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>

#include "slipsense/io.hpp"
#include "slipsense/pgm.hpp"

namespace slipsense {
namespace {

FrameSnapshot csv_snapshot(int index, const SensorGeometry& geom, const GroundTruthFrame& f) {
  FrameSnapshot s;
  s.index = index;
  s.geometry = geom;
  s.markers = observations_from_ground_truth(f);
  return s;
}

FrameSnapshot img_snapshot(int index, const SensorGeometry& geom, GrayImage img) {
  FrameSnapshot s;
  s.index = index;
  s.geometry = geom;
  s.image = std::move(img);
  return s;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0;
  std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
  return (v[mid - 1] + hi) / 2;
}

double percentile_of(std::vector<double> v, double q) {
  if (v.empty()) return 0;
  auto k = static_cast<std::size_t>(q * (v.size() - 1));
  std::nth_element(v.begin(), v.begin() + k, v.end());
  return v[k];
}

}  // namespace

nlohmann::json outcome_to_json(const TrialOutcome& o) {
  nlohmann::json j;
  j["trial_id"] = o.trial_id;
  j["object"] = o.object_name;
  j["texture_strength"] = o.texture_strength;
  j["force_level"] = o.force_level;
  j["is_rotation"] = o.is_rotation;
  j["gt_slip"] = o.gt_slip;
  j["gt_onset"] = o.gt_onset;
  j["detected"] = o.detected;
  j["detect_onset"] = o.detect_onset;
  j["detected_csv"] = o.detected_csv;
  j["detect_onset_csv"] = o.detect_onset_csv;
  j["classification"] = o.classification;
  if (!o.diagnostic.empty()) j["diagnostic"] = o.diagnostic;
  j["frames"] = o.frames;
  j["agree_frames"] = o.agree_frames;
  j["latency_frames"] = o.latency_frames;
  j["first_bd_slipped_mm"] = o.first_bd_slipped_mm;
  j["first_bd_contact_mm"] = o.first_bd_contact_mm;
  return j;
}

MetricsTable metrics_from_outcomes(const std::vector<TrialOutcome>& outcomes) {
  MetricsTable table;
  std::vector<std::string> order;
  struct Count {
    int trials = 0, success = 0, fp = 0, fn = 0, indet = 0;
  };
  std::map<std::string, Count> counts;
  for (const auto& o : outcomes) {
    if (!counts.count(o.object_name)) order.push_back(o.object_name);
    Count& c = counts[o.object_name];
    ++c.trials;
    if (o.classification == "success") ++c.success;
    else if (o.classification == "false_positive") ++c.fp;
    else if (o.classification == "false_negative") ++c.fn;
    else ++c.indet;
  }
  Count tot;
  auto to_row = [](const std::string& name, const Count& c) {
    MetricsTable::Row r;
    r.object = name;
    r.trials = c.trials;
    if (c.trials > 0) {
      r.success_pct = 100.0 * c.success / c.trials;
      r.false_positive_pct = 100.0 * c.fp / c.trials;
      r.false_negative_pct = 100.0 * c.fn / c.trials;
      r.indeterminate_pct = 100.0 * c.indet / c.trials;
    }
    return r;
  };
  for (const auto& name : order) {
    const Count& c = counts[name];
    tot.trials += c.trials;
    tot.success += c.success;
    tot.fp += c.fp;
    tot.fn += c.fn;
    tot.indet += c.indet;
    table.rows.push_back(to_row(name, c));
  }
  table.total = to_row("Total", tot);
  return table;
}

std::string MetricsTable::to_csv() const {
  std::string out = "metric";
  for (const auto& r : rows) out += "," + r.object;
  out += ",Total\n";
  auto line = [&](const char* name, auto field) {
    out += name;
    for (const auto& r : rows) out += "," + pct(field(r));
    out += "," + pct(field(total)) + "\n";
  };
  line("success_rate", [](const Row& r) { return r.success_pct; });
  line("failure_false_positives", [](const Row& r) { return r.false_positive_pct; });
  line("failure_false_negatives", [](const Row& r) { return r.false_negative_pct; });
  return out;
}

nlohmann::json MetricsTable::to_json() const {
  auto row_json = [](const Row& r) {
    return nlohmann::json{{"object", r.object},
                          {"trials", r.trials},
                          {"success_pct", r.success_pct},
                          {"false_positive_pct", r.false_positive_pct},
                          {"false_negative_pct", r.false_negative_pct},
                          {"indeterminate_pct", r.indeterminate_pct}};
  };
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) j["rows"].push_back(row_json(r));
  j["total"] = row_json(total);
  return j;
}

nlohmann::json BenchmarkResult::to_json() const {
  nlohmann::json j;
  j["table"] = table.to_json();
  j["frames_total"] = frames_total;
  j["frames_agree"] = frames_agree;
  j["agreement"] = agreement();
  j["peripheral_eligible"] = peripheral_eligible;
  j["peripheral_first"] = peripheral_first;
  j["peripheral_rate"] = peripheral_rate();
  j["trial_count"] = outcomes.size();

  // Slip detection per object and force level, for the force-sweep checks.
  std::map<std::string, std::array<nlohmann::json, 3>> sweep;
  for (const auto& o : outcomes) {
    auto& cell = sweep[o.object_name][o.force_level];
    if (cell.is_null())
      cell = {{"slip_trials", 0}, {"detected", 0}, {"false_negatives", 0},
              {"non_slip_trials", 0}, {"false_positives", 0}};
    if (o.gt_slip) {
      cell["slip_trials"] = cell["slip_trials"].get<int>() + 1;
      if (o.detected) cell["detected"] = cell["detected"].get<int>() + 1;
      if (o.classification == "false_negative")
        cell["false_negatives"] = cell["false_negatives"].get<int>() + 1;
    } else {
      cell["non_slip_trials"] = cell["non_slip_trials"].get<int>() + 1;
      if (o.classification == "false_positive")
        cell["false_positives"] = cell["false_positives"].get<int>() + 1;
    }
  }
  j["force_sweep"] = nlohmann::json::object();
  for (auto& [name, cells] : sweep) {
    nlohmann::json arr = nlohmann::json::array();
    for (auto& c : cells) arr.push_back(c.is_null() ? nlohmann::json::object() : c);
    j["force_sweep"][name] = arr;
  }
  j["trials"] = nlohmann::json::array();
  for (const auto& o : outcomes) j["trials"].push_back(outcome_to_json(o));
  return j;
}

BenchmarkResult run_benchmark(const GelModel& model, const DetectorConfig& dcfg,
                              const RasterConfig& rcfg, const BenchmarkOptions& opts) {
  const SensorGeometry& geom = model.geometry;
  std::vector<TrialSpec> trials = benchmark_suite(model, opts.seed);

  BenchmarkResult result;
  result.outcomes.reserve(trials.size());

  for (const TrialSpec& trial : trials) {
    TrialOutcome o;
    o.trial_id = trial.trial_id;
    o.object_name = trial.object.name;
    o.texture_strength = trial.object.texture_strength;
    o.force_level = trial.force_level;
    o.is_rotation = trial.is_rotation;
    if (opts.echo && trial.trial_id % 24 == 0)
      std::cerr << "benchmark: trial " << trial.trial_id << "/" << trials.size() << " ("
                << trial.object.name << ")\n";
    try {
      std::vector<GroundTruthFrame> frames = simulate(model, trial.object, trial.script, trial.seed);
      o.frames = static_cast<int>(frames.size()) - 1;
      for (std::size_t t = 1; t < frames.size(); ++t) {
        if (frames[t].label != FrameLabel::kNoSlip) {
          o.gt_slip = true;
          o.gt_onset = static_cast<int>(t);
          break;
        }
      }

      SlipDetector det_img(geom, dcfg, rcfg);
      SlipDetector det_csv(geom, dcfg, rcfg);
      det_img.set_reference(
          img_snapshot(0, geom, render(model, trial.object, frames[0], trial.seed)));
      det_csv.set_reference(csv_snapshot(0, geom, frames[0]));

      for (std::size_t t = 1; t < frames.size(); ++t) {
        SlipDecision di = det_img.step(
            img_snapshot(static_cast<int>(t), geom, render(model, trial.object, frames[t], trial.seed)));
        SlipDecision dc = det_csv.step(csv_snapshot(static_cast<int>(t), geom, frames[t]));
        if (di.verdict == dc.verdict) ++o.agree_frames;
        if (di.verdict == Verdict::kIncipientSlip && o.detect_onset < 0) {
          o.detected = true;
          o.detect_onset = static_cast<int>(t);
          double bd_slip = 0, bd_all = 0;
          int n_slip = 0, n_all = 0;
          for (const auto& e : di.field.entries) {
            bd_all += e.boundary_distance_mm;
            ++n_all;
            if (e.slipped) {
              bd_slip += e.boundary_distance_mm;
              ++n_slip;
            }
          }
          if (n_slip > 0 && n_all > 0) {
            o.first_bd_slipped_mm = bd_slip / n_slip;
            o.first_bd_contact_mm = bd_all / n_all;
          }
        }
        if (dc.verdict == Verdict::kIncipientSlip && o.detect_onset_csv < 0) {
          o.detected_csv = true;
          o.detect_onset_csv = static_cast<int>(t);
        }
      }

      if (o.gt_slip)
        o.classification = o.detected ? "success" : "false_negative";
      else
        o.classification = o.detected ? "false_positive" : "success";
      if (o.detected && o.gt_onset >= 0) o.latency_frames = o.detect_onset - o.gt_onset;

      if (o.gt_slip && o.detected && trial.object.dome_pressure) {
        ++result.peripheral_eligible;
        if (o.first_bd_slipped_mm >= 0 && o.first_bd_slipped_mm < o.first_bd_contact_mm)
          ++result.peripheral_first;
      }
    } catch (const std::exception& e) {
      o.classification = "indeterminate";
      o.diagnostic = e.what();
    }
    result.frames_total += o.frames;
    result.frames_agree += o.agree_frames;
    result.outcomes.push_back(std::move(o));
  }

  result.table = metrics_from_outcomes(result.outcomes);

  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    const std::string base = opts.out_dir + "/";
    {
      std::ofstream out(base + "metrics.csv");
      if (!out) throw std::runtime_error("cannot write " + base + "metrics.csv");
      out << result.table.to_csv();
    }
    {
      std::ofstream out(base + "metrics.json");
      if (!out) throw std::runtime_error("cannot write " + base + "metrics.json");
      out << result.to_json().dump(2) << '\n';
    }
    {
      std::ofstream out(base + "trials.jsonl");
      if (!out) throw std::runtime_error("cannot write " + base + "trials.jsonl");
      for (const auto& o : result.outcomes) out << outcome_to_json(o).dump() << '\n';
    }
  }
  return result;
}

nlohmann::json GripControlResult::to_json() const {
  nlohmann::json j;
  j["force_trace_n"] = force_trace;
  j["slip_event_frames"] = slip_event_frames;
  j["terminal_force_n"] = terminal_force_n;
  j["reached_force_max"] = reached_force_max;
  j["stalled"] = stalled;
  j["frames"] = frames;
  return j;
}

GripControlResult run_control_loop(const GelModel& model, const DetectorConfig& dcfg,
                                   const RasterConfig& rcfg, const GripControlConfig& cfg) {
  // The gripped cap: a ring-shaped imprint, the same class of contact the
  // benchmark exercises.  Capacity at the dome peak is
  // mu * p0 * (force / newtons_per_scale) / k = 0.045 mm per newton here.
  ObjectSpec cap = annulus_object("bottle_cap", 2.8, 10.4, cfg.friction_mu, 0.45, 0.9);
  const SensorGeometry& geom = model.geometry;
  const double reach = cap.r_outer_mm;

  LoadScript script;
  script.patch_center = {20.0, 15.0};
  double force = cfg.force_init_n;
  script.poses.push_back({{0, 0}, 0.0});
  script.normal_scale.push_back(force / cfg.newtons_per_scale);

  SlipDetector det(geom, dcfg, rcfg);
  auto snapshot = [&](int t, const GroundTruthFrame& f) {
    return cfg.use_raster ? img_snapshot(t, geom, render(model, cap, f, cfg.seed))
                          : csv_snapshot(t, geom, f);
  };
  det.set_reference(snapshot(0, simulate_frame(model, cap, script, 0, cfg.seed)));

  GripControlResult result;
  double travel = 0;  // cumulative rim travel commanded so far, mm
  int paused = 0;
  int quiet = 0;
  bool terminate = false;

  for (int t = 1; t <= cfg.max_frames && !terminate; ++t) {
    PatchPose pose = script.poses.back();
    if (paused > 0) {
      --paused;
    } else if (cfg.scenario == GripScenario::kScrew) {
      pose.rotation += cfg.screw_rate_mm / reach;
      travel += cfg.screw_rate_mm;
    } else if (travel < cfg.release_travel_mm) {
      // Unscrewing against the thread: the cap resists until it comes
      // free, after which it simply follows the gripper (no new relative
      // motion reaches the gel).
      double step = std::min(cfg.unscrew_rate_mm, cfg.release_travel_mm - travel);
      pose.rotation += step / reach;
      travel += step;
    }
    script.poses.push_back(pose);
    script.normal_scale.push_back(force / cfg.newtons_per_scale);

    GroundTruthFrame f = simulate_frame(model, cap, script, t, cfg.seed);
    SlipDecision d = det.step(snapshot(t, f));
    ++result.frames;

    if (d.verdict == Verdict::kIncipientSlip) {
      result.slip_event_frames.push_back(t);
      quiet = 0;
      paused = cfg.pause_frames;
      if (force + cfg.force_step_n <= cfg.force_max_n + 1e-9) {
        force += cfg.force_step_n;
        if (cfg.scenario == GripScenario::kScrew && force >= cfg.force_max_n - 1e-9)
          terminate = true;  // the protocol stops once the grip is at maximum
      } else {
        terminate = true;  // a further increment would exceed the force cap
      }
    } else {
      ++quiet;
      if (cfg.scenario == GripScenario::kUnscrew && quiet >= cfg.dwell_frames) terminate = true;
    }
    // The trace records the commanded grip force leaving each frame, so a
    // slip event shows up as a step at the frame that triggered it.
    result.force_trace.push_back(force);
  }

  result.terminal_force_n = force;
  result.reached_force_max = force >= cfg.force_max_n - 1e-9;
  result.stalled = result.slip_event_frames.empty();
  return result;
}

std::vector<FrameSnapshot> ingest(const std::string& dir, IngestFormat format) {
  SequenceManifest manifest = read_manifest(dir + "/manifest.json");
  std::vector<FrameSnapshot> out;
  if (format == IngestFormat::kPgmSequence) {
    std::vector<int> indices = scan_frame_sequence(dir);
    if (indices.empty()) throw std::runtime_error(dir + ": no frame_*.pgm files");
    out.reserve(indices.size());
    for (int idx : indices) {
      GrayImage img = read_pgm(dir + "/" + frame_file_name(idx));
      if (img.width != manifest.geometry.width_px || img.height != manifest.geometry.height_px)
        throw std::runtime_error(frame_file_name(idx) + ": size does not match manifest geometry");
      out.push_back(img_snapshot(idx, manifest.geometry, std::move(img)));
    }
  } else {
    auto frames = read_marker_csv(dir + "/markers.csv");
    if (frames.empty()) throw std::runtime_error(dir + "/markers.csv: no frames");
    out.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
      FrameSnapshot s;
      s.index = static_cast<int>(i);
      s.geometry = manifest.geometry;
      s.markers = std::move(frames[i]);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<SlipDecision> run_detector(const std::vector<FrameSnapshot>& frames,
                                       const SensorGeometry& geometry, const DetectorConfig& dcfg,
                                       const RasterConfig& rcfg) {
  if (frames.empty()) throw std::invalid_argument("run_detector: no frames");
  SlipDetector det(geometry, dcfg, rcfg);
  det.set_reference(frames.front());
  std::vector<SlipDecision> out;
  out.reserve(frames.size() - 1);
  for (std::size_t i = 1; i < frames.size(); ++i) out.push_back(det.step(frames[i]));
  return out;
}

nlohmann::json LatencyReport::to_json() const {
  nlohmann::json j;
  j["frames"] = frames;
  j["median_ms"] = median_ms;
  j["p95_ms"] = p95_ms;
  j["budget_ms"] = budget_ms;
  j["within_budget"] = within_budget;
  j["small_frames"] = small_frames;
  j["small_median_ms"] = small_median_ms;
  j["small_strictly_faster"] = small_strictly_faster;
  return j;
}

namespace {

// Renders a slow back-and-forth push and times detector step() over the
// pool, ping-ponging so frame-to-frame motion stays under the match radius.
std::vector<double> time_steps(const GelModel& model, const ObjectSpec& obj, Vec2 centre,
                               double amplitude, const DetectorConfig& dcfg,
                               const RasterConfig& rcfg, int steps, std::uint64_t seed) {
  LoadScript script = make_translation_ramp(centre, {1, 0}, amplitude, 30, 9, 1.6);
  std::vector<GroundTruthFrame> frames = simulate(model, obj, script, seed);
  std::vector<GrayImage> pool;
  pool.reserve(frames.size());
  for (const auto& f : frames) pool.push_back(render(model, obj, f, seed));

  SlipDetector det(model.geometry, dcfg, rcfg);
  det.set_reference(img_snapshot(0, model.geometry, pool[0]));
  std::vector<double> ms;
  ms.reserve(steps);
  int n = static_cast<int>(pool.size());
  int pos = 0, dir = 1;
  for (int i = 0; i < steps; ++i) {
    pos += dir;
    if (pos == n - 1 || pos == 0) dir = -dir;
    FrameSnapshot snap = img_snapshot(i + 1, model.geometry, pool[pos]);
    auto t0 = std::chrono::steady_clock::now();
    det.step(snap);
    auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return ms;
}

}  // namespace

LatencyReport bench_latency(const GelModel& model, const DetectorConfig& dcfg,
                            const RasterConfig& rcfg, int frames, std::uint64_t seed) {
  LatencyReport report;
  report.frames = frames;

  ObjectSpec obj = disk_object("bench_disk", 10.0, 0.8, 1.8, 0.9);
  std::vector<double> full = time_steps(model, obj, {20.0, 15.0}, 1.0, dcfg, rcfg, frames, seed);
  report.median_ms = median_of(full);
  report.p95_ms = percentile_of(full, 0.95);

  // Reduced sensor: same optics and pitch, ~100 markers instead of 475.
  GelModel small = model;
  small.geometry.width_px = 264;
  small.geometry.height_px = 264;
  small.geometry.width_mm = 16.5;
  small.geometry.height_mm = 16.5;
  ObjectSpec small_obj = disk_object("bench_disk_small", 5.0, 0.8, 1.8, 0.9);
  int small_steps = std::max(frames / 2, 200);
  std::vector<double> reduced =
      time_steps(small, small_obj, {8.25, 8.25}, 0.8, dcfg, rcfg, small_steps, seed + 1);
  report.small_frames = small_steps;
  report.small_median_ms = median_of(reduced);

  report.within_budget = report.median_ms < report.budget_ms;
  report.small_strictly_faster = report.small_median_ms < report.median_ms;
  return report;
}

}  // namespace slipsense
