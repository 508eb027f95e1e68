// Command-line front end: synthesize sequences, run the detector on recorded
// data, execute the benchmark suite, and drive the grip-control scenarios.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "slipsense/config.hpp"
#include "slipsense/detector.hpp"
#include "slipsense/harness.hpp"
#include "slipsense/io.hpp"
#include "slipsense/pgm.hpp"
#include "slipsense/simulator.hpp"

using namespace slipsense;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Shared {
  std::string config_path;
  GelModel model;
  DetectorConfig dcfg;
  RasterConfig rcfg;

  void load() {
    if (config_path.empty()) return;
    Config c = Config::parse_file(config_path);
    model = c.gel_model();
    dcfg = c.detector_config();
    rcfg = c.raster_config();
    model.geometry = c.sensor_geometry();
  }
};

// ---- simulate ---------------------------------------------------------------

struct SimulateOpts {
  std::string shape = "disk";
  double radius = 9.0, width = 16.0, height = 10.0, r_in = 3.0, r_out = 10.0;
  double mu = 0.8, peak_pressure = 1.5, texture = 0.8;
  bool uniform_pressure = false;
  std::string motion = "translation";
  double direction_deg = 0.0, amplitude = 1.0, angle = 0.1;
  int ramp = 30, hold = 5;
  double force_scale = 1.0, cx = 20.0, cy = 15.0;
  std::string out = "sequence";
  std::uint64_t seed = 1;
  bool no_images = false;
};

int cmd_simulate(Shared& sh, const SimulateOpts& o) {
  sh.load();
  ObjectSpec obj;
  if (o.shape == "disk")
    obj = disk_object("object", o.radius, o.mu, o.peak_pressure, o.texture);
  else if (o.shape == "rect")
    obj = rect_object("object", o.width, o.height, o.mu, o.peak_pressure, o.texture);
  else
    obj = annulus_object("object", o.r_in, o.r_out, o.mu, o.peak_pressure, o.texture);
  obj.dome_pressure = !o.uniform_pressure;

  const Vec2 center(o.cx, o.cy);
  LoadScript script;
  if (o.motion == "translation") {
    const double rad = o.direction_deg * M_PI / 180.0;
    script = make_translation_ramp(center, Vec2(std::cos(rad), std::sin(rad)), o.amplitude,
                                   o.ramp, o.hold, o.force_scale);
  } else if (o.motion == "rotation") {
    script = make_rotation_ramp(center, o.angle, o.ramp, o.hold, o.force_scale);
  } else {  // hold: constant pose under load
    script = make_translation_ramp(center, Vec2(1, 0), 0.0, o.ramp, o.hold, o.force_scale);
  }
  validate_script(script, obj, sh.model.pitch_mm);

  auto frames = simulate(sh.model, obj, script, o.seed);
  fs::create_directories(o.out);

  std::vector<std::vector<MarkerObservation>> obs;
  obs.reserve(frames.size());
  for (const auto& f : frames) obs.push_back(observations_from_ground_truth(f));
  write_marker_csv(o.out + "/markers.csv", obs);

  if (!o.no_images)
    for (const auto& f : frames)
      write_pgm(fs::path(o.out) / frame_file_name(f.index), render(sh.model, obj, f, o.seed));

  SequenceManifest man;
  man.geometry = sh.model.geometry;
  man.frame_count = static_cast<int>(frames.size());
  man.seed = o.seed;
  man.object_name = obj.name;
  man.source = "simulator";
  man.has_images = !o.no_images;
  man.has_markers = true;
  write_manifest(o.out + "/manifest.json", man);

  json truth;
  truth["object"] = obj.name;
  truth["gt_onset"] = -1;
  json labels = json::array();
  for (const auto& f : frames) {
    labels.push_back(to_string(f.label));
    if (f.label != FrameLabel::kNoSlip && truth["gt_onset"].get<int>() < 0)
      truth["gt_onset"] = f.index;
  }
  truth["labels"] = labels;
  std::ofstream(o.out + "/truth.json") << truth.dump(2) << '\n';

  std::printf("wrote %zu frames to %s (images: %s)\n", frames.size(), o.out.c_str(),
              o.no_images ? "no" : "yes");
  return 0;
}

// ---- detect -----------------------------------------------------------------

struct DetectOpts {
  std::string in;
  std::string format = "auto";
  std::string out = "decisions.jsonl";
};

int cmd_detect(Shared& sh, const DetectOpts& o) {
  sh.load();
  SequenceManifest man = read_manifest(o.in + "/manifest.json");
  IngestFormat fmt;
  if (o.format == "pgm")
    fmt = IngestFormat::kPgmSequence;
  else if (o.format == "csv")
    fmt = IngestFormat::kMarkerCsv;
  else
    fmt = man.has_images ? IngestFormat::kPgmSequence : IngestFormat::kMarkerCsv;

  auto frames = ingest(o.in, fmt);
  auto decisions = run_detector(frames, man.geometry, sh.dcfg, sh.rcfg);
  write_decisions_jsonl(o.out, decisions);

  std::map<std::string, int> counts;
  int rebases = 0;
  for (const auto& d : decisions) {
    ++counts[to_string(d.verdict)];
    rebases += d.rebased ? 1 : 0;
  }
  std::printf("%zu decisions -> %s\n", decisions.size(), o.out.c_str());
  for (const auto& [k, n] : counts) std::printf("  %-16s %d\n", k.c_str(), n);
  std::printf("  %-16s %d\n", "rebases", rebases);
  return 0;
}

// ---- bench ------------------------------------------------------------------

struct BenchOpts {
  std::string out;
  std::uint64_t seed = 7;
  bool echo = false;
  bool check = false;
  bool latency = false;
  int latency_frames = 1000;
};

int cmd_bench(Shared& sh, const BenchOpts& o) {
  sh.load();
  BenchmarkOptions opts;
  opts.seed = o.seed;
  opts.out_dir = o.out;
  opts.echo = o.echo;
  BenchmarkResult r = run_benchmark(sh.model, sh.dcfg, sh.rcfg, opts);

  std::printf("%s", r.table.to_csv().c_str());
  std::printf("\ncross-path agreement: %.2f%% of %ld frames\n", 100 * r.agreement(),
              r.frames_total);
  std::printf("peripheral-first: %d/%d detected dome-slip trials (%.1f%%)\n", r.peripheral_first,
              r.peripheral_eligible, 100 * r.peripheral_rate());

  bool ok = true;
  if (o.latency) {
    LatencyReport lat = bench_latency(sh.model, sh.dcfg, sh.rcfg, o.latency_frames, o.seed);
    std::printf("latency: median %.2f ms, p95 %.2f ms over %d frames (budget %.1f ms); "
                "small sensor median %.2f ms\n",
                lat.median_ms, lat.p95_ms, lat.frames, lat.budget_ms, lat.small_median_ms);
    ok = ok && lat.within_budget && lat.small_strictly_faster;
  }
  if (o.check) {
    const auto& total = r.table.total;
    ok = ok && total.success_pct >= 85.0 && total.false_positive_pct <= 5.0 &&
         r.agreement() >= 0.95 && r.peripheral_rate() >= 0.90;
    std::printf("check: %s\n", ok ? "ok" : "FAILED");
    return ok ? 0 : 1;
  }
  return ok ? 0 : 1;
}

// ---- control-sim ------------------------------------------------------------

struct ControlOpts {
  std::string scenario = "screw";
  std::uint64_t seed = 1;
  double mu = 0.8;
  int max_frames = 600;
  bool use_raster = false;
  std::string out;
  bool check = false;
};

int cmd_control(Shared& sh, const ControlOpts& o) {
  sh.load();
  GripControlConfig cfg;
  cfg.scenario = o.scenario == "unscrew" ? GripScenario::kUnscrew : GripScenario::kScrew;
  cfg.seed = o.seed;
  cfg.friction_mu = o.mu;
  cfg.max_frames = o.max_frames;
  cfg.use_raster = o.use_raster;
  GripControlResult r = run_control_loop(sh.model, sh.dcfg, sh.rcfg, cfg);

  std::printf("%s seed %llu: %d frames, %zu slip events, terminal force %.0f N%s%s\n",
              o.scenario.c_str(), static_cast<unsigned long long>(o.seed), r.frames,
              r.slip_event_frames.size(), r.terminal_force_n,
              r.reached_force_max ? ", reached max" : "", r.stalled ? ", STALLED" : "");
  if (!o.out.empty()) std::ofstream(o.out) << r.to_json().dump(2) << '\n';

  if (o.check) {
    bool ok = cfg.scenario == GripScenario::kScrew
                  ? (r.reached_force_max && !r.stalled)
                  : (!r.stalled && !r.reached_force_max && r.terminal_force_n < cfg.force_max_n);
    std::printf("check: %s\n", ok ? "ok" : "FAILED");
    return ok ? 0 : 1;
  }
  return 0;
}

// ---- report -----------------------------------------------------------------

struct ReportOpts {
  std::string bench_dir;
  std::string decisions;
  bool check = false;
};

int cmd_report(const ReportOpts& o) {
  bool ok = true;
  if (!o.bench_dir.empty()) {
    std::ifstream in(o.bench_dir + "/metrics.json");
    if (!in) throw std::runtime_error("missing " + o.bench_dir + "/metrics.json");
    json m;
    in >> m;
    std::printf("benchmark: %d trials\n", m["trial_count"].get<int>());
    for (const auto& row : m["table"]["rows"])
      std::printf("  %-14s trials %3d  success %6.2f%%  fp %5.2f%%  fn %5.2f%%  indet %5.2f%%\n",
                  row["object"].get<std::string>().c_str(), row["trials"].get<int>(),
                  row["success_pct"].get<double>(), row["false_positive_pct"].get<double>(),
                  row["false_negative_pct"].get<double>(),
                  row["indeterminate_pct"].get<double>());
    const auto& t = m["table"]["total"];
    std::printf("  %-14s trials %3d  success %6.2f%%  fp %5.2f%%  fn %5.2f%%  indet %5.2f%%\n",
                "TOTAL", t["trials"].get<int>(), t["success_pct"].get<double>(),
                t["false_positive_pct"].get<double>(), t["false_negative_pct"].get<double>(),
                t["indeterminate_pct"].get<double>());
    std::printf("agreement %.2f%%, peripheral-first %.1f%% of %d\n",
                100 * m["agreement"].get<double>(), 100 * m["peripheral_rate"].get<double>(),
                m["peripheral_eligible"].get<int>());
    ok = ok && t["success_pct"].get<double>() >= 85.0 &&
         t["false_positive_pct"].get<double>() <= 5.0 && m["agreement"].get<double>() >= 0.95;
  }
  if (!o.decisions.empty()) {
    std::map<std::string, int> counts;
    for (const auto& line : read_jsonl(o.decisions))
      ++counts[line["verdict"].get<std::string>()];
    std::printf("decisions in %s:\n", o.decisions.c_str());
    for (const auto& [k, n] : counts) std::printf("  %-16s %d\n", k.c_str(), n);
  }
  if (o.check) {
    std::printf("check: %s\n", ok ? "ok" : "FAILED");
    return ok ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incipient-slip detection toolkit: simulator, detector, benchmark"};
  app.require_subcommand(1);

  Shared sh;
  app.add_option("--config", sh.config_path, "INI config overriding sensor/detector defaults");

  SimulateOpts so;
  auto* sim = app.add_subcommand("simulate", "synthesize a contact sequence");
  sim->add_option("--shape", so.shape)->check(CLI::IsMember({"disk", "rect", "annulus"}));
  sim->add_option("--radius", so.radius, "disk radius, mm");
  sim->add_option("--width", so.width, "rect width, mm");
  sim->add_option("--height", so.height, "rect height, mm");
  sim->add_option("--r-in", so.r_in, "annulus inner radius, mm");
  sim->add_option("--r-out", so.r_out, "annulus outer radius, mm");
  sim->add_option("--mu", so.mu, "friction coefficient");
  sim->add_option("--peak-pressure", so.peak_pressure, "per-marker normal force at dome peak");
  sim->add_option("--texture", so.texture, "surface texture strength [0,1]");
  sim->add_flag("--uniform-pressure", so.uniform_pressure, "flat pressure instead of dome");
  sim->add_option("--motion", so.motion)->check(CLI::IsMember({"translation", "rotation", "hold"}));
  sim->add_option("--direction-deg", so.direction_deg, "translation direction");
  sim->add_option("--amplitude-mm", so.amplitude, "translation amplitude");
  sim->add_option("--angle-rad", so.angle, "rotation amplitude");
  sim->add_option("--ramp", so.ramp, "ramp frames");
  sim->add_option("--hold", so.hold, "hold frames after the ramp");
  sim->add_option("--force-scale", so.force_scale, "normal load multiplier");
  sim->add_option("--center-x", so.cx, "patch centre x, mm");
  sim->add_option("--center-y", so.cy, "patch centre y, mm");
  sim->add_option("--out", so.out, "output directory");
  sim->add_option("--seed", so.seed, "noise seed");
  sim->add_flag("--no-images", so.no_images, "skip PGM rendering");

  DetectOpts dopt;
  auto* det = app.add_subcommand("detect", "run the detector on a recorded sequence");
  det->add_option("--in", dopt.in, "sequence directory with manifest.json")->required();
  det->add_option("--format", dopt.format)->check(CLI::IsMember({"auto", "pgm", "csv"}));
  det->add_option("--out", dopt.out, "decisions JSONL path");

  BenchOpts bo;
  auto* ben = app.add_subcommand("bench", "run the synthetic benchmark suite");
  ben->add_option("--out", bo.out, "artifact directory (metrics + trials)");
  ben->add_option("--seed", bo.seed, "suite seed");
  ben->add_flag("--echo", bo.echo, "print per-trial progress");
  ben->add_flag("--check", bo.check, "exit nonzero unless accuracy gates pass");
  ben->add_flag("--latency", bo.latency, "also time the detector per frame");
  ben->add_option("--latency-frames", bo.latency_frames, "frames for the latency timing");

  ControlOpts co;
  auto* ctl = app.add_subcommand("control-sim", "closed-loop grip force scenario");
  ctl->add_option("--scenario", co.scenario)->check(CLI::IsMember({"screw", "unscrew"}));
  ctl->add_option("--seed", co.seed, "scenario seed");
  ctl->add_option("--mu", co.mu, "cap/gel friction coefficient");
  ctl->add_option("--max-frames", co.max_frames, "frame budget");
  ctl->add_flag("--use-raster", co.use_raster, "detect from rendered images");
  ctl->add_option("--out", co.out, "write the result JSON here");
  ctl->add_flag("--check", co.check, "exit nonzero unless the scenario behaves");

  ReportOpts ro;
  auto* rep = app.add_subcommand("report", "summarize benchmark or decision artifacts");
  rep->add_option("--bench", ro.bench_dir, "benchmark artifact directory");
  rep->add_option("--decisions", ro.decisions, "decisions JSONL file");
  rep->add_flag("--check", ro.check, "exit nonzero unless gates pass");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sh, so);
    if (det->parsed()) return cmd_detect(sh, dopt);
    if (ben->parsed()) return cmd_bench(sh, bo);
    if (ctl->parsed()) return cmd_control(sh, co);
    if (rep->parsed()) return cmd_report(ro);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "slipsense: %s\n", e.what());
    return 2;
  }
  return 0;
}
