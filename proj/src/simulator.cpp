#include "slipsense/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace slipsense {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

// Signed distance to the patch boundary (positive inside) and its maximum,
// in the patch frame.
void boundary_depth(const ObjectSpec& obj, const Vec2& xi, double& d, double& d_max) {
  switch (obj.shape) {
    case PatchShape::kDisk:
      d = obj.radius_mm - xi.norm();
      d_max = obj.radius_mm;
      return;
    case PatchShape::kRect:
      d = std::min(obj.width_mm / 2 - std::abs(xi.x()), obj.height_mm / 2 - std::abs(xi.y()));
      d_max = std::min(obj.width_mm, obj.height_mm) / 2;
      return;
    case PatchShape::kAnnulus: {
      double r = xi.norm();
      d = std::min(r - obj.r_inner_mm, obj.r_outer_mm - r);
      d_max = (obj.r_outer_mm - obj.r_inner_mm) / 2;
      return;
    }
  }
  d = -1;
  d_max = 1;
}

// Normalized pressure profile in [0,1]; 0 outside the patch.  The disk dome
// p0*sqrt(1-(r/R)^2) generalizes to any shape through the boundary depth d
// as sqrt(d*(2*d_max-d))/d_max, which reduces to the radial form on a disk
// and keeps the periphery softest on every shape.
double pressure_shape(const ObjectSpec& obj, const Vec2& xi) {
  double d, d_max;
  boundary_depth(obj, xi, d, d_max);
  if (d <= 0) return 0;
  if (!obj.dome_pressure) return 1;
  return std::sqrt(std::max(0.0, d * (2 * d_max - d))) / d_max;
}

double patch_extent_radius(const ObjectSpec& obj) {
  switch (obj.shape) {
    case PatchShape::kDisk: return obj.radius_mm;
    case PatchShape::kRect: return std::hypot(obj.width_mm, obj.height_mm) / 2;
    case PatchShape::kAnnulus: return obj.r_outer_mm;
  }
  return 0;
}

Vec2 rotate(const Vec2& v, double c, double s) {
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

// Deterministic per-trial tile of camera noise; the per-frame offset walks
// the tile so frames decorrelate without redrawing 300k gaussians each.
const std::vector<std::int8_t>& noise_tile(std::uint64_t seed, double sigma) {
  thread_local std::uint64_t cached_seed = ~0ULL;
  thread_local double cached_sigma = -1;
  thread_local std::vector<std::int8_t> tile;
  if (cached_seed != seed || cached_sigma != sigma) {
    tile.resize(1 << 16);
    std::mt19937_64 rng(mix(seed, 0x6361'6d65'7261ULL));
    std::normal_distribution<double> n(0.0, sigma);
    for (auto& v : tile) {
      double x = std::clamp(n(rng), -3.5 * sigma, 3.5 * sigma);
      v = static_cast<std::int8_t>(std::lround(x));
    }
    cached_seed = seed;
    cached_sigma = sigma;
  }
  return tile;
}

}  // namespace

const double kForceLevels[3] = {0.6, 1.2, 2.4};

ObjectSpec disk_object(std::string name, double radius_mm, double mu, double p0, double texture) {
  ObjectSpec o;
  o.name = std::move(name);
  o.shape = PatchShape::kDisk;
  o.radius_mm = radius_mm;
  o.friction_mu = mu;
  o.peak_pressure_n = p0;
  o.texture_strength = texture;
  return o;
}

ObjectSpec rect_object(std::string name, double w_mm, double h_mm, double mu, double p0,
                       double texture) {
  ObjectSpec o;
  o.name = std::move(name);
  o.shape = PatchShape::kRect;
  o.width_mm = w_mm;
  o.height_mm = h_mm;
  o.friction_mu = mu;
  o.peak_pressure_n = p0;
  o.texture_strength = texture;
  return o;
}

ObjectSpec annulus_object(std::string name, double r_in_mm, double r_out_mm, double mu, double p0,
                          double texture) {
  ObjectSpec o;
  o.name = std::move(name);
  o.shape = PatchShape::kAnnulus;
  o.r_inner_mm = r_in_mm;
  o.r_outer_mm = r_out_mm;
  o.friction_mu = mu;
  o.peak_pressure_n = p0;
  o.texture_strength = texture;
  return o;
}

void validate_script(const LoadScript& script, const ObjectSpec& obj, double pitch_mm) {
  if (script.poses.empty() || script.poses.size() != script.normal_scale.size())
    throw std::invalid_argument("load script: empty or pose/scale length mismatch");
  const double bound = 0.5 * pitch_mm;
  const double reach = patch_extent_radius(obj);
  for (std::size_t t = 1; t < script.poses.size(); ++t) {
    double dt = (script.poses[t].translation - script.poses[t - 1].translation).norm();
    double dr = std::abs(script.poses[t].rotation - script.poses[t - 1].rotation);
    if (dt + dr * reach > bound)
      throw std::invalid_argument(
          "load script: frame-to-frame motion exceeds half the marker pitch");
  }
}

std::vector<Vec2> marker_grid(const GelModel& model) {
  const double p = model.pitch_mm;
  const double W = model.geometry.width_mm, H = model.geometry.height_mm;
  int nx = static_cast<int>(std::floor((W - 2 * p) / p + 1e-9)) + 1;
  int ny = static_cast<int>(std::floor((H - 2 * p) / p + 1e-9)) + 1;
  double x0 = (W - (nx - 1) * p) / 2;
  double y0 = (H - (ny - 1) * p) / 2;
  std::vector<Vec2> grid;
  grid.reserve(static_cast<std::size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) grid.emplace_back(x0 + ix * p, y0 + iy * p);
  return grid;
}

const char* to_string(MarkerState s) {
  switch (s) {
    case MarkerState::kStuck: return "stuck";
    case MarkerState::kSlipping: return "slipping";
    case MarkerState::kOutOfContact: return "out_of_contact";
  }
  return "?";
}

const char* to_string(FrameLabel l) {
  switch (l) {
    case FrameLabel::kNoSlip: return "no_slip";
    case FrameLabel::kIncipientSlip: return "incipient_slip";
    case FrameLabel::kGrossSlip: return "gross_slip";
  }
  return "?";
}

GroundTruthFrame simulate_frame(const GelModel& model, const ObjectSpec& obj,
                                const LoadScript& script, int frame_index, std::uint64_t seed) {
  const PatchPose& pose = script.poses.at(static_cast<std::size_t>(frame_index));
  const Vec2 c = script.patch_center;
  const double scale = script.normal_scale.at(static_cast<std::size_t>(frame_index));
  const double cs = std::cos(pose.rotation), sn = std::sin(pose.rotation);

  GroundTruthFrame out;
  out.index = frame_index;
  out.pose = pose;
  out.patch_center = c;
  out.normal_scale = scale;

  std::vector<Vec2> grid = marker_grid(model);
  out.positions.resize(grid.size());
  out.states.resize(grid.size());

  std::mt19937_64 rng(mix(seed, 0x706f73ULL + static_cast<std::uint64_t>(frame_index)));
  std::normal_distribution<double> noise(0.0, model.noise_sigma_mm);

  int in_contact = 0, slipping = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec2& x = grid[i];
    // Marker anchor in the patch frame of the current pose.
    Vec2 xi = rotate(x - c - pose.translation, cs, -sn);
    double shape = scale > 0 ? pressure_shape(obj, xi) : 0.0;
    Vec2 u{0, 0};
    if (shape < model.contact_shape_floor) {
      out.states[i] = MarkerState::kOutOfContact;
    } else {
      ++in_contact;
      // Where the object surface touching the anchor has moved to.
      Vec2 target = rotate(x - c, cs, sn) + c + pose.translation - x;
      double cap = obj.friction_mu * scale * obj.peak_pressure_n * shape / model.shear_stiffness;
      double t = target.norm();
      if (t <= cap) {
        out.states[i] = MarkerState::kStuck;
        u = target;
      } else {
        out.states[i] = MarkerState::kSlipping;
        ++slipping;
        u = target * (cap / t);
      }
    }
    out.positions[i] = x + u + Vec2{noise(rng), noise(rng)};
  }

  if (slipping == 0)
    out.label = FrameLabel::kNoSlip;
  else if (slipping == in_contact)
    out.label = FrameLabel::kGrossSlip;
  else
    out.label = FrameLabel::kIncipientSlip;
  return out;
}

std::vector<GroundTruthFrame> simulate(const GelModel& model, const ObjectSpec& obj,
                                       const LoadScript& script, std::uint64_t seed) {
  validate_script(script, obj, model.pitch_mm);
  std::vector<GroundTruthFrame> frames;
  frames.reserve(script.poses.size());
  for (int t = 0; t < static_cast<int>(script.poses.size()); ++t)
    frames.push_back(simulate_frame(model, obj, script, t, seed));
  return frames;
}

GrayImage render(const GelModel& model, const ObjectSpec& obj, const GroundTruthFrame& frame,
                 std::uint64_t seed) {
  const SensorGeometry& g = model.geometry;
  const RenderParams& rp = model.render;
  GrayImage img(g.width_px, g.height_px, static_cast<std::uint8_t>(rp.background));

  // Imprint texture: binary speckle anchored to the patch frame, so it
  // translates and rotates with the object.  Only the region pressed hard
  // enough to count as contact leaves an imprint, and the bright blocks
  // rise above the background by amp; dim imprints (low texture or light
  // load) sink below the edge detector's hysteresis thresholds and vanish
  // from the raster pipeline exactly like faint objects on the real sensor.
  const int amp = static_cast<int>(
      255.0 * std::min(1.0, obj.texture_strength * frame.normal_scale * rp.contrast_per_load));
  if (amp > 0 && frame.normal_scale > 0) {
    const Vec2 centre = frame.patch_center + frame.pose.translation;
    const double cs = std::cos(frame.pose.rotation), sn = std::sin(frame.pose.rotation);
    const double reach = patch_extent_radius(obj) + 1.0;
    const double block_mm = rp.speckle_block_px * g.sx();
    const std::uint64_t bright_cut =
        static_cast<std::uint64_t>(rp.speckle_density * 18446744073709551615.0);
    const std::uint64_t speckle_seed = mix(seed, 0x7370'6563'6b6cULL);

    Vec2 lo = g.mm_to_px({centre.x() - reach, centre.y() + reach});
    Vec2 hi = g.mm_to_px({centre.x() + reach, centre.y() - reach});
    int px0 = std::max(0, static_cast<int>(std::floor(lo.x())));
    int py0 = std::max(0, static_cast<int>(std::floor(lo.y())));
    int px1 = std::min(g.width_px - 1, static_cast<int>(std::ceil(hi.x())));
    int py1 = std::min(g.height_px - 1, static_cast<int>(std::ceil(hi.y())));
    for (int py = py0; py <= py1; ++py) {
      for (int px = px0; px <= px1; ++px) {
        Vec2 mm = g.px_to_mm({static_cast<double>(px), static_cast<double>(py)});
        Vec2 xi = rotate(mm - centre, cs, -sn);
        if (pressure_shape(obj, xi) < model.contact_shape_floor) continue;
        auto bx = static_cast<std::int64_t>(std::floor(xi.x() / block_mm));
        auto by = static_cast<std::int64_t>(std::floor(xi.y() / block_mm));
        std::uint64_t h =
            mix(mix(speckle_seed, static_cast<std::uint64_t>(bx)), static_cast<std::uint64_t>(by));
        if (h < bright_cut)
          img.at(px, py) =
              static_cast<std::uint8_t>(std::min(255, rp.background + amp));
      }
    }
  }

  // Markers are printed on the gel: always drawn, at their displaced
  // positions, darker than everything else.  Anti-aliased disks.
  const double r_px = rp.marker_radius_mm / g.sx();
  for (const Vec2& pos : frame.positions) {
    Vec2 cp = g.mm_to_px(pos);
    int x0 = static_cast<int>(std::floor(cp.x() - r_px - 1));
    int x1 = static_cast<int>(std::ceil(cp.x() + r_px + 1));
    int y0 = static_cast<int>(std::floor(cp.y() - r_px - 1));
    int y1 = static_cast<int>(std::ceil(cp.y() + r_px + 1));
    for (int py = std::max(0, y0); py <= std::min(g.height_px - 1, y1); ++py) {
      for (int px = std::max(0, x0); px <= std::min(g.width_px - 1, x1); ++px) {
        double dist = std::hypot(px - cp.x(), py - cp.y());
        double cov = std::clamp(r_px + 0.5 - dist, 0.0, 1.0);
        if (cov <= 0) continue;
        double v = (1 - cov) * img.at(px, py) + cov * rp.marker_intensity;
        img.at(px, py) = static_cast<std::uint8_t>(std::lround(v));
      }
    }
  }

  if (rp.camera_noise_sigma > 0) {
    const auto& tile = noise_tile(seed, rp.camera_noise_sigma);
    const std::size_t offset =
        static_cast<std::size_t>(mix(seed, 0x6f66'6673ULL + static_cast<std::uint64_t>(frame.index)));
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      int v = img.data[i] + tile[(i + offset) & 0xFFFF];
      img.data[i] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
    }
  }
  return img;
}

LoadScript make_translation_ramp(Vec2 patch_center, Vec2 direction, double amplitude_mm,
                                 int ramp_frames, int hold_frames, double normal_scale) {
  LoadScript s;
  s.patch_center = patch_center;
  Vec2 dir = direction.norm() > 0 ? Vec2(direction / direction.norm()) : Vec2{1, 0};
  int total = 1 + ramp_frames + hold_frames;
  s.poses.reserve(total);
  for (int t = 0; t < total; ++t) {
    double a = ramp_frames > 0 ? std::min(1.0, static_cast<double>(t) / ramp_frames) : 1.0;
    if (t == 0) a = 0;
    s.poses.push_back({dir * (amplitude_mm * a), 0.0});
  }
  s.normal_scale.assign(total, normal_scale);
  return s;
}

LoadScript make_rotation_ramp(Vec2 patch_center, double angle_rad, int ramp_frames,
                              int hold_frames, double normal_scale) {
  LoadScript s;
  s.patch_center = patch_center;
  int total = 1 + ramp_frames + hold_frames;
  s.poses.reserve(total);
  for (int t = 0; t < total; ++t) {
    double a = ramp_frames > 0 ? std::min(1.0, static_cast<double>(t) / ramp_frames) : 1.0;
    if (t == 0) a = 0;
    s.poses.push_back({Vec2{0, 0}, angle_rad * a});
  }
  s.normal_scale.assign(total, normal_scale);
  return s;
}

std::vector<TrialSpec> benchmark_suite(const GelModel& model, std::uint64_t seed) {
  // Ten everyday objects spanning patch shape, friction and imprint
  // texture.  peak_pressure is per unit normal scale; capacity at the dome
  // peak is mu*scale*p0/k mm of shear before letting go.
  std::vector<ObjectSpec> roster = {
      annulus_object("tape_ring", 2.8, 10.0, 0.90, 1.45, 0.85),
      rect_object("wax_block", 16.0, 10.0, 0.40, 0.60, 0.05),
      disk_object("steel_shears", 6.5, 0.30, 4.10, 0.95),
      disk_object("water_flask", 8.5, 0.55, 2.20, 0.70),
      disk_object("glue_stick", 7.0, 0.65, 1.90, 0.45),
      rect_object("foam_brick", 14.0, 12.0, 1.20, 1.00, 0.60),
      disk_object("rubber_duck", 9.0, 1.00, 1.20, 0.90),
      disk_object("driver_grip", 8.0, 0.80, 1.55, 1.00),
      disk_object("foam_pad", 10.0, 0.45, 0.55, 0.12),
      disk_object("blue_tube", 8.5, 0.20, 6.20, 0.75),
  };

  const std::vector<Vec2> grid = marker_grid(model);
  const double step_cap = 0.25;      // max per-frame patch motion, mm
  const double detect_margin = 0.60; // travel past capacity before a marker votes slip
  std::vector<TrialSpec> trials;
  trials.reserve(roster.size() * 24);
  int trial_id = 0;

  for (std::size_t oi = 0; oi < roster.size(); ++oi) {
    const ObjectSpec& obj = roster[oi];
    const double reach = patch_extent_radius(obj);
    const double base_angle = 0.3927 * static_cast<double>(oi);  // spreads push directions
    // Keep the patch on the sensor: centre jitter up to 1.5 mm plus the
    // travel must stay inside the 30 mm (short-axis) extent.
    const double travel_bound = std::max(0.5, 13.5 - reach - 1.5);

    for (int level = 0; level < 3; ++level) {
      const double scale = kForceLevels[level];
      const double cap_max =
          obj.friction_mu * scale * obj.peak_pressure_n / model.shear_stiffness;

      auto add_trial = [&](const LoadScript& script, bool rotation, bool slip_intent) {
        TrialSpec t;
        t.trial_id = trial_id++;
        t.object = obj;
        t.script = script;
        t.seed = mix(seed, static_cast<std::uint64_t>(t.trial_id) + 1);
        t.force_level = level;
        t.is_rotation = rotation;
        t.slip_intent = slip_intent;
        auto frames = simulate(model, obj, script, t.seed);
        t.expected_labels.reserve(frames.size());
        for (const auto& f : frames) t.expected_labels.push_back(f.label);
        trials.push_back(std::move(t));
      };

      auto jittered_centre = [&](int k) {
        std::mt19937_64 rng(mix(seed, 0xc347ULL + static_cast<std::uint64_t>(trial_id * 7 + k)));
        std::uniform_real_distribution<double> j(-1.5, 1.5);
        return Vec2{20.0 + j(rng), 15.0 + j(rng)};
      };

      // A marker votes slip once the commanded travel exceeds its holding
      // capacity by detect_margin (threshold plus fit and tracking slack),
      // and the verdict needs three votes.  Pushes are therefore sized off
      // the third-weakest marker of the trial's own jittered grid and stop
      // shortly past it, so each ramp carries a clean detection event and
      // a long quiescent hold follows.  Amplitudes round up to an even
      // number of ramp steps so the threshold crossings of the image path
      // and of the marker-table path land on the same frames.  On the
      // low-capacity objects at the low force level min() instead selects
      // 1.3 * cap_max, which keeps every residual below the slip
      // threshold: those trials slip in ground truth yet stay undetectable
      // by design.
      auto in_patch_caps = [&](const Vec2& centre) {
        std::vector<double> caps;
        for (const Vec2& x : grid) {
          double shape = pressure_shape(obj, Vec2(x - centre));
          if (shape >= model.contact_shape_floor)
            caps.push_back(obj.friction_mu * scale * obj.peak_pressure_n * shape /
                           model.shear_stiffness);
        }
        std::sort(caps.begin(), caps.end());
        return caps;
      };

      // Four translation slips, evenly spread directions.
      for (int k = 0; k < 4; ++k) {
        Vec2 centre = jittered_centre(k);
        auto caps = in_patch_caps(centre);
        double det = (caps.size() >= 3 ? caps[2] : cap_max) + detect_margin;
        det = 2 * step_cap * std::ceil(det / (2 * step_cap));
        const double amp = std::min({1.3 * cap_max, det, travel_bound});
        double ang = base_angle + k * (std::numbers::pi / 2);
        int ramp = std::max(2, static_cast<int>(std::ceil(amp / step_cap)));
        auto s = make_translation_ramp(centre, {std::cos(ang), std::sin(ang)}, amp, ramp,
                                       24, scale);
        add_trial(s, false, true);
      }

      // Two rotation slips, opposite senses.  The same sizing applies in
      // angle: a marker at radius r votes after (cap + margin) / r radians,
      // so the push stops past the third-smallest such angle, rounded to an
      // even number of angular steps.
      for (int k = 0; k < 2; ++k) {
        Vec2 centre = jittered_centre(4 + k);
        std::vector<double> angs;
        for (const Vec2& x : grid) {
          Vec2 xi = Vec2(x - centre);
          double shape = pressure_shape(obj, xi);
          double r = xi.norm();
          if (shape >= model.contact_shape_floor && r > 2.0)
            angs.push_back((obj.friction_mu * scale * obj.peak_pressure_n * shape /
                                model.shear_stiffness +
                            detect_margin) /
                           r);
        }
        std::sort(angs.begin(), angs.end());
        const double theta_step = step_cap / reach;
        double det = angs.size() >= 3 ? angs[2] : 0.45;
        det = 2 * theta_step * std::ceil(det / (2 * theta_step));
        const double mag = std::min({det, 1.3 * cap_max / (0.9 * reach), 0.45});
        double ang = (k == 0 ? 1.0 : -1.0) * mag;
        int ramp = std::max(2, static_cast<int>(std::ceil(mag * reach / step_cap)));
        auto s = make_rotation_ramp(centre, ang, ramp, 24, scale);
        add_trial(s, true, true);
      }

      // Two non-slip trials: loads below both the weakest marker's holding
      // capacity (0.15 * cap_max) and the verdict threshold, so neither
      // ground truth nor either detection path sees slip.
      const double hold_amp = std::min(0.12 * cap_max, 0.2);
      {
        double ang = base_angle + (level + 0.5) * (std::numbers::pi / 2);
        auto s = make_translation_ramp(jittered_centre(6), {std::cos(ang), std::sin(ang)},
                                       hold_amp, 8, 20, scale);
        add_trial(s, false, false);
      }
      {
        double ang = (level == 1 ? -1.0 : 1.0) * hold_amp / reach;
        auto s = make_rotation_ramp(jittered_centre(7), ang, 8, 20, scale);
        add_trial(s, true, false);
      }
    }
  }
  return trials;
}

}  // namespace slipsense
