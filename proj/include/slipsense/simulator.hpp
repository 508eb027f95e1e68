#pragma once

// Synthetic tactile trials: a quasi-static Coulomb stick-slip model of the
// marker field under a moving contact patch, plus a renderer that turns
// ground-truth frames back into camera images.
//
// Each marker is an independent shear spring anchored at its rest grid
// position.  The object's rigid motion drags the marker toward the rigid
// target; once the spring force exceeds the local friction capacity
// mu * p(r), the marker saturates at capacity magnitude along the target
// direction.  Pressure follows a dome profile (peaked at the patch centre,
// vanishing toward the boundary), so the periphery always lets go first.

#include <cstdint>
#include <string>
#include <vector>

#include "slipsense/image.hpp"
#include "slipsense/raster.hpp"

namespace slipsense {

enum class PatchShape { kDisk, kRect, kAnnulus };

struct ObjectSpec {
  std::string name;
  PatchShape shape = PatchShape::kDisk;
  double radius_mm = 10.0;                     // disk
  double width_mm = 16.0, height_mm = 10.0;    // rect
  double r_inner_mm = 3.0, r_outer_mm = 10.0;  // annulus
  bool dome_pressure = true;                   // false: uniform
  double peak_pressure_n = 1.0;  // per-marker normal force at the dome peak, unit scale
  double friction_mu = 0.8;
  double texture_strength = 0.8;  // [0,1]; 0 renders indistinguishable from background
};

ObjectSpec disk_object(std::string name, double radius_mm, double mu, double p0, double texture);
ObjectSpec rect_object(std::string name, double w_mm, double h_mm, double mu, double p0,
                       double texture);
ObjectSpec annulus_object(std::string name, double r_in_mm, double r_out_mm, double mu, double p0,
                          double texture);

// Pose of the patch relative to its rest placement; rotation is about the
// (translated) patch centre, CCW positive.
struct PatchPose {
  Vec2 translation{0, 0};
  double rotation = 0;
};

struct LoadScript {
  Vec2 patch_center{20, 15};        // rest placement of the patch centre, mm
  std::vector<PatchPose> poses;     // one per frame; poses[0] is the reference
  std::vector<double> normal_scale; // per-frame multiplier on peak pressure
};

// Throws if any frame-to-frame motion exceeds half the marker pitch
// anywhere on the patch (the validity domain of the quasi-static model).
void validate_script(const LoadScript& script, const ObjectSpec& obj, double pitch_mm);

struct RenderParams {
  double marker_radius_mm = 0.31;
  int background = 60;
  int marker_intensity = 15;
  // Texture contrast is amp = 255 * min(1, texture_strength * normal_scale
  // * contrast_per_load): soft imprints at light loads fall below the edge
  // detector's reach, exactly like low-texture objects on the real sensor.
  double contrast_per_load = 15.0;
  double camera_noise_sigma = 5.0;
  int speckle_block_px = 2;
  double speckle_density = 0.45;
};

struct GelModel {
  SensorGeometry geometry;
  double pitch_mm = 1.5;
  double shear_stiffness = 0.8;  // N/mm per marker
  double noise_sigma_mm = 0.01;  // measurement noise on reported positions
  // Dome pressure below this fraction of peak counts as out of contact;
  // keeps the rim capacity bounded away from zero.
  double contact_shape_floor = 0.15;
  RenderParams render;
};

// Rest positions of the marker grid: square pitch, one-pitch margin,
// centred on the sensing area; row-major from the bottom-left.
std::vector<Vec2> marker_grid(const GelModel& model);

enum class MarkerState { kStuck, kSlipping, kOutOfContact };
enum class FrameLabel { kNoSlip, kIncipientSlip, kGrossSlip };

const char* to_string(MarkerState s);
const char* to_string(FrameLabel l);

struct GroundTruthFrame {
  int index = 0;
  PatchPose pose;
  Vec2 patch_center{0, 0};  // rest placement of the patch centre, mm
  double normal_scale = 1.0;
  std::vector<Vec2> positions;      // grid order, with measurement noise
  std::vector<MarkerState> states;  // grid order
  FrameLabel label = FrameLabel::kNoSlip;
};

// One quasi-static frame.  Deterministic in (seed, frame_index).
GroundTruthFrame simulate_frame(const GelModel& model, const ObjectSpec& obj,
                                const LoadScript& script, int frame_index, std::uint64_t seed);

std::vector<GroundTruthFrame> simulate(const GelModel& model, const ObjectSpec& obj,
                                       const LoadScript& script, std::uint64_t seed);

// Camera image of a ground-truth frame.  The speckle texture is anchored to
// the patch (it moves with the object); camera noise varies per frame.
// Deterministic in (seed, frame index).
GrayImage render(const GelModel& model, const ObjectSpec& obj, const GroundTruthFrame& frame,
                 std::uint64_t seed);

// Script builders.  Frame 0 is the identity reference pose; the motion
// ramps linearly over ramp_frames and then holds.
LoadScript make_translation_ramp(Vec2 patch_center, Vec2 direction, double amplitude_mm,
                                 int ramp_frames, int hold_frames, double normal_scale);
LoadScript make_rotation_ramp(Vec2 patch_center, double angle_rad, int ramp_frames,
                              int hold_frames, double normal_scale);

struct TrialSpec {
  int trial_id = 0;
  ObjectSpec object;
  LoadScript script;
  std::uint64_t seed = 0;
  int force_level = 0;  // 0 low, 1 mid, 2 high
  bool is_rotation = false;
  bool slip_intent = false;
  std::vector<FrameLabel> expected_labels;
};

// The 240-trial benchmark: 10 objects x (18 slip + 6 non-slip), three force
// levels, mixed patch shapes, friction and texture spanning the supported
// ranges.  Slip scripts ramp well past the weakest-capacity marker of the
// strongest one; non-slip scripts stay below every marker's capacity.
std::vector<TrialSpec> benchmark_suite(const GelModel& model, std::uint64_t seed);

// Normal-force multipliers of the three benchmark force levels.
extern const double kForceLevels[3];

}  // namespace slipsense
