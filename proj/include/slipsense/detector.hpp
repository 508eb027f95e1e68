#pragma once

// Incipient-slip detection from marker displacement fields.
//
// Per frame: recover markers and the contact region, measure each marker's
// displacement since the stored reference frame, fit a rigid motion to the
// inner (surely sticking) part of the contact, and flag markers whose real
// displacement deviates from that motion by more than the slip threshold.
// Enough flagged markers means the periphery has started to let go while
// the centre still sticks — incipient slip.  On detection the reference is
// rebased to the current frame so subsequent displacements stay small.

#include <optional>
#include <string>
#include <vector>

#include "slipsense/raster.hpp"
#include "slipsense/rigid_fit.hpp"
#include "slipsense/tracking.hpp"

namespace slipsense {

enum class Verdict { kNoContact, kIndeterminate, kNoSlip, kIncipientSlip };

enum class IndeterminateReason { kNone, kInsufficientInnerRegion, kDegenerateConfiguration };

const char* to_string(Verdict v);
const char* to_string(IndeterminateReason r);

struct DetectorConfig {
  double slip_threshold_mm = 0.26;   // residual above this marks a marker slipped
  int min_slipped_markers = 3;       // slipped markers needed for a detection
  int min_contact_markers = 12;      // below this the frame is NoContact
  double erosion_radius_mm = 3.0;    // contact-mask erosion for the inner region
  int min_inner_markers = 6;         // fewer inner markers => Indeterminate
  double max_match_radius_mm = 0.7;  // marker matching radius (< pitch/2)
  double omega_epsilon = 1e-8;       // |w| at or below this: no ICR reported
};

// One frame of pipeline input: either a raw camera image (raster path) or
// pre-localized marker observations (e.g. from an exported marker table).
struct FrameSnapshot {
  int index = 0;
  SensorGeometry geometry;
  std::vector<MarkerObservation> markers;
  std::optional<GrayImage> image;
};

struct SlipEntry {
  int marker_id = 0;
  Vec2 real_disp{0, 0};
  Vec2 est_disp{0, 0};
  Vec2 residual{0, 0};  // real - est
  bool slipped = false;
  double boundary_distance_mm = 0;  // to the contact-mask boundary
};

struct SlipField {
  std::vector<SlipEntry> entries;
};

struct SlipDecision {
  int frame = 0;
  Verdict verdict = Verdict::kNoContact;
  IndeterminateReason reason = IndeterminateReason::kNone;
  std::vector<int> slipped_ids;
  std::optional<RigidMotion2d> motion;
  std::optional<Vec2> icr_point;
  bool rebased = false;
  int n_contact = 0;
  int n_inner = 0;
  double rms_residual = 0;
  SlipField field;
};

// Predicted displacement of every in-contact entry under the fitted motion.
SlipField estimate_field(const RigidMotion2d& motion, const DisplacementField& field);

// Residuals, slip flags, and distance to the contact boundary.
void slip_field(SlipField& sf, const DisplacementField& field, const ContactMask& mask,
                const SensorGeometry& geom, double slip_threshold_mm);

class SlipDetector {
 public:
  SlipDetector(SensorGeometry geometry, DetectorConfig config, RasterConfig raster);

  // Stores `frame` as the new reference.  Returns the number of in-contact
  // markers found (a reference below min_contact_markers is still stored).
  int set_reference(const FrameSnapshot& frame);

  // Evaluates one frame against the reference.  Throws std::logic_error
  // before set_reference, std::invalid_argument on geometry mismatch.
  SlipDecision step(const FrameSnapshot& frame);

  bool has_reference() const { return has_reference_; }
  const DetectorConfig& config() const { return config_; }

 private:
  struct ProcessedFrame {
    std::vector<MarkerObservation> markers;  // ids filled in by the tracker
    ContactMask mask;
  };

  ProcessedFrame process(const FrameSnapshot& frame) const;
  void track_ids(std::vector<MarkerObservation>& markers);

  SensorGeometry geometry_;
  DetectorConfig config_;
  RasterConfig raster_;

  bool has_reference_ = false;
  ProcessedFrame reference_;
  std::vector<MarkerObservation> prev_;  // last seen frame, ids assigned
  int next_id_ = 1;
};

}  // namespace slipsense
