#pragma once

// Least-squares planar rigid motion from a displacement field.
//
// The inner contact region (the contact mask eroded by a safety margin) is
// assumed to stick, so a motion fitted there predicts what every marker
// would do if the whole patch moved rigidly.  Deviations from that
// prediction at the periphery are the slip signal.

#include <optional>
#include <vector>

#include "slipsense/image.hpp"
#include "slipsense/tracking.hpp"

namespace slipsense {

struct InnerSelection {
  std::vector<int> inner_ids;  // marker ids inside the eroded mask
  double erosion_radius_mm = 0;
  Vec2 centroid{0, 0};  // mean reference position of the inner markers
};

struct RigidFitResult {
  RigidMotion2d motion;      // ref_point = reference centroid of fit points
  double rms_residual = 0;   // RMS |disp - predicted| over the fit points, mm
  int n_points = 0;
};

// In-contact markers whose current position falls inside the mask eroded by
// erosion_radius_mm.  Also flips the `inner` flag on the selected entries.
InnerSelection select_inner(DisplacementField& field, const ContactMask& mask,
                            const SensorGeometry& geom, double erosion_radius_mm);

// Second singular value of the centred position matrix: how well the point
// layout constrains rotation.  Collinear or coincident points give ~0.
double observability_spread(const std::vector<Vec2>& positions);

// Closed-form 2-D Procrustes restricted to the entries whose marker_id is in
// `inner`.  Rotation angle from the atan2 of cross/dot sums of the centred
// point sets; translation is the centroid displacement.  Returns nullopt
// when the inner layout is degenerate (spread < 1e-6 mm).
std::optional<RigidFitResult> fit_rigid(const DisplacementField& field,
                                        const InnerSelection& inner);

}  // namespace slipsense
