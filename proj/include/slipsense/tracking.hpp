#pragma once

// Marker correspondence between frames and reference-relative displacement
// fields.
//
// Matching is mutual nearest neighbour inside a search radius.  The radius
// should stay below half the marker grid pitch: any rigid motion whose
// largest per-marker displacement is smaller than that can never alias onto
// a neighbouring marker, so matching is exact.  Larger motions are handled
// upstream by chaining correspondences frame to frame and rebasing.

#include <vector>

#include "slipsense/raster.hpp"

namespace slipsense {

// Index pairs are (reference index, current index).
struct Correspondence {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> unmatched_ref;
  std::vector<int> unmatched_cur;
};

struct DisplacementEntry {
  int marker_id = 0;
  Vec2 ref_pos{0, 0};
  Vec2 cur_pos{0, 0};
  Vec2 disp{0, 0};  // cur_pos - ref_pos
  bool in_contact = false;
  bool inner = false;
};

struct DisplacementField {
  std::vector<DisplacementEntry> entries;
};

// Mutual nearest neighbour within max_radius_mm.  Exact distance ties are
// broken toward the lowest index, so results are deterministic.
Correspondence match_markers(const std::vector<MarkerObservation>& ref,
                             const std::vector<MarkerObservation>& cur,
                             double max_radius_mm);

// Builds the displacement field for matched pairs.  marker_id and ref_pos
// come from the reference observation, in_contact from the current one.
DisplacementField displacement_field(const Correspondence& corr,
                                     const std::vector<MarkerObservation>& ref,
                                     const std::vector<MarkerObservation>& cur);

}  // namespace slipsense
