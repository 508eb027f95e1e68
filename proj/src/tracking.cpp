#include "slipsense/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace slipsense {
namespace {

// Uniform grid over marker positions with cell size = search radius, so a
// nearest-neighbour query only visits the 3x3 cell neighbourhood.
class GridIndex {
 public:
  GridIndex(const std::vector<MarkerObservation>& pts, double cell) : cell_(cell) {
    for (int i = 0; i < static_cast<int>(pts.size()); ++i)
      cells_[key(pts[i].position_mm)].push_back(i);
  }

  // Index of the nearest point to q within radius, lowest index on ties;
  // -1 if none.
  int nearest(const std::vector<MarkerObservation>& pts, const Vec2& q, double radius) const {
    const double r2 = radius * radius;
    double best = std::numeric_limits<double>::infinity();
    int best_i = -1;
    const long cx = coord(q.x()), cy = coord(q.y());
    for (long gy = cy - 1; gy <= cy + 1; ++gy) {
      for (long gx = cx - 1; gx <= cx + 1; ++gx) {
        auto it = cells_.find((gx << 24) ^ gy);
        if (it == cells_.end()) continue;
        for (int i : it->second) {
          double d2 = (pts[i].position_mm - q).squaredNorm();
          if (d2 > r2) continue;
          if (d2 < best || (d2 == best && i < best_i)) {
            best = d2;
            best_i = i;
          }
        }
      }
    }
    return best_i;
  }

 private:
  long coord(double v) const { return static_cast<long>(std::floor(v / cell_)); }
  long key(const Vec2& p) const { return (coord(p.x()) << 24) ^ coord(p.y()); }

  double cell_;
  std::unordered_map<long, std::vector<int>> cells_;
};

}  // namespace

Correspondence match_markers(const std::vector<MarkerObservation>& ref,
                             const std::vector<MarkerObservation>& cur,
                             double max_radius_mm) {
  if (!(max_radius_mm > 0)) throw std::invalid_argument("match_markers: radius must be > 0");
  Correspondence out;
  GridIndex ref_idx(ref, max_radius_mm), cur_idx(cur, max_radius_mm);

  std::vector<int> ref_to_cur(ref.size(), -1);
  for (int i = 0; i < static_cast<int>(ref.size()); ++i)
    ref_to_cur[i] = cur_idx.nearest(cur, ref[i].position_mm, max_radius_mm);

  std::vector<char> cur_taken(cur.size(), 0);
  for (int i = 0; i < static_cast<int>(ref.size()); ++i) {
    int j = ref_to_cur[i];
    if (j >= 0 && ref_idx.nearest(ref, cur[j].position_mm, max_radius_mm) == i) {
      out.pairs.emplace_back(i, j);
      cur_taken[j] = 1;
    } else {
      out.unmatched_ref.push_back(i);
    }
  }
  for (int j = 0; j < static_cast<int>(cur.size()); ++j)
    if (!cur_taken[j]) out.unmatched_cur.push_back(j);
  return out;
}

DisplacementField displacement_field(const Correspondence& corr,
                                     const std::vector<MarkerObservation>& ref,
                                     const std::vector<MarkerObservation>& cur) {
  DisplacementField field;
  field.entries.reserve(corr.pairs.size());
  for (auto [i, j] : corr.pairs) {
    DisplacementEntry e;
    e.marker_id = ref[i].id;
    e.ref_pos = ref[i].position_mm;
    e.cur_pos = cur[j].position_mm;
    e.disp = e.cur_pos - e.ref_pos;
    e.in_contact = cur[j].in_contact;
    field.entries.push_back(e);
  }
  return field;
}

}  // namespace slipsense
