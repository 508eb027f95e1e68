#include "slipsense/rigid_fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "slipsense/distance_transform.hpp"

namespace slipsense {

InnerSelection select_inner(DisplacementField& field, const ContactMask& mask,
                            const SensorGeometry& geom, double erosion_radius_mm) {
  // Erosion runs in pixel units; pixel pitch is near-square by contract.
  ContactMask eroded = erode_disk(mask, erosion_radius_mm / geom.sx());
  InnerSelection sel;
  sel.erosion_radius_mm = erosion_radius_mm;
  Vec2 sum{0, 0};
  for (auto& e : field.entries) {
    e.inner = false;
    if (!e.in_contact) continue;
    Vec2 px = geom.mm_to_px(e.cur_pos);
    int x = static_cast<int>(std::lround(px.x()));
    int y = static_cast<int>(std::lround(px.y()));
    if (!eroded.in_bounds(x, y) || !eroded.at(x, y)) continue;
    e.inner = true;
    sel.inner_ids.push_back(e.marker_id);
    sum += e.ref_pos;
  }
  if (!sel.inner_ids.empty()) sel.centroid = sum / sel.inner_ids.size();
  return sel;
}

double observability_spread(const std::vector<Vec2>& positions) {
  if (positions.size() < 2) return 0.0;
  Vec2 mean{0, 0};
  for (const Vec2& p : positions) mean += p;
  mean /= static_cast<double>(positions.size());
  Eigen::Matrix2Xd centered(2, positions.size());
  for (int i = 0; i < static_cast<int>(positions.size()); ++i)
    centered.col(i) = positions[i] - mean;
  Eigen::JacobiSVD<Eigen::Matrix2Xd> svd(centered);
  return svd.singularValues()(1);
}

std::optional<RigidFitResult> fit_rigid(const DisplacementField& field,
                                        const InnerSelection& inner) {
  std::vector<int> ids = inner.inner_ids;
  std::sort(ids.begin(), ids.end());
  std::vector<const DisplacementEntry*> pts;
  pts.reserve(ids.size());
  for (const auto& e : field.entries)
    if (std::binary_search(ids.begin(), ids.end(), e.marker_id)) pts.push_back(&e);
  if (pts.size() < 2) return std::nullopt;

  Vec2 c_ref{0, 0}, c_cur{0, 0};
  for (const auto* e : pts) {
    c_ref += e->ref_pos;
    c_cur += e->cur_pos;
  }
  c_ref /= static_cast<double>(pts.size());
  c_cur /= static_cast<double>(pts.size());

  std::vector<Vec2> ref_positions;
  ref_positions.reserve(pts.size());
  double cross = 0, dot = 0;
  for (const auto* e : pts) {
    Vec2 a = e->ref_pos - c_ref;
    Vec2 b = e->cur_pos - c_cur;
    cross += a.x() * b.y() - a.y() * b.x();
    dot += a.dot(b);
    ref_positions.push_back(e->ref_pos);
  }
  if (observability_spread(ref_positions) < 1e-6) return std::nullopt;

  RigidFitResult fit;
  fit.motion.ref_point = c_ref;
  fit.motion.linear_velocity = c_cur - c_ref;
  fit.motion.angular_velocity = std::atan2(cross, dot);
  fit.n_points = static_cast<int>(pts.size());

  double ss = 0;
  for (const auto* e : pts)
    ss += (e->disp - propagate_velocity(fit.motion, e->ref_pos)).squaredNorm();
  fit.rms_residual = std::sqrt(ss / pts.size());
  return fit;
}

}  // namespace slipsense
