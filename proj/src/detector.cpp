#include "slipsense/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "slipsense/distance_transform.hpp"

namespace slipsense {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kNoContact: return "NoContact";
    case Verdict::kIndeterminate: return "Indeterminate";
    case Verdict::kNoSlip: return "NoSlip";
    case Verdict::kIncipientSlip: return "IncipientSlip";
  }
  return "?";
}

const char* to_string(IndeterminateReason r) {
  switch (r) {
    case IndeterminateReason::kNone: return "none";
    case IndeterminateReason::kInsufficientInnerRegion: return "insufficient_inner_region";
    case IndeterminateReason::kDegenerateConfiguration: return "degenerate_configuration";
  }
  return "?";
}

SlipField estimate_field(const RigidMotion2d& motion, const DisplacementField& field) {
  SlipField sf;
  for (const auto& e : field.entries) {
    if (!e.in_contact) continue;
    SlipEntry s;
    s.marker_id = e.marker_id;
    s.real_disp = e.disp;
    s.est_disp = propagate_velocity(motion, e.ref_pos);
    s.residual = s.real_disp - s.est_disp;
    sf.entries.push_back(s);
  }
  return sf;
}

void slip_field(SlipField& sf, const DisplacementField& field, const ContactMask& mask,
                const SensorGeometry& geom, double slip_threshold_mm) {
  // Distance from each in-mask pixel to the nearest out-of-mask pixel gives
  // the boundary distance; pixel pitch is near-square so sx converts to mm.
  // Out-of-mask pixels sit at distance zero, so the transform only needs the
  // mask's padded bounding box.
  const MaskBox box = mask_bbox(mask, 1);
  std::vector<float> d2;
  if (box.w > 0) {
    ContactMask sub = crop_mask(mask, box);
    ContactMask inv(box.w, box.h);
    for (std::size_t i = 0; i < inv.bits.size(); ++i) inv.bits[i] = !sub.bits[i];
    d2 = squared_distance_to(inv);
  }

  std::unordered_map<int, const DisplacementEntry*> by_id;
  for (const auto& e : field.entries) by_id[e.marker_id] = &e;

  for (auto& s : sf.entries) {
    s.slipped = s.residual.norm() > slip_threshold_mm;
    auto it = by_id.find(s.marker_id);
    if (it == by_id.end()) continue;
    Vec2 px = geom.mm_to_px(it->second->cur_pos);
    int x = std::clamp(static_cast<int>(std::lround(px.x())), 0, mask.width - 1);
    int y = std::clamp(static_cast<int>(std::lround(px.y())), 0, mask.height - 1);
    if (!mask.at(x, y)) {
      s.boundary_distance_mm = 0;
      continue;
    }
    s.boundary_distance_mm =
        std::sqrt(static_cast<double>(d2[static_cast<std::size_t>(y - box.y0) * box.w + x - box.x0])) *
        geom.sx();
  }
}

SlipDetector::SlipDetector(SensorGeometry geometry, DetectorConfig config, RasterConfig raster)
    : geometry_(geometry), config_(config), raster_(raster) {
  if (!geometry_.valid()) throw std::invalid_argument("SlipDetector: bad sensor geometry");
  if (config_.slip_threshold_mm <= 0 || config_.max_match_radius_mm <= 0 ||
      config_.min_slipped_markers < 1)
    throw std::invalid_argument("SlipDetector: bad detector config");
}

SlipDetector::ProcessedFrame SlipDetector::process(const FrameSnapshot& frame) const {
  ProcessedFrame out;
  if (frame.image) {
    const GrayImage& img = *frame.image;
    if (img.width != geometry_.width_px || img.height != geometry_.height_px)
      throw std::invalid_argument("frame image size does not match sensor geometry");
    ContactMask edges = edge_map(img, raster_.canny_low, raster_.canny_high);
    out.mask = contact_mask(edges, raster_.close_radius_px, raster_.min_component_px,
                            raster_.max_fill_hole_px);
    out.markers = detect_markers(img, geometry_, raster_.dark_thresh,
                                 raster_.min_marker_area_px, raster_.max_marker_area_px);
    mask_membership(out.markers, out.mask, geometry_);
  } else {
    // Marker-table path: no image to segment, so synthesize the contact
    // region as a union of pitch-sized disks around in-contact markers.
    out.markers = frame.markers;
    ContactMask seeds(geometry_.width_px, geometry_.height_px);
    for (const auto& m : out.markers) {
      if (!m.in_contact) continue;
      Vec2 px = geometry_.mm_to_px(m.position_mm);
      int x = static_cast<int>(std::lround(px.x()));
      int y = static_cast<int>(std::lround(px.y()));
      if (seeds.in_bounds(x, y)) seeds.at(x, y) = 1;
    }
    out.mask = dilate_disk(seeds, 1.6 / geometry_.sx());  // ~marker pitch in px
  }
  return out;
}

void SlipDetector::track_ids(std::vector<MarkerObservation>& markers) {
  Correspondence corr = match_markers(prev_, markers, config_.max_match_radius_mm);
  for (auto [i, j] : corr.pairs) markers[j].id = prev_[i].id;
  for (int j : corr.unmatched_cur) markers[j].id = next_id_++;
}

int SlipDetector::set_reference(const FrameSnapshot& frame) {
  if (frame.geometry != geometry_)
    throw std::invalid_argument("set_reference: geometry mismatch");
  ProcessedFrame pf = process(frame);
  next_id_ = 1;
  for (auto& m : pf.markers) m.id = next_id_++;
  reference_ = pf;
  prev_ = pf.markers;
  has_reference_ = true;
  int n_contact = 0;
  for (const auto& m : pf.markers) n_contact += m.in_contact;
  return n_contact;
}

SlipDecision SlipDetector::step(const FrameSnapshot& frame) {
  if (!has_reference_) throw std::logic_error("step: no reference frame set");
  if (frame.geometry != geometry_)
    throw std::invalid_argument("step: geometry mismatch");

  SlipDecision d;
  d.frame = frame.index;

  ProcessedFrame pf = process(frame);
  // Identity is carried frame to frame, so per-frame motion only has to
  // stay below the match radius; displacement against the (possibly much
  // older) reference is then read off by id.
  track_ids(pf.markers);
  prev_ = pf.markers;

  for (const auto& m : pf.markers) d.n_contact += m.in_contact;
  if (d.n_contact < config_.min_contact_markers) {
    d.verdict = Verdict::kNoContact;
    return d;
  }

  // Displacement field vs. the reference, joined on marker id.
  Correspondence by_id;
  {
    std::unordered_map<int, int> ref_index;
    for (int i = 0; i < static_cast<int>(reference_.markers.size()); ++i)
      ref_index[reference_.markers[i].id] = i;
    for (int j = 0; j < static_cast<int>(pf.markers.size()); ++j) {
      auto it = ref_index.find(pf.markers[j].id);
      if (it != ref_index.end()) by_id.pairs.emplace_back(it->second, j);
    }
  }
  DisplacementField field = displacement_field(by_id, reference_.markers, pf.markers);

  InnerSelection inner = select_inner(field, pf.mask, geometry_, config_.erosion_radius_mm);
  d.n_inner = static_cast<int>(inner.inner_ids.size());
  if (d.n_inner < config_.min_inner_markers) {
    d.verdict = Verdict::kIndeterminate;
    d.reason = IndeterminateReason::kInsufficientInnerRegion;
    return d;
  }

  std::optional<RigidFitResult> fit = fit_rigid(field, inner);
  if (!fit) {
    d.verdict = Verdict::kIndeterminate;
    d.reason = IndeterminateReason::kDegenerateConfiguration;
    return d;
  }
  d.motion = fit->motion;
  d.rms_residual = fit->rms_residual;
  d.icr_point = icr(fit->motion, config_.omega_epsilon);

  d.field = estimate_field(fit->motion, field);
  slip_field(d.field, field, pf.mask, geometry_, config_.slip_threshold_mm);
  for (const auto& s : d.field.entries)
    if (s.slipped) d.slipped_ids.push_back(s.marker_id);
  std::sort(d.slipped_ids.begin(), d.slipped_ids.end());

  if (static_cast<int>(d.slipped_ids.size()) >= config_.min_slipped_markers) {
    d.verdict = Verdict::kIncipientSlip;
    // Rebase: measure future displacement from here, so the next frames
    // show only fresh motion instead of the already-slipped offset.
    reference_ = pf;
    d.rebased = true;
  } else {
    d.verdict = Verdict::kNoSlip;
  }
  return d;
}

}  // namespace slipsense
