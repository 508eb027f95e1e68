#pragma once

// Contact-region and marker extraction from raw tactile camera frames.
//
// The imprint of a textured object shows up as high-contrast speckle against
// the quiet elastomer background, so the contact region is recovered from an
// edge map; the tracking dots are near-black disks recovered by thresholding.

#include <cstdint>
#include <vector>

#include "slipsense/image.hpp"

namespace slipsense {

// A localized tracking dot.  `id` is assigned by the tracker (0 while
// unassigned); raster detection reports id 0.
struct MarkerObservation {
  int id = 0;
  Vec2 position_mm{0, 0};
  int area_px = 0;
  bool in_contact = false;
};

struct RasterConfig {
  // Dual hysteresis thresholds on the normalized gradient magnitude
  // (a step of D gray levels produces a magnitude of about D).
  int canny_low = 40;
  int canny_high = 100;
  // Disk radius for morphological closing of the edge map, px.
  double close_radius_px = 7.0;
  // Connected components smaller than this are discarded from the mask, px.
  int min_component_px = 400;
  // Interior voids up to this size are treated as texture dropouts and
  // filled; larger voids are genuine non-contact (e.g. a ring imprint).
  int max_fill_hole_px = 1500;
  // Pixels darker than this belong to marker dots.
  int dark_thresh = 45;
  // Acceptable marker blob area, px.
  int min_marker_area_px = 30;
  int max_marker_area_px = 400;
};

// Binary edge image: Sobel 3x3 gradient, 4-direction non-maximum
// suppression, dual-threshold hysteresis.  Border pixels are never edges.
ContactMask edge_map(const GrayImage& img, int low_thresh, int high_thresh);

// Contact region from an edge map: disk closing, bounded hole filling, and
// removal of small components.
ContactMask contact_mask(const ContactMask& edges, double close_radius_px,
                         int min_component_px, int max_fill_hole_px = 1500);

// Dark-blob marker detection: binarize below dark_thresh, 8-connected
// components, area gate, darkness-weighted centroid, px->mm conversion.
std::vector<MarkerObservation> detect_markers(const GrayImage& img, const SensorGeometry& geom,
                                              int dark_thresh, int min_area_px, int max_area_px);

// Sets in_contact on each observation from the mask bit under its position.
void mask_membership(std::vector<MarkerObservation>& markers, const ContactMask& mask,
                     const SensorGeometry& geom);

}  // namespace slipsense
