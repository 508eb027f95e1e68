#include "slipsense/raster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slipsense/distance_transform.hpp"

namespace slipsense {
namespace {

// 8-connected flood fill over a predicate; collects the component's pixel
// indices.  Iterative with an explicit stack; expects labels[seed] == 0.
template <typename Keep>
void flood(int w, int h, int seed, std::vector<int>& labels, int label,
           std::vector<int>& stack, std::vector<int>& pixels, Keep keep) {
  pixels.clear();
  stack.clear();
  stack.push_back(seed);
  labels[seed] = label;
  while (!stack.empty()) {
    int p = stack.back();
    stack.pop_back();
    pixels.push_back(p);
    int x = p % w, y = p / w;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        int nx = x + dx, ny = y + dy;
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        int np = ny * w + nx;
        if (labels[np] == 0 && keep(np)) {
          labels[np] = label;
          stack.push_back(np);
        }
      }
    }
  }
}

}  // namespace

ContactMask edge_map(const GrayImage& img, int low_thresh, int high_thresh) {
  if (!(0 <= low_thresh && low_thresh < high_thresh && high_thresh <= 255))
    throw std::invalid_argument("edge_map: need 0 <= low < high <= 255");
  const int w = img.width, h = img.height;
  ContactMask edges(w, h);
  if (w < 3 || h < 3) return edges;

  // Gradient magnitude normalized so a clean step of D gray levels measures
  // about D.  Magnitudes are kept squared (Sobel scale 4, so a threshold T
  // compares against (4*T)^2), which preserves every ordering the float
  // square root would give at integer thresholds.
  std::vector<std::int16_t> gxv(static_cast<std::size_t>(w) * h, 0);
  std::vector<std::int16_t> gyv(static_cast<std::size_t>(w) * h, 0);
  std::vector<std::int32_t> mag(static_cast<std::size_t>(w) * h, 0);

  for (int y = 1; y < h - 1; ++y) {
    const std::uint8_t* r0 = &img.data[static_cast<std::size_t>(y - 1) * w];
    const std::uint8_t* r1 = &img.data[static_cast<std::size_t>(y) * w];
    const std::uint8_t* r2 = &img.data[static_cast<std::size_t>(y + 1) * w];
    for (int x = 1; x < w - 1; ++x) {
      int gx = (r0[x + 1] + 2 * r1[x + 1] + r2[x + 1]) - (r0[x - 1] + 2 * r1[x - 1] + r2[x - 1]);
      int gy = (r2[x - 1] + 2 * r2[x] + r2[x + 1]) - (r0[x - 1] + 2 * r0[x] + r0[x + 1]);
      std::size_t i = static_cast<std::size_t>(y) * w + x;
      gxv[i] = static_cast<std::int16_t>(gx);
      gyv[i] = static_cast<std::int16_t>(gy);
      mag[i] = gx * gx + gy * gy;
    }
  }

  // Non-maximum suppression along the quantized gradient direction, then
  // hysteresis: strong pixels seed, weak pixels join by 8-connectivity.
  const std::int32_t low = 16 * low_thresh * low_thresh;
  const std::int32_t high = 16 * high_thresh * high_thresh;
  ContactMask weak(w, h);
  std::vector<int> stack, pixels;
  std::vector<int> labels(static_cast<std::size_t>(w) * h, 0);
  std::vector<int> seeds;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      std::size_t i = static_cast<std::size_t>(y) * w + x;
      std::int32_t m = mag[i];
      if (m < low) continue;
      float ax = std::abs(static_cast<float>(gxv[i]));
      float ay = std::abs(static_cast<float>(gyv[i]));
      int dx, dy;
      // Four sectors: horizontal, vertical, and the two diagonals.
      if (ax >= 2.414f * ay) {
        dx = 1; dy = 0;
      } else if (ay >= 2.414f * ax) {
        dx = 0; dy = 1;
      } else if ((gxv[i] > 0) == (gyv[i] > 0)) {
        dx = 1; dy = 1;
      } else {
        dx = 1; dy = -1;
      }
      std::int32_t m1 = mag[static_cast<std::size_t>(y + dy) * w + (x + dx)];
      std::int32_t m2 = mag[static_cast<std::size_t>(y - dy) * w + (x - dx)];
      if (m < m1 || m < m2) continue;
      weak.at(x, y) = 1;
      if (m >= high) seeds.push_back(static_cast<int>(i));
    }
  }
  for (int seed : seeds) {
    if (labels[seed]) continue;
    flood(w, h, seed, labels, 1, stack, pixels, [&](int p) { return weak.bits[p] != 0; });
    for (int p : pixels) edges.bits[p] = 1;
  }
  return edges;
}

ContactMask contact_mask(const ContactMask& edges, double close_radius_px,
                         int min_component_px, int max_fill_hole_px) {
  ContactMask full = close_disk(edges, close_radius_px);
  ContactMask out(full.width, full.height);

  // Work inside the closed mask's padded bounding box: the one-pixel empty
  // ring makes the crop border equivalent to the image border for the
  // hole-fill connectivity test.
  const MaskBox box = mask_bbox(full, 1);
  if (box.w == 0) return out;
  ContactMask closed = crop_mask(full, box);
  const int w = closed.width, h = closed.height;

  // Fill interior voids no larger than max_fill_hole_px: flood the
  // complement; a component that never touches the border is a hole.
  std::vector<int> labels(static_cast<std::size_t>(w) * h, 0);
  std::vector<int> stack, pixels;
  int next = 1;
  for (int p = 0; p < w * h; ++p) {
    if (closed.bits[p] || labels[p]) continue;
    flood(w, h, p, labels, next++, stack, pixels, [&](int q) { return !closed.bits[q]; });
    bool touches_border = false;
    for (int q : pixels) {
      int x = q % w, y = q / w;
      if (x == 0 || x == w - 1 || y == 0 || y == h - 1) {
        touches_border = true;
        break;
      }
    }
    if (!touches_border && static_cast<int>(pixels.size()) <= max_fill_hole_px)
      for (int q : pixels) closed.bits[q] = 1;
  }

  // Drop components below the area gate.
  std::fill(labels.begin(), labels.end(), 0);
  for (int p = 0; p < w * h; ++p) {
    if (!closed.bits[p] || labels[p]) continue;
    flood(w, h, p, labels, next++, stack, pixels, [&](int q) { return closed.bits[q] != 0; });
    if (static_cast<int>(pixels.size()) >= min_component_px)
      for (int q : pixels)
        out.bits[static_cast<std::size_t>(box.y0 + q / w) * out.width + box.x0 + q % w] = 1;
  }
  return out;
}

std::vector<MarkerObservation> detect_markers(const GrayImage& img, const SensorGeometry& geom,
                                              int dark_thresh, int min_area_px, int max_area_px) {
  if (min_area_px >= max_area_px)
    throw std::invalid_argument("detect_markers: need min_area < max_area");
  const int w = img.width, h = img.height;
  std::vector<int> labels(static_cast<std::size_t>(w) * h, 0);
  std::vector<int> stack, pixels;
  std::vector<MarkerObservation> out;
  int next = 1;
  for (int p = 0; p < w * h; ++p) {
    if (labels[p] || img.data[p] >= dark_thresh) continue;
    flood(w, h, p, labels, next++, stack, pixels,
          [&](int q) { return img.data[q] < dark_thresh; });
    int area = static_cast<int>(pixels.size());
    if (area < min_area_px || area > max_area_px) continue;
    // Darkness-weighted centroid: deeper-than-threshold pixels pull harder,
    // which recovers sub-pixel position from the anti-aliased rim.
    double wsum = 0, cx = 0, cy = 0;
    for (int q : pixels) {
      double wgt = dark_thresh - img.data[q];
      wsum += wgt;
      cx += wgt * (q % w);
      cy += wgt * (q / w);
    }
    MarkerObservation obs;
    obs.position_mm = geom.px_to_mm({cx / wsum, cy / wsum});
    obs.area_px = area;
    out.push_back(obs);
  }
  return out;
}

void mask_membership(std::vector<MarkerObservation>& markers, const ContactMask& mask,
                     const SensorGeometry& geom) {
  for (auto& m : markers) {
    Vec2 px = geom.mm_to_px(m.position_mm);
    int x = std::clamp(static_cast<int>(std::lround(px.x())), 0, mask.width - 1);
    int y = std::clamp(static_cast<int>(std::lround(px.y())), 0, mask.height - 1);
    m.in_contact = mask.at(x, y) != 0;
  }
}

}  // namespace slipsense
