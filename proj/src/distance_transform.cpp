#include "slipsense/distance_transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace slipsense {
namespace {

constexpr float kInf = std::numeric_limits<float>::max() / 4;

// 1-D squared distance transform (lower envelope of parabolas).
// f is the input cost per cell, d the output; v/z are scratch of size n(+1).
void dt1d(const float* f, float* d, int* v, float* z, int n) {
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    float s;
    for (;;) {
      int p = v[k];
      s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0f * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    float dq = static_cast<float>(q - v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<float> squared_distance_to(const ContactMask& mask) {
  const int w = mask.width, h = mask.height;
  std::vector<float> dist(static_cast<std::size_t>(w) * h);

  // Row pass: the input is binary, so the 1-D distance to the nearest set
  // pixel comes from two linear sweeps; the parabola envelope is only
  // needed for the column pass, whose input is no longer binary.
  const int far = w + h;
  std::vector<int> rowd(w);
  for (int y = 0; y < h; ++y) {
    const auto* bits = mask.bits.data() + static_cast<std::size_t>(y) * w;
    float* out = dist.data() + static_cast<std::size_t>(y) * w;
    int d = far;
    for (int x = 0; x < w; ++x) {
      d = bits[x] ? 0 : (d < far ? d + 1 : far);
      rowd[x] = d;
    }
    d = far;
    for (int x = w - 1; x >= 0; --x) {
      d = bits[x] ? 0 : (d < far ? d + 1 : far);
      const int m = std::min(rowd[x], d);
      out[x] = m >= far ? kInf : static_cast<float>(m) * static_cast<float>(m);
    }
  }

  const int n = std::max(w, h);
  std::vector<float> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int x = 0; x < w; ++x) {  // columns
    for (int y = 0; y < h; ++y) f[y] = dist[static_cast<std::size_t>(y) * w + x];
    dt1d(f.data(), d.data(), v.data(), z.data(), h);
    for (int y = 0; y < h; ++y) dist[static_cast<std::size_t>(y) * w + x] = d[y];
  }
  return dist;
}

MaskBox mask_bbox(const ContactMask& mask, int pad) {
  const int w = mask.width, h = mask.height;
  int minx = w, miny = h, maxx = -1, maxy = -1;
  for (int y = 0; y < h; ++y) {
    const auto* row = mask.bits.data() + static_cast<std::size_t>(y) * w;
    int x0 = 0;
    while (x0 < w && !row[x0]) ++x0;
    if (x0 == w) continue;
    int x1 = w - 1;
    while (!row[x1]) --x1;
    minx = std::min(minx, x0);
    maxx = std::max(maxx, x1);
    if (y < miny) miny = y;
    maxy = y;
  }
  if (maxx < 0) return {};
  minx = std::max(0, minx - pad);
  miny = std::max(0, miny - pad);
  maxx = std::min(w - 1, maxx + pad);
  maxy = std::min(h - 1, maxy + pad);
  return {minx, miny, maxx - minx + 1, maxy - miny + 1};
}

ContactMask crop_mask(const ContactMask& mask, const MaskBox& box) {
  ContactMask out(box.w, box.h);
  for (int y = 0; y < box.h; ++y)
    std::copy_n(mask.bits.data() + static_cast<std::size_t>(box.y0 + y) * mask.width + box.x0,
                box.w, out.bits.data() + static_cast<std::size_t>(y) * box.w);
  return out;
}

ContactMask dilate_disk(const ContactMask& mask, double radius) {
  ContactMask out(mask.width, mask.height);
  const MaskBox box = mask_bbox(mask, static_cast<int>(std::ceil(radius)) + 1);
  if (box.w == 0) return out;  // empty dilates to empty
  std::vector<float> d2 = squared_distance_to(crop_mask(mask, box));
  const float r2 = static_cast<float>(radius * radius);
  for (int y = 0; y < box.h; ++y) {
    const float* src = d2.data() + static_cast<std::size_t>(y) * box.w;
    auto* dst = out.bits.data() + static_cast<std::size_t>(box.y0 + y) * mask.width + box.x0;
    for (int x = 0; x < box.w; ++x) dst[x] = src[x] <= r2;
  }
  return out;
}

ContactMask erode_disk(const ContactMask& mask, double radius) {
  ContactMask out(mask.width, mask.height);
  const MaskBox box = mask_bbox(mask, static_cast<int>(std::ceil(radius)) + 1);
  if (box.w == 0) return out;
  // Every set pixel's nearest unset pixel is adjacent to the mask boundary,
  // so it lies inside the padded box and the cropped transform is exact.
  ContactMask sub = crop_mask(mask, box);
  ContactMask inv(box.w, box.h);
  for (std::size_t i = 0; i < inv.bits.size(); ++i) inv.bits[i] = !sub.bits[i];
  std::vector<float> d2 = squared_distance_to(inv);
  const float r2 = static_cast<float>(radius * radius);
  for (int y = 0; y < box.h; ++y) {
    const std::size_t ro = static_cast<std::size_t>(y) * box.w;
    auto* dst = out.bits.data() + static_cast<std::size_t>(box.y0 + y) * mask.width + box.x0;
    for (int x = 0; x < box.w; ++x) dst[x] = sub.bits[ro + x] && d2[ro + x] > r2;
  }
  return out;
}

}  // namespace slipsense
