#pragma once

// Exact Euclidean distance transforms and disk morphology on binary masks.
//
// The squared EDT uses the two-pass lower-envelope algorithm (one 1-D
// transform per row, then per column), which is exact and O(pixels).  Disk
// dilation/erosion are expressed as distance thresholds, so structuring
// elements are true Euclidean disks at any radius.

#include <vector>

#include "slipsense/image.hpp"

namespace slipsense {

// Squared distance, in px^2, from every pixel to the nearest set pixel of
// the mask.  Pixels of the mask itself get 0.  An empty mask yields "inf"
// (a value larger than any achievable squared distance).
std::vector<float> squared_distance_to(const ContactMask& mask);

// Bounding box of the set pixels widened by pad px and clipped to the
// frame; an empty mask gives w == h == 0.  Morphology crops to this box:
// with pad >= radius + 1 every pixel a disk operation can touch, and every
// nearest set/unset pixel within the radius, lies inside the box.
struct MaskBox {
  int x0 = 0, y0 = 0, w = 0, h = 0;
};
MaskBox mask_bbox(const ContactMask& mask, int pad);
ContactMask crop_mask(const ContactMask& mask, const MaskBox& box);

// All pixels within `radius` px of a set pixel.
ContactMask dilate_disk(const ContactMask& mask, double radius);

// All set pixels farther than `radius` px from any unset pixel.
ContactMask erode_disk(const ContactMask& mask, double radius);

inline ContactMask close_disk(const ContactMask& mask, double radius) {
  return erode_disk(dilate_disk(mask, radius), radius);
}

}  // namespace slipsense
