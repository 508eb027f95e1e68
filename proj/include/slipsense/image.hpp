#pragma once

// Raster containers and the pixel <-> millimetre mapping of the sensor.

#include <cstdint>
#include <vector>

#include "slipsense/geometry.hpp"

namespace slipsense {

// 8-bit grayscale image, row-major, origin at the top-left pixel.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

// Binary mask over the same pixel grid (1 = set).
struct ContactMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  ContactMask() = default;
  ContactMask(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

  int area_px() const {
    int n = 0;
    for (std::uint8_t b : bits) n += (b != 0);
    return n;
  }
};

// Maps the camera pixel grid onto the sensing surface.  The physical frame
// has its origin at the bottom-left corner of the imaged area, x to the
// right and y up; pixel row 0 is the top of the image, so the y axis flips.
// The centre of pixel (col,row) sits at ((col+.5)*sx, height_mm-(row+.5)*sy).
struct SensorGeometry {
  int width_px = 640;
  int height_px = 480;
  double width_mm = 40.0;
  double height_mm = 30.0;

  double sx() const { return width_mm / width_px; }    // mm per pixel, x
  double sy() const { return height_mm / height_px; }  // mm per pixel, y

  Vec2 px_to_mm(const Vec2& px) const {
    return {(px.x() + 0.5) * sx(), height_mm - (px.y() + 0.5) * sy()};
  }
  Vec2 mm_to_px(const Vec2& mm) const {
    return {mm.x() / sx() - 0.5, (height_mm - mm.y()) / sy() - 0.5};
  }

  // Pixel pitch must be close to square; anisotropy beyond 20% means the
  // geometry block is inconsistent with the optics this library assumes.
  bool valid() const {
    if (width_px <= 0 || height_px <= 0 || width_mm <= 0 || height_mm <= 0) return false;
    double r = sx() / sy();
    return r > 0.8 && r < 1.25;
  }

  bool operator==(const SensorGeometry&) const = default;
};

}  // namespace slipsense
