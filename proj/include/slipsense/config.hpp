#pragma once

// INI-style runtime configuration: [section] headers, key = value lines,
// '#' or ';' comments.  Typed getters fall back to built-in defaults, so a
// config file only needs the keys it overrides.

#include <map>
#include <string>

#include "slipsense/detector.hpp"
#include "slipsense/image.hpp"
#include "slipsense/raster.hpp"
#include "slipsense/simulator.hpp"

namespace slipsense {

class Config {
 public:
  Config() = default;

  static Config parse_string(const std::string& text, const std::string& origin = "<string>");
  static Config parse_file(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

  // Typed bundles assembled from the corresponding sections.
  SensorGeometry sensor_geometry() const;  // [sensor]
  DetectorConfig detector_config() const;  // [detector]
  RasterConfig raster_config() const;      // [raster]
  GelModel gel_model() const;              // [gel] and [render]

  const std::map<std::string, std::map<std::string, std::string>>& raw() const { return values_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace slipsense
