#include "slipsense/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace slipsense {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                 ": unterminated section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (section.empty())
        throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty section name");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                               ": expected 'key = value', got '" + line + "'");
    std::string key = lower(trim(line.substr(0, eq)));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key");
    cfg.values_[section][key] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto s = values_.find(lower(section));
  return s != values_.end() && s->second.count(lower(key)) > 0;
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
  auto s = values_.find(lower(section));
  if (s == values_.end()) return fallback;
  auto k = s->second.find(lower(key));
  return k == s->second.end() ? fallback : k->second;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key, "");
  std::size_t used = 0;
  double out;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw std::runtime_error("config [" + section + "] " + key + ": not a number: '" + v + "'");
  }
  if (used != v.size())
    throw std::runtime_error("config [" + section + "] " + key + ": trailing junk in '" + v + "'");
  return out;
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key, "");
  std::size_t used = 0;
  int out;
  try {
    out = std::stoi(v, &used);
  } catch (const std::exception&) {
    throw std::runtime_error("config [" + section + "] " + key + ": not an integer: '" + v + "'");
  }
  if (used != v.size())
    throw std::runtime_error("config [" + section + "] " + key + ": trailing junk in '" + v + "'");
  return out;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  std::string v = lower(get(section, key, ""));
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::runtime_error("config [" + section + "] " + key + ": not a boolean: '" + v + "'");
}

SensorGeometry Config::sensor_geometry() const {
  SensorGeometry g;
  g.width_px = get_int("sensor", "width_px", g.width_px);
  g.height_px = get_int("sensor", "height_px", g.height_px);
  g.width_mm = get_double("sensor", "width_mm", g.width_mm);
  g.height_mm = get_double("sensor", "height_mm", g.height_mm);
  if (!g.valid()) throw std::runtime_error("config [sensor]: invalid geometry");
  return g;
}

DetectorConfig Config::detector_config() const {
  DetectorConfig d;
  d.slip_threshold_mm = get_double("detector", "slip_threshold_mm", d.slip_threshold_mm);
  d.min_slipped_markers = get_int("detector", "min_slipped_markers", d.min_slipped_markers);
  d.min_contact_markers = get_int("detector", "min_contact_markers", d.min_contact_markers);
  d.erosion_radius_mm = get_double("detector", "erosion_radius_mm", d.erosion_radius_mm);
  d.min_inner_markers = get_int("detector", "min_inner_markers", d.min_inner_markers);
  d.max_match_radius_mm = get_double("detector", "max_match_radius_mm", d.max_match_radius_mm);
  d.omega_epsilon = get_double("detector", "omega_epsilon", d.omega_epsilon);
  if (d.slip_threshold_mm <= 0 || d.max_match_radius_mm <= 0 || d.min_slipped_markers < 1)
    throw std::runtime_error("config [detector]: out-of-range value");
  return d;
}

RasterConfig Config::raster_config() const {
  RasterConfig r;
  r.canny_low = get_int("raster", "canny_low", r.canny_low);
  r.canny_high = get_int("raster", "canny_high", r.canny_high);
  r.close_radius_px = get_double("raster", "close_radius_px", r.close_radius_px);
  r.min_component_px = get_int("raster", "min_component_px", r.min_component_px);
  r.max_fill_hole_px = get_int("raster", "max_fill_hole_px", r.max_fill_hole_px);
  r.dark_thresh = get_int("raster", "dark_thresh", r.dark_thresh);
  r.min_marker_area_px = get_int("raster", "min_marker_area_px", r.min_marker_area_px);
  r.max_marker_area_px = get_int("raster", "max_marker_area_px", r.max_marker_area_px);
  if (r.canny_low > r.canny_high)
    throw std::runtime_error("config [raster]: canny_low exceeds canny_high");
  return r;
}

GelModel Config::gel_model() const {
  GelModel m;
  m.geometry = sensor_geometry();
  m.pitch_mm = get_double("gel", "pitch_mm", m.pitch_mm);
  m.shear_stiffness = get_double("gel", "shear_stiffness", m.shear_stiffness);
  m.noise_sigma_mm = get_double("gel", "noise_sigma_mm", m.noise_sigma_mm);
  m.contact_shape_floor = get_double("gel", "contact_shape_floor", m.contact_shape_floor);
  m.render.marker_radius_mm = get_double("render", "marker_radius_mm", m.render.marker_radius_mm);
  m.render.background = get_int("render", "background", m.render.background);
  m.render.marker_intensity = get_int("render", "marker_intensity", m.render.marker_intensity);
  m.render.contrast_per_load = get_double("render", "contrast_per_load", m.render.contrast_per_load);
  m.render.camera_noise_sigma =
      get_double("render", "camera_noise_sigma", m.render.camera_noise_sigma);
  m.render.speckle_block_px = get_int("render", "speckle_block_px", m.render.speckle_block_px);
  m.render.speckle_density = get_double("render", "speckle_density", m.render.speckle_density);
  if (m.pitch_mm <= 0 || m.shear_stiffness <= 0)
    throw std::runtime_error("config [gel]: out-of-range value");
  return m;
}

}  // namespace slipsense
