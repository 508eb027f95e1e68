#include "slipsense/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace slipsense {
namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t cut = line.find(sep, start);
    if (cut == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, cut - start));
    start = cut + 1;
  }
}

double parse_double(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": not a number: '" + s + "'");
  }
  if (used != s.size()) throw std::runtime_error(where + ": trailing junk in '" + s + "'");
  return v;
}

long parse_long(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  long v;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": not an integer: '" + s + "'");
  }
  if (used != s.size()) throw std::runtime_error(where + ": trailing junk in '" + s + "'");
  return v;
}

}  // namespace

std::vector<MarkerObservation> observations_from_ground_truth(const GroundTruthFrame& frame) {
  std::vector<MarkerObservation> out;
  out.reserve(frame.positions.size());
  for (std::size_t i = 0; i < frame.positions.size(); ++i) {
    MarkerObservation m;
    m.position_mm = frame.positions[i];
    m.area_px = 0;
    m.in_contact = frame.states[i] != MarkerState::kOutOfContact;
    out.push_back(m);
  }
  return out;
}

void write_marker_csv(const std::string& path,
                      const std::vector<std::vector<MarkerObservation>>& frames) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "frame,marker,x_mm,y_mm,area_px,in_contact\n";
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (std::size_t i = 0; i < frames[f].size(); ++i) {
      const MarkerObservation& m = frames[f][i];
      out << f << ',' << i << ',' << fmt_double(m.position_mm.x()) << ','
          << fmt_double(m.position_mm.y()) << ',' << m.area_px << ',' << (m.in_contact ? 1 : 0)
          << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::vector<MarkerObservation>> read_marker_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  // tolerate a UTF-8 BOM and trailing CR
  if (line.size() >= 3 && line.compare(0, 3, "\xef\xbb\xbf") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "frame,marker,x_mm,y_mm,area_px,in_contact")
    throw std::runtime_error(path + ":1: unexpected header '" + line + "'");

  std::vector<std::vector<MarkerObservation>> frames;
  long max_frame = -1;
  std::vector<bool> seen;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    auto cols = split(line, ',');
    if (cols.size() != 6)
      throw std::runtime_error(where + ": expected 6 columns, got " +
                               std::to_string(cols.size()));
    long f = parse_long(cols[0], where);
    if (f < 0) throw std::runtime_error(where + ": negative frame index");
    MarkerObservation m;
    m.position_mm = {parse_double(cols[2], where), parse_double(cols[3], where)};
    m.area_px = static_cast<int>(parse_long(cols[4], where));
    long flag = parse_long(cols[5], where);
    if (flag != 0 && flag != 1)
      throw std::runtime_error(where + ": in_contact must be 0 or 1");
    m.in_contact = flag == 1;
    if (f >= static_cast<long>(frames.size())) {
      frames.resize(f + 1);
      seen.resize(f + 1, false);
    }
    frames[f].push_back(m);
    seen[f] = true;
    max_frame = std::max(max_frame, f);
  }
  std::string missing;
  for (long f = 0; f <= max_frame; ++f)
    if (!seen[f]) missing += (missing.empty() ? "" : ", ") + std::to_string(f);
  if (!missing.empty())
    throw std::runtime_error(path + ": missing frames in sequence: " + missing);
  return frames;
}

nlohmann::json decision_to_json(const SlipDecision& d) {
  nlohmann::json j;
  j["frame"] = d.frame;
  j["verdict"] = to_string(d.verdict);
  if (d.verdict == Verdict::kIndeterminate) j["reason"] = to_string(d.reason);
  j["n_contact"] = d.n_contact;
  j["n_inner"] = d.n_inner;
  j["rms_residual_mm"] = d.rms_residual;
  j["slipped_ids"] = d.slipped_ids;
  j["rebased"] = d.rebased;
  if (d.motion) {
    j["motion"] = {{"ref_x_mm", d.motion->ref_point.x()},
                   {"ref_y_mm", d.motion->ref_point.y()},
                   {"vx_mm", d.motion->linear_velocity.x()},
                   {"vy_mm", d.motion->linear_velocity.y()},
                   {"omega_rad", d.motion->angular_velocity}};
  } else {
    j["motion"] = nullptr;
  }
  if (d.icr_point)
    j["icr"] = {{"x_mm", d.icr_point->x()}, {"y_mm", d.icr_point->y()}};
  else
    j["icr"] = nullptr;
  return j;
}

void write_decisions_jsonl(const std::string& path, const std::vector<SlipDecision>& decisions) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const SlipDecision& d : decisions) out << decision_to_json(d).dump() << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<nlohmann::json> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_manifest(const std::string& path, const SequenceManifest& m) {
  nlohmann::json j;
  j["geometry"] = {{"width_px", m.geometry.width_px},
                   {"height_px", m.geometry.height_px},
                   {"width_mm", m.geometry.width_mm},
                   {"height_mm", m.geometry.height_mm}};
  j["frame_count"] = m.frame_count;
  j["seed"] = m.seed;
  j["object_name"] = m.object_name;
  j["source"] = m.source;
  j["has_images"] = m.has_images;
  j["has_markers"] = m.has_markers;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

SequenceManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  SequenceManifest m;
  const auto& g = j.at("geometry");
  m.geometry.width_px = g.at("width_px").get<int>();
  m.geometry.height_px = g.at("height_px").get<int>();
  m.geometry.width_mm = g.at("width_mm").get<double>();
  m.geometry.height_mm = g.at("height_mm").get<double>();
  if (!m.geometry.valid()) throw std::runtime_error(path + ": invalid sensor geometry");
  m.frame_count = j.at("frame_count").get<int>();
  m.seed = j.value("seed", std::uint64_t{0});
  m.object_name = j.value("object_name", std::string{});
  m.source = j.value("source", std::string{});
  m.has_images = j.value("has_images", false);
  m.has_markers = j.value("has_markers", false);
  return m;
}

}  // namespace slipsense
