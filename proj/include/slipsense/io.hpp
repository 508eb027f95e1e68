#pragma once

// On-disk formats: per-frame marker tables (CSV), frame decisions (JSONL),
// and the sequence manifest that ties a recorded trial together.  Readers
// fail loudly: gaps in the frame range and malformed rows raise with the
// offending location, they are never skipped.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "slipsense/detector.hpp"
#include "slipsense/raster.hpp"
#include "slipsense/simulator.hpp"

namespace slipsense {

// Ground-truth marker states flattened to what a tracker would report.
std::vector<MarkerObservation> observations_from_ground_truth(const GroundTruthFrame& frame);

// CSV with header frame,marker,x_mm,y_mm,area_px,in_contact; one row per
// marker per frame.  Positions are written with enough digits to
// round-trip doubles exactly.
void write_marker_csv(const std::string& path,
                      const std::vector<std::vector<MarkerObservation>>& frames);
std::vector<std::vector<MarkerObservation>> read_marker_csv(const std::string& path);

// One JSON object per line, one line per frame decision.
nlohmann::json decision_to_json(const SlipDecision& d);
void write_decisions_jsonl(const std::string& path, const std::vector<SlipDecision>& decisions);
std::vector<nlohmann::json> read_jsonl(const std::string& path);

// Describes a recorded sequence directory (images and/or marker CSV).
struct SequenceManifest {
  SensorGeometry geometry;
  int frame_count = 0;
  std::uint64_t seed = 0;
  std::string object_name;
  std::string source;  // "simulator" or free-form
  bool has_images = false;
  bool has_markers = false;
};

void write_manifest(const std::string& path, const SequenceManifest& m);
SequenceManifest read_manifest(const std::string& path);

}  // namespace slipsense
