#pragma once

// Binary PGM (P5, maxval 255) image I/O and numbered frame sequences.

#include <filesystem>
#include <string>
#include <vector>

#include "slipsense/image.hpp"

namespace slipsense {

GrayImage read_pgm(const std::filesystem::path& file);
void write_pgm(const std::filesystem::path& file, const GrayImage& img);

// Zero-padded frame file name inside a sequence directory: frame_000042.pgm
std::string frame_file_name(int index);

// Sorted frame indices present in a directory.  Throws if the numbering has
// gaps, listing the missing indices.
std::vector<int> scan_frame_sequence(const std::filesystem::path& dir);

}  // namespace slipsense
