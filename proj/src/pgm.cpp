#include "slipsense/pgm.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace slipsense {
namespace {

// Skips whitespace and '#' comment lines between header tokens.
int next_header_int(std::istream& in, const std::filesystem::path& file) {
  for (;;) {
    int c = in.peek();
    if (c == EOF) throw std::runtime_error("truncated PGM header: " + file.string());
    if (std::isspace(c)) {
      in.get();
    } else if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else {
      break;
    }
  }
  int value = 0;
  in >> value;
  if (!in) throw std::runtime_error("bad PGM header token: " + file.string());
  return value;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw std::runtime_error("not a binary PGM (P5): " + file.string());
  int w = next_header_int(in, file);
  int h = next_header_int(in, file);
  int maxval = next_header_int(in, file);
  if (w <= 0 || h <= 0 || maxval != 255)
    throw std::runtime_error("unsupported PGM dimensions/maxval: " + file.string());
  in.get();  // single whitespace after maxval
  GrayImage img(w, h);
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
    throw std::runtime_error("truncated PGM payload: " + file.string());
  return img;
}

void write_pgm(const std::filesystem::path& file, const GrayImage& img) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw std::runtime_error("short write: " + file.string());
}

std::string frame_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06d.pgm", index);
  return buf;
}

std::vector<int> scan_frame_sequence(const std::filesystem::path& dir) {
  std::vector<int> indices;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    int idx = -1;
    if (std::sscanf(name.c_str(), "frame_%d.pgm", &idx) == 1 && idx >= 0)
      indices.push_back(idx);
  }
  std::sort(indices.begin(), indices.end());
  if (indices.empty()) throw std::runtime_error("no frame_*.pgm files in " + dir.string());
  std::ostringstream missing;
  int expect = indices.front();
  for (int idx : indices) {
    for (; expect < idx; ++expect) missing << " " << expect;
    expect = idx + 1;
  }
  if (!missing.str().empty())
    throw std::runtime_error("frame sequence in " + dir.string() +
                             " has gaps, missing indices:" + missing.str());
  return indices;
}

}  // namespace slipsense
