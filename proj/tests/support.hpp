#pragma once

#include "tnav/terrain_map.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace tnav::test {

inline PointCloud lattice_plate(double x0, double y0, double x1, double y1, double spacing,
                                double z = 0.0) {
  PointCloud c;
  const int nx = static_cast<int>(std::lround((x1 - x0) / spacing));
  const int ny = static_cast<int>(std::lround((y1 - y0) / spacing));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) c.points.emplace_back(x0 + i * spacing, y0 + j * spacing, z);
  }
  return c;
}

/// Fresh scratch directory under the build tree's temp area.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("tnav_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::filesystem::path source_dir() { return TNAV_SOURCE_DIR; }

}  // namespace tnav::test
