#include "tnav/terrain_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

namespace tnav {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

Vec3 parse_xyz_line(const std::string& line, const std::filesystem::path& path,
                    std::size_t line_no) {
  std::istringstream in(line);
  std::vector<std::string> tokens;
  for (std::string tok; in >> tok;) tokens.push_back(tok);
  auto fail = [&](const std::string& why) {
    return TerrainError(path.string() + ":" + std::to_string(line_no) + ": " + why);
  };
  if (tokens.size() != 3) {
    throw fail("expected 3 fields, got " + std::to_string(tokens.size()));
  }
  Vec3 p;
  for (int i = 0; i < 3; ++i) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tokens[i], &used);
    } catch (const std::exception&) {
      throw fail("not a number: '" + tokens[i] + "'");
    }
    if (used != tokens[i].size()) throw fail("not a number: '" + tokens[i] + "'");
    if (!std::isfinite(v)) throw fail("non-finite coordinate");
    p[i] = v;
  }
  return p;
}

PointCloud load_xyz(const std::filesystem::path& path, std::istream& in) {
  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    cloud.points.push_back(parse_xyz_line(line, path, line_no));
  }
  return cloud;
}

PointCloud load_pcd(const std::filesystem::path& path, std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> declared;
  bool fields_ok = false;
  bool data_seen = false;
  auto fail = [&](const std::string& why) {
    return TerrainError(path.string() + ":" + std::to_string(line_no) + ": " + why);
  };
  while (!data_seen && std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream hs(line);
    std::string key;
    hs >> key;
    key = lower(key);
    if (key == "fields") {
      std::vector<std::string> names;
      for (std::string n; hs >> n;) names.push_back(lower(n));
      if (names != std::vector<std::string>{"x", "y", "z"}) {
        throw fail("only 'FIELDS x y z' is supported");
      }
      fields_ok = true;
    } else if (key == "points") {
      std::size_t n = 0;
      if (!(hs >> n)) throw fail("malformed POINTS");
      declared = n;
    } else if (key == "data") {
      std::string kind;
      hs >> kind;
      if (lower(kind) != "ascii") {
        throw fail("unsupported PCD DATA '" + kind + "' (only ascii is supported)");
      }
      data_seen = true;
    }
    // VERSION, SIZE, TYPE, COUNT, WIDTH, HEIGHT, VIEWPOINT are not needed.
  }
  if (!fields_ok) throw TerrainError(path.string() + ": missing FIELDS x y z");
  if (!data_seen) throw TerrainError(path.string() + ": missing DATA line");

  PointCloud cloud;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    cloud.points.push_back(parse_xyz_line(line, path, line_no));
  }
  if (declared && *declared != cloud.size()) {
    throw TerrainError(path.string() + ": POINTS declares " + std::to_string(*declared) +
                       " but " + std::to_string(cloud.size()) + " were read");
  }
  return cloud;
}

}  // namespace

CloudFormat format_from_path(const std::filesystem::path& path) {
  return lower(path.extension().string()) == ".pcd" ? CloudFormat::PcdAscii
                                                    : CloudFormat::XyzAscii;
}

PointCloud load_point_cloud(const std::filesystem::path& path, CloudFormat format) {
  std::ifstream in(path);
  if (!in) throw TerrainError(path.string() + ": cannot open file");
  PointCloud cloud = format == CloudFormat::PcdAscii ? load_pcd(path, in) : load_xyz(path, in);
  if (cloud.empty()) throw TerrainError(path.string() + ": point cloud is empty");
  return cloud;
}

PointCloud load_point_cloud(const std::filesystem::path& path) {
  return load_point_cloud(path, format_from_path(path));
}

namespace {

void write_points(std::FILE* f, const PointCloud& cloud) {
  for (const auto& p : cloud.points) {
    std::fprintf(f, "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
  }
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

std::unique_ptr<std::FILE, FileCloser> open_for_write(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "w"));
  if (!f) throw TerrainError(path.string() + ": cannot open for writing");
  return f;
}

}  // namespace

void write_xyz(const PointCloud& cloud, const std::filesystem::path& path) {
  auto f = open_for_write(path);
  write_points(f.get(), cloud);
}

void write_pcd(const PointCloud& cloud, const std::filesystem::path& path) {
  auto f = open_for_write(path);
  std::fprintf(f.get(),
               "# .PCD v0.7 - Point Cloud Data file format\n"
               "VERSION 0.7\nFIELDS x y z\nSIZE 8 8 8\nTYPE F F F\nCOUNT 1 1 1\n"
               "WIDTH %zu\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS %zu\nDATA ascii\n",
               cloud.size(), cloud.size());
  write_points(f.get(), cloud);
}

// ---------------------------------------------------------------------------

GridMap3D::GridMap3D(const Vec3& origin, double res, const Vec3i& dims,
                     std::span<const Vec3i> occupied)
    : origin_(origin), res_(res), dims_(dims) {
  if (!(res > 0.0) || !std::isfinite(res)) throw TerrainError("grid resolution must be > 0");
  if ((dims.array() <= 0).any()) throw TerrainError("grid dims must be positive");
  cells_.assign(static_cast<std::size_t>(dims.x()) * dims.y() * dims.z(), 0);
  for (const auto& v : occupied) {
    if (!in_bounds(v)) throw TerrainError("occupied voxel outside grid dims");
    cells_[linear(v)] = 1;
  }
}

bool GridMap3D::contains_xy(const Vec2& p) const {
  const Vec2 lo = xy_min();
  const Vec2 hi = xy_max();
  return p.x() >= lo.x() && p.y() >= lo.y() && p.x() < hi.x() && p.y() < hi.y();
}

bool GridMap3D::in_bounds(const Vec3i& v) const {
  return (v.array() >= 0).all() && (v.array() < dims_.array()).all();
}

bool GridMap3D::occupied(const Vec3i& v) const {
  return in_bounds(v) && cells_[linear(v)] != 0;
}

Vec3i GridMap3D::world_to_grid(const Vec3& p) const {
  return ((p - origin_) / res_).array().floor().cast<int>();
}

Vec3 GridMap3D::grid_to_world(const Vec3i& v) const {
  return origin_ + res_ * (v.cast<double>().array() + 0.5).matrix();
}

std::size_t GridMap3D::occupied_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1));
}

Eigen::Vector2i GridMap3D::column_of(const Vec2& p) const {
  return ((p - xy_min()) / res_).array().floor().cast<int>();
}

GridMap3D voxelize(const PointCloud& cloud, double res) {
  if (!(res > 0.0) || !std::isfinite(res)) throw TerrainError("voxel resolution must be > 0");
  if (cloud.empty()) throw TerrainError("cannot voxelize an empty cloud");
  Vec3 lo = cloud.points.front();
  Vec3 hi = lo;
  for (const auto& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  // Origin snapped to the global res lattice, at least one voxel below the
  // data. Voxel faces then sit at integer multiples of res, so voxel centers
  // re-voxelize onto themselves.
  const Vec3 origin = ((lo / res).array().floor() - 1.0) * res;
  const Vec3i dims = ((hi - origin) / res).array().floor().cast<int>() + 2;

  std::vector<Vec3i> occ;
  occ.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    Vec3i v = ((p - origin) / res).array().floor().cast<int>();
    // Points exactly on the upper AABB face can land one past the last
    // padded index through rounding; clamp them back in.
    v = v.cwiseMax(Vec3i::Zero()).cwiseMin(dims - Vec3i::Ones());
    occ.push_back(v);
  }
  return GridMap3D(origin, res, dims, occ);
}

std::optional<int> surface_level(const GridMap3D& map, int ix, int iy) {
  const int nz = map.dims().z();
  // The free voxel must lie inside the map: a column occupied up to the top
  // layer counts as fully occupied.
  for (int k = 0; k + 1 < nz; ++k) {
    if (map.occupied({ix, iy, k}) && !map.occupied({ix, iy, k + 1})) return k;
  }
  return std::nullopt;
}

std::optional<SurfacePoint> project_to_surface(const GridMap3D& map, const Vec2& p) {
  if (!map.contains_xy(p)) {
    throw TerrainError("projection point (" + std::to_string(p.x()) + ", " +
                       std::to_string(p.y()) + ") outside map bounds");
  }
  const Eigen::Vector2i col = map.column_of(p);
  const auto level = surface_level(map, col.x(), col.y());
  if (!level) return std::nullopt;
  SurfacePoint sp;
  sp.voxel = Vec3i(col.x(), col.y(), *level);
  sp.position = Vec3(p.x(), p.y(), map.z_lower() + *level * map.res());
  return sp;
}

// ---------------------------------------------------------------------------

NeighborhoodIndex::NeighborhoodIndex(const PointCloud& cloud, double bucket)
    : bucket_(bucket) {
  if (!(bucket > 0.0)) throw TerrainError("bucket size must be > 0");
  if (cloud.empty()) {
    offsets_.assign(1, 0);
    return;
  }
  Vec2 lo = xy(cloud.points.front());
  Vec2 hi = lo;
  for (const auto& p : cloud.points) {
    lo = lo.cwiseMin(xy(p));
    hi = hi.cwiseMax(xy(p));
  }
  min_ = lo;
  nx_ = static_cast<int>(std::floor((hi.x() - lo.x()) / bucket_)) + 1;
  ny_ = static_cast<int>(std::floor((hi.y() - lo.y()) / bucket_)) + 1;
  const std::size_t nb = static_cast<std::size_t>(nx_) * ny_;

  auto bucket_of = [&](const Vec3& p) {
    const int bx = std::min(nx_ - 1, static_cast<int>((p.x() - min_.x()) / bucket_));
    const int by = std::min(ny_ - 1, static_cast<int>((p.y() - min_.y()) / bucket_));
    return static_cast<std::size_t>(by) * nx_ + bx;
  };

  offsets_.assign(nb + 1, 0);
  for (const auto& p : cloud.points) ++offsets_[bucket_of(p) + 1];
  for (std::size_t b = 0; b < nb; ++b) offsets_[b + 1] += offsets_[b];
  points_.resize(cloud.size());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& p : cloud.points) points_[cursor[bucket_of(p)]++] = p;
}

void NeighborhoodIndex::query(const Vec3& center, double side,
                              std::vector<Vec3>& out) const {
  out.clear();
  if (points_.empty()) return;
  const double h = side / 2.0;
  const int bx0 = std::max(0, static_cast<int>(std::floor((center.x() - h - min_.x()) / bucket_)));
  const int by0 = std::max(0, static_cast<int>(std::floor((center.y() - h - min_.y()) / bucket_)));
  const int bx1 = std::min(nx_ - 1, static_cast<int>(std::floor((center.x() + h - min_.x()) / bucket_)));
  const int by1 = std::min(ny_ - 1, static_cast<int>(std::floor((center.y() + h - min_.y()) / bucket_)));
  for (int by = by0; by <= by1; ++by) {
    for (int bx = bx0; bx <= bx1; ++bx) {
      const std::size_t b = static_cast<std::size_t>(by) * nx_ + bx;
      for (std::size_t i = offsets_[b]; i < offsets_[b + 1]; ++i) {
        const Vec3& p = points_[i];
        if (std::abs(p.x() - center.x()) <= h && std::abs(p.y() - center.y()) <= h &&
            std::abs(p.z() - center.z()) <= h) {
          out.push_back(p);
        }
      }
    }
  }
}

std::vector<Vec3> NeighborhoodIndex::query(const Vec3& center, double side) const {
  std::vector<Vec3> out;
  query(center, side, out);
  return out;
}

std::vector<Vec3> query_neighborhood(const PointCloud& cloud, const Vec3& center,
                                     double side) {
  if (!(side > 0.0)) throw TerrainError("neighborhood side must be > 0");
  return NeighborhoodIndex(cloud, std::max(side, 1e-3)).query(center, side);
}

}  // namespace tnav
