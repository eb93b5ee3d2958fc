#pragma once

#include "tnav/common.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace tnav {

/// Raw terrain points in the world frame.
struct PointCloud {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

enum class CloudFormat { XyzAscii, PcdAscii };

/// Picks the format from the file extension (".pcd" -> PCD, anything else
/// -> whitespace-separated xyz).
CloudFormat format_from_path(const std::filesystem::path& path);

/// Parses a point cloud file. Throws TerrainError naming the offending line
/// on malformed input, on binary PCD, and on an empty cloud.
PointCloud load_point_cloud(const std::filesystem::path& path, CloudFormat format);
PointCloud load_point_cloud(const std::filesystem::path& path);

void write_xyz(const PointCloud& cloud, const std::filesystem::path& path);
void write_pcd(const PointCloud& cloud, const std::filesystem::path& path);

/// A terrain surface point: lattice-aligned height over a continuous (x, y).
/// The voxel holding it is occupied and the voxel above is free.
struct SurfacePoint {
  Vec3 position;
  Vec3i voxel;
};

/// Dense boolean occupancy grid. Immutable once built.
class GridMap3D {
 public:
  /// Occupancy from an explicit voxel list; indices outside dims throw.
  GridMap3D(const Vec3& origin, double res, const Vec3i& dims,
            std::span<const Vec3i> occupied);

  const Vec3& origin() const { return origin_; }
  double res() const { return res_; }
  const Vec3i& dims() const { return dims_; }
  /// Lowest representable height; surface heights are z_lower() + k * res().
  double z_lower() const { return origin_.z(); }

  Vec2 xy_min() const { return origin_.head<2>(); }
  Vec2 xy_max() const {
    return origin_.head<2>() + res_ * dims_.head<2>().cast<double>();
  }
  bool contains_xy(const Vec2& p) const;

  bool in_bounds(const Vec3i& v) const;
  /// Voxels outside the map read as free.
  bool occupied(const Vec3i& v) const;

  Vec3i world_to_grid(const Vec3& p) const;
  /// Center of voxel v.
  Vec3 grid_to_world(const Vec3i& v) const;

  std::size_t occupied_count() const;

  /// Index of the 2D column holding p; p must be inside the XY bounds.
  Eigen::Vector2i column_of(const Vec2& p) const;

 private:
  std::size_t linear(const Vec3i& v) const {
    return (static_cast<std::size_t>(v.z()) * dims_.y() + v.y()) * dims_.x() + v.x();
  }

  Vec3 origin_;
  double res_;
  Vec3i dims_;
  std::vector<std::uint8_t> cells_;
};

/// Occupies every voxel holding at least one cloud point. Bounds are the
/// cloud's bounding box grown to the res lattice plus one free voxel per side.
GridMap3D voxelize(const PointCloud& cloud, double res);

/// Lowest lattice height in the column over p whose voxel is occupied with a
/// free voxel directly above. Empty when the column has no such voxel.
/// Throws TerrainError when p lies outside the map's XY bounds.
std::optional<SurfacePoint> project_to_surface(const GridMap3D& map, const Vec2& p);

/// Same as project_to_surface but addressed by column index.
std::optional<int> surface_level(const GridMap3D& map, int ix, int iy);

/// Axis-aligned cube queries over the original cloud, bucketed in XY.
class NeighborhoodIndex {
 public:
  explicit NeighborhoodIndex(const PointCloud& cloud, double bucket = 0.5);

  /// Points with every coordinate within side/2 of center.
  std::vector<Vec3> query(const Vec3& center, double side) const;
  void query(const Vec3& center, double side, std::vector<Vec3>& out) const;

  std::size_t size() const { return points_.size(); }

 private:
  Vec2 min_;
  double bucket_;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::size_t> offsets_;  // CSR: bucket b spans [offsets_[b], offsets_[b+1])
  std::vector<Vec3> points_;
};

/// Convenience wrapper building a throwaway index.
std::vector<Vec3> query_neighborhood(const PointCloud& cloud, const Vec3& center,
                                     double side);

}  // namespace tnav
