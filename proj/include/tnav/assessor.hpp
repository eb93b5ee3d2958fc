#pragma once

#include "tnav/plane_fit.hpp"
#include "tnav/terrain_map.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace tnav {

/// Immutable inputs shared by every planning query on one map.
struct TerrainContext {
  const GridMap3D& map;
  const NeighborhoodIndex& index;
  AssessmentConfig cfg;
};

/// Fitted plane and score for one candidate node. The plane's support set is
/// released once scored.
struct NodeEvaluation {
  LocalPlane plane;
  TraversabilityScore score;
};

/// Frame with e_z = normal and e_x from `hint` projected into the plane,
/// falling back to world X then world Y when the hint is parallel to normal.
Mat3 frame_from_normal(const Vec3& normal, const Vec3& hint);

/// Fits and scores a plane at `center` from the cube neighborhood.
std::optional<NodeEvaluation> evaluate_at(const TerrainContext& ctx, const Vec3& center,
                                          const Vec3& hint, std::vector<Vec3>& scratch);

/// Source of traversability for the planner. evaluate() produces a node at a
/// surface point; column_tau() answers edge checks at column granularity.
class TerrainAssessor {
 public:
  virtual ~TerrainAssessor() = default;

  virtual std::optional<NodeEvaluation> evaluate(const SurfacePoint& sp, const Vec3& hint) = 0;
  /// Traversability of the surface cell of column (ix, iy); empty when the
  /// column has no surface or the fit fails.
  virtual std::optional<double> column_tau(int ix, int iy) = 0;

  std::uint64_t plane_fits() const { return fits_; }

 protected:
  std::uint64_t fits_ = 0;
};

/// Fits a plane at every node on demand; column scores are computed the
/// first time an edge touches them and memoized.
class LazyAssessor final : public TerrainAssessor {
 public:
  explicit LazyAssessor(const TerrainContext& ctx);

  std::optional<NodeEvaluation> evaluate(const SurfacePoint& sp, const Vec3& hint) override;
  std::optional<double> column_tau(int ix, int iy) override;

 private:
  TerrainContext ctx_;
  std::vector<float> column_cache_;  // NaN = not yet assessed, +inf = no valid plane
  std::vector<Vec3> scratch_;
};

/// Assesses every surface column up front; queries are table lookups.
class PrecomputedAssessor final : public TerrainAssessor {
 public:
  explicit PrecomputedAssessor(const TerrainContext& ctx);

  std::optional<NodeEvaluation> evaluate(const SurfacePoint& sp, const Vec3& hint) override;
  std::optional<double> column_tau(int ix, int iy) override;

  double analysis_seconds() const { return analysis_seconds_; }

 private:
  struct Cell {
    bool valid = false;
    Vec3 normal = Vec3::UnitZ();
    TraversabilityScore score;
  };

  TerrainContext ctx_;
  std::vector<Cell> cells_;
  double analysis_seconds_ = 0.0;
};

/// Column center lifted onto its surface cell, or empty for void columns.
std::optional<Vec3> column_surface_center(const GridMap3D& map, int ix, int iy);

}  // namespace tnav
