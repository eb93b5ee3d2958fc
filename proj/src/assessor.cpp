#include "tnav/assessor.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace tnav {

Mat3 frame_from_normal(const Vec3& normal, const Vec3& hint) {
  const Vec3 n = normal.normalized();
  auto project = [&](const Vec3& q) -> std::optional<Vec3> {
    const Vec3 v = q - q.dot(n) * n;
    const double len = v.norm();
    if (len <= 1e-9 * std::max(1.0, q.norm())) return std::nullopt;
    return v / len;
  };
  auto ex = project(hint);
  if (!ex) ex = project(Vec3::UnitX());
  if (!ex) ex = project(Vec3::UnitY());
  Mat3 r;
  r.col(0) = *ex;
  r.col(1) = n.cross(*ex);
  r.col(2) = n;
  return r;
}

std::optional<NodeEvaluation> evaluate_at(const TerrainContext& ctx, const Vec3& center,
                                          const Vec3& hint, std::vector<Vec3>& scratch) {
  ctx.index.query(center, ctx.cfg.side, scratch);
  auto plane = fit_plane(scratch, center, hint, ctx.cfg);
  if (!plane) return std::nullopt;
  NodeEvaluation ev;
  ev.score = assess(*plane, ctx.cfg);
  plane->support.clear();
  plane->support.shrink_to_fit();
  ev.plane = std::move(*plane);
  return ev;
}

std::optional<Vec3> column_surface_center(const GridMap3D& map, int ix, int iy) {
  const auto level = surface_level(map, ix, iy);
  if (!level) return std::nullopt;
  const Vec3 c = map.grid_to_world({ix, iy, *level});
  return Vec3(c.x(), c.y(), map.z_lower() + *level * map.res());
}

// ---------------------------------------------------------------------------

LazyAssessor::LazyAssessor(const TerrainContext& ctx) : ctx_(ctx) {
  const auto& d = ctx.map.dims();
  column_cache_.assign(static_cast<std::size_t>(d.x()) * d.y(),
                       std::numeric_limits<float>::quiet_NaN());
}

std::optional<NodeEvaluation> LazyAssessor::evaluate(const SurfacePoint& sp, const Vec3& hint) {
  ++fits_;
  return evaluate_at(ctx_, sp.position, hint, scratch_);
}

std::optional<double> LazyAssessor::column_tau(int ix, int iy) {
  const auto& d = ctx_.map.dims();
  if (ix < 0 || iy < 0 || ix >= d.x() || iy >= d.y()) return std::nullopt;
  float& slot = column_cache_[static_cast<std::size_t>(iy) * d.x() + ix];
  if (std::isnan(slot)) {
    slot = std::numeric_limits<float>::infinity();
    if (const auto c = column_surface_center(ctx_.map, ix, iy)) {
      ++fits_;
      if (const auto ev = evaluate_at(ctx_, *c, Vec3::UnitX(), scratch_)) {
        slot = static_cast<float>(ev->score.tau);
      }
    }
  }
  if (std::isinf(slot)) return std::nullopt;
  return static_cast<double>(slot);
}

// ---------------------------------------------------------------------------

PrecomputedAssessor::PrecomputedAssessor(const TerrainContext& ctx) : ctx_(ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& d = ctx.map.dims();
  cells_.resize(static_cast<std::size_t>(d.x()) * d.y());
  std::vector<Vec3> scratch;
  for (int iy = 0; iy < d.y(); ++iy) {
    for (int ix = 0; ix < d.x(); ++ix) {
      const auto c = column_surface_center(ctx.map, ix, iy);
      if (!c) continue;
      ++fits_;
      const auto ev = evaluate_at(ctx, *c, Vec3::UnitX(), scratch);
      if (!ev) continue;
      Cell& cell = cells_[static_cast<std::size_t>(iy) * d.x() + ix];
      cell.valid = true;
      cell.normal = ev->plane.normal();
      cell.score = ev->score;
    }
  }
  analysis_seconds_ =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::optional<NodeEvaluation> PrecomputedAssessor::evaluate(const SurfacePoint& sp,
                                                            const Vec3& hint) {
  const auto& d = ctx_.map.dims();
  const Cell& cell = cells_[static_cast<std::size_t>(sp.voxel.y()) * d.x() + sp.voxel.x()];
  if (!cell.valid) return std::nullopt;
  NodeEvaluation ev;
  ev.plane.center = sp.position;
  ev.plane.rotation = frame_from_normal(cell.normal, hint);
  ev.plane.side = ctx_.cfg.side;
  ev.score = cell.score;
  return ev;
}

std::optional<double> PrecomputedAssessor::column_tau(int ix, int iy) {
  const auto& d = ctx_.map.dims();
  if (ix < 0 || iy < 0 || ix >= d.x() || iy >= d.y()) return std::nullopt;
  const Cell& cell = cells_[static_cast<std::size_t>(iy) * d.x() + ix];
  if (!cell.valid) return std::nullopt;
  return cell.score.tau;
}

}  // namespace tnav
