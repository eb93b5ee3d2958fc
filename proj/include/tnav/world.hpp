#pragma once

#include "tnav/assessor.hpp"
#include "tnav/terrain_map.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

namespace tnav {

struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // wrapped to (-pi, pi]

  Vec2 position() const { return {x, y}; }
};

/// Ground-truth world for closed-loop runs: the cloud, its voxel map, the
/// simulated robot and a sim clock. Obstacle sensing reads the ground truth.
class SimWorld {
 public:
  SimWorld(PointCloud cloud, double res, const AssessmentConfig& assess_cfg,
           double sensing_radius, double tau_max_accept);

  SimWorld(const SimWorld&) = delete;
  SimWorld& operator=(const SimWorld&) = delete;

  const PointCloud& cloud() const { return cloud_; }
  const GridMap3D& map() const { return *map_; }
  const NeighborhoodIndex& index() const { return *index_; }
  TerrainContext context() const { return {*map_, *index_, assess_cfg_}; }

  RobotState robot;
  double clock = 0.0;

  double sensing_radius() const { return sensing_radius_; }
  double tau_max_accept() const { return tau_max_accept_; }

  /// Column centers within `radius` (capped at the sensing radius) of `at`
  /// whose surface is missing or scores at or above tau_max_accept.
  std::vector<Vec2> sense_obstacles(const Vec2& at, double radius);

  /// Adds zero-mean Gaussian jitter with std dev `sigma` to every sensed
  /// obstacle position. Off (sigma 0) by default.
  void set_sensing_noise(double sigma, std::uint64_t seed);

  /// Whether the column under p is void or inadmissible.
  bool column_blocked(const Vec2& p);

 private:
  PointCloud cloud_;
  std::unique_ptr<GridMap3D> map_;
  std::unique_ptr<NeighborhoodIndex> index_;
  AssessmentConfig assess_cfg_;
  double sensing_radius_;
  double tau_max_accept_;
  std::unique_ptr<LazyAssessor> columns_;
  double noise_sigma_ = 0.0;
  std::mt19937_64 noise_rng_;
};

}  // namespace tnav
