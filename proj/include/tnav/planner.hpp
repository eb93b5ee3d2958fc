#pragma once

#include "tnav/assessor.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace tnav {

/// Start or goal cannot host an admissible node.
class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlannerConfig {
  double step = 0.35;              // 2D steer length (m)
  double neighbor_radius = 0.49;   // 3D rewiring radius (m)
  double goal_region_radius = 0.3; // 2D (m)
  int max_iterations = 2000;
  double omega = 0.2;              // traversability penalty scale
  double tau_max_accept = 0.8;     // nodes with tau at or above this are rejected
  std::uint64_t seed = 1;
  int goal_bias_period = 50;       // every n-th iteration samples the goal itself

  /// Lengths are checked against the plane side l_s so consecutive nodes
  /// stay closer than l_s / 2.
  void validate(double plane_side) const;
};

struct PlaneNode {
  LocalPlane plane;
  TraversabilityScore score;
  std::optional<int> parent;
  double cost_from_root = 0.0;
  std::vector<int> children;

  const Vec3& position() const { return plane.center; }
  double tau() const { return score.tau; }
};

struct SparsePath {
  std::vector<PlaneNode> nodes;
  double cost = 0.0;

  /// 3D polyline length.
  double length() const;
};

struct SamplingTree {
  std::vector<PlaneNode> nodes;
  int root = 0;
  std::vector<int> goal_region;
  std::optional<SparsePath> best_path;
};

struct CostSample {
  int iteration = 0;
  double seconds = 0.0;
  double cost = 0.0;
};

struct PlanStats {
  int iterations = 0;
  std::optional<int> first_solution_iteration;
  std::optional<double> first_solution_seconds;
  double search_seconds = 0.0;
  std::uint64_t plane_fits = 0;
  std::vector<CostSample> cost_trace;  // one entry per best-cost improvement
};

struct PlanResult {
  std::optional<SparsePath> path;
  SamplingTree tree;
  PlanStats stats;
};

/// Edge cost: (1 + omega (1/(1-ta) + 1/(1-tb) - 2)) * length.
/// Returns +inf when either tau reaches 1.
double edge_cost(double tau_a, double tau_b, double length, double omega);
double edge_cost(const PlaneNode& a, const PlaneNode& b, double omega);

/// Uniform sample in the ellipse with foci start/goal and major axis c_best.
Vec2 sample_ellipsoid(const Vec2& start, const Vec2& goal, double c_best, std::mt19937_64& rng);

/// One planning query: owns its tree and random stream. Not thread-safe;
/// run separate instances concurrently against the same TerrainContext.
class Planner {
 public:
  /// Throws PlanningError when start or goal cannot be admitted.
  Planner(const TerrainContext& ctx, TerrainAssessor& assessor, const PlannerConfig& cfg,
          const Vec2& start, const Vec2& goal);

  /// Re-inserts the previous path's nodes (re-fit and re-assessed) ahead of
  /// random sampling. Inadmissible nodes are skipped.
  void seed_with(const SparsePath& previous);

  /// Runs `iterations` sampling iterations.
  void run(int iterations);

  /// Re-orients path frames toward the next node and snapshots the result.
  PlanResult result() const;

  const SamplingTree& tree() const { return tree_; }
  std::optional<double> best_cost() const;
  const PlanStats& stats() const { return stats_; }

  /// Walks parent links checking acyclicity and cost consistency.
  bool check_consistency(double tol = 1e-9) const;

 private:
  bool insert(const Vec2& target, const Vec2& from_xy, const Vec3& hint_from);
  bool edge_free(const Vec3& a, const Vec3& b);
  std::vector<int> neighbors(const Vec3& p) const;
  int nearest(const Vec2& p) const;
  void reparent(int child, int new_parent, double new_cost);
  void update_best();
  Vec2 sample();
  double elapsed() const;
  SparsePath extract(int goal_node) const;

  TerrainContext ctx_;
  TerrainAssessor& assessor_;
  PlannerConfig cfg_;
  Vec2 start_;
  Vec2 goal_;
  std::mt19937_64 rng_;
  SamplingTree tree_;
  std::vector<Vec2> xy_;  // node positions projected, parallel to tree_.nodes
  std::optional<int> best_goal_;
  double best_cost_ = std::numeric_limits<double>::infinity();
  double best_length_ = 0.0;
  PlanStats stats_;
  double seconds_ = 0.0;
  std::int64_t t0_ns_ = 0;
};

/// Lazy-assessment planning on a map and its source cloud.
PlanResult plan(const GridMap3D& map, const PointCloud& cloud, const Vec2& start,
                const Vec2& goal, const PlannerConfig& cfg, const AssessmentConfig& assess_cfg);

/// Seeds `planner` from a previous path; an empty path leaves it unchanged.
void replan_heuristic(Planner& planner, const SparsePath& previous_path);

}  // namespace tnav
