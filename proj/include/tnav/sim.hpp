#pragma once

#include "tnav/config.hpp"
#include "tnav/gpr.hpp"
#include "tnav/nmpc.hpp"
#include "tnav/planner.hpp"
#include "tnav/world.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tnav {

struct RunReport {
  bool success = false;
  std::string status;          // "success" or a failure reason
  double path_length = 0.0;    // distance driven (m)
  double elapsed = 0.0;        // sim time (s)
  double min_clearance = std::numeric_limits<double>::infinity();
  int cycles = 0;
  double analysis_seconds = 0.0;  // wall time; zero with lazy assessment
  double search_seconds = 0.0;    // wall time summed over cycles
  TrajectoryLog log;
  std::optional<PlanResult> last_plan;
  std::optional<DensePath> last_dense;
};

/// Plan -> densify -> track for sim.replan_interval, repeated until the
/// robot is within sim.goal_tolerance of `goal` or a failure condition hits.
/// Cycles after the first are seeded with the remaining previous path.
RunReport run_episode(SimWorld& world, const Vec2& start, const Vec2& goal, const AppConfig& cfg);

/// Remaining part of `path` after the node closest to `at`.
SparsePath remaining_path(const SparsePath& path, const Vec2& at);

}  // namespace tnav
