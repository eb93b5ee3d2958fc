#include "tnav/sim.hpp"

#include <algorithm>
#include <cmath>

namespace tnav {

SimWorld::SimWorld(PointCloud cloud, double res, const AssessmentConfig& assess_cfg,
                   double sensing_radius, double tau_max_accept)
    : cloud_(std::move(cloud)),
      assess_cfg_(assess_cfg),
      sensing_radius_(sensing_radius),
      tau_max_accept_(tau_max_accept) {
  map_ = std::make_unique<GridMap3D>(voxelize(cloud_, res));
  index_ = std::make_unique<NeighborhoodIndex>(cloud_, std::max(assess_cfg.side / 2, 0.05));
  columns_ = std::make_unique<LazyAssessor>(context());
}

bool SimWorld::column_blocked(const Vec2& p) {
  if (!map_->contains_xy(p)) return true;
  const Eigen::Vector2i c = map_->column_of(p);
  const auto tau = columns_->column_tau(c.x(), c.y());
  return !tau || *tau >= tau_max_accept_;
}

std::vector<Vec2> SimWorld::sense_obstacles(const Vec2& at, double radius) {
  const double r = std::min(radius, sensing_radius_);
  const double res = map_->res();
  const auto& d = map_->dims();
  // The one-voxel padding ring around the cloud is bookkeeping, not terrain.
  const int lo = 1;
  const int hix = d.x() - 2;
  const int hiy = d.y() - 2;
  const Eigen::Vector2i c0 = ((at - map_->xy_min()) / res).array().floor().cast<int>();
  const int span = static_cast<int>(std::ceil(r / res)) + 1;

  auto blocked = [&](int ix, int iy) {
    const auto tau = columns_->column_tau(ix, iy);
    return !tau || *tau >= tau_max_accept_;
  };
  auto inside = [&](int ix, int iy) { return ix >= lo && iy >= lo && ix <= hix && iy <= hiy; };

  std::vector<Vec2> out;
  for (int iy = std::max(lo, c0.y() - span); iy <= std::min(hiy, c0.y() + span); ++iy) {
    for (int ix = std::max(lo, c0.x() - span); ix <= std::min(hix, c0.x() + span); ++ix) {
      const Vec2 center = map_->xy_min() + res * Vec2(ix + 0.5, iy + 0.5);
      if ((center - at).norm() > r) continue;
      if (!blocked(ix, iy)) continue;
      // Interior cells of a blocked region never set the clearance; keep the
      // boundary only.
      const bool boundary = (inside(ix - 1, iy) && !blocked(ix - 1, iy)) ||
                            (inside(ix + 1, iy) && !blocked(ix + 1, iy)) ||
                            (inside(ix, iy - 1) && !blocked(ix, iy - 1)) ||
                            (inside(ix, iy + 1) && !blocked(ix, iy + 1));
      if (boundary) out.push_back(center);
    }
  }
  if (noise_sigma_ > 0) {
    std::normal_distribution<double> jitter(0.0, noise_sigma_);
    for (auto& o : out) o += Vec2(jitter(noise_rng_), jitter(noise_rng_));
  }
  return out;
}

void SimWorld::set_sensing_noise(double sigma, std::uint64_t seed) {
  noise_sigma_ = sigma;
  noise_rng_.seed(seed);
}

SparsePath remaining_path(const SparsePath& path, const Vec2& at) {
  SparsePath out;
  if (path.nodes.empty()) return out;
  std::size_t closest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    const double d = (xy(path.nodes[i].position()) - at).squaredNorm();
    if (d < best) {
      best = d;
      closest = i;
    }
  }
  out.nodes.assign(path.nodes.begin() + static_cast<std::ptrdiff_t>(closest) + 1, path.nodes.end());
  return out;
}

RunReport run_episode(SimWorld& world, const Vec2& start, const Vec2& goal, const AppConfig& cfg) {
  RunReport rep;
  const Vec2 dir = goal - start;
  world.robot = {start.x(), start.y(), std::atan2(dir.y(), dir.x())};
  world.clock = 0.0;
  world.set_sensing_noise(cfg.sim.sensing_noise, cfg.seed);

  NmpcController controller(cfg.nmpc);
  const TerrainContext ctx = world.context();
  std::optional<SparsePath> previous;
  std::optional<DensePath> dense;
  int plan_failures = 0;
  std::string last_error = "no path found";
  const int steps_per_cycle =
      std::max(1, static_cast<int>(std::lround(cfg.sim.replan_interval / cfg.nmpc.dt)));

  for (int cycle = 0; cycle < cfg.sim.max_cycles; ++cycle) {
    if ((world.robot.position() - goal).norm() <= cfg.sim.goal_tolerance) {
      rep.success = true;
      break;
    }
    ++rep.cycles;

    PlannerConfig pc = cfg.planner;
    pc.seed = cfg.seed * 1000003ULL + static_cast<std::uint64_t>(cycle);
    const int iterations = cycle == 0 || cfg.sim.replan_iterations == 0
                               ? pc.max_iterations
                               : cfg.sim.replan_iterations;
    try {
      LazyAssessor assessor(ctx);
      Planner planner(ctx, assessor, pc, world.robot.position(), goal);
      if (previous) replan_heuristic(planner, remaining_path(*previous, world.robot.position()));
      planner.run(iterations);
      PlanResult result = planner.result();
      rep.search_seconds += result.stats.search_seconds;
      if (result.path && result.path->nodes.size() >= 2) {
        dense = densify(*result.path, result.tree, cfg.gpr, pc.seed);
        previous = result.path;
        plan_failures = 0;
        controller.reset();
        rep.last_dense = dense;
      } else {
        ++plan_failures;
        last_error = "no path found";
      }
      rep.last_plan = std::move(result);
    } catch (const PlanningError& e) {
      ++plan_failures;
      last_error = e.what();
    }

    if (plan_failures >= cfg.sim.max_plan_failures) {
      rep.status = "planning failed: " + last_error;
      break;
    }
    if (!dense) continue;

    const LoopResult lr = control_loop(*dense, world, controller, steps_per_cycle, rep.log);
    rep.min_clearance = std::min(rep.min_clearance, lr.min_clearance);
    if (lr.status == LoopStatus::Infeasible) {
      rep.status = "tracking infeasible";
      break;
    }
  }
  if (!rep.success && rep.status.empty()) {
    if ((world.robot.position() - goal).norm() <= cfg.sim.goal_tolerance) {
      rep.success = true;
    } else {
      rep.status = "cycle limit reached";
    }
  }
  if (rep.success) rep.status = "success";

  Vec2 prev = start;
  for (const auto& row : rep.log.rows) {
    rep.path_length += (Vec2(row.x, row.y) - prev).norm();
    prev = {row.x, row.y};
  }
  rep.path_length += (world.robot.position() - prev).norm();
  rep.elapsed = world.clock;
  return rep;
}

}  // namespace tnav
