#include "tnav/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace tnav {

void PlannerConfig::validate(double plane_side) const {
  const std::string p = "planner.";
  if (!(step > 0)) throw ConfigError(p + "step", "must be > 0");
  if (!(step < plane_side / 2)) throw ConfigError(p + "step", "must be < assessment.side / 2");
  if (!(neighbor_radius > 0)) throw ConfigError(p + "neighbor_radius", "must be > 0");
  if (!(neighbor_radius < plane_side / 2)) {
    throw ConfigError(p + "neighbor_radius", "must be < assessment.side / 2");
  }
  if (!(neighbor_radius >= step)) throw ConfigError(p + "neighbor_radius", "must be >= step");
  if (!(goal_region_radius > 0)) throw ConfigError(p + "goal_region_radius", "must be > 0");
  if (max_iterations < 0) throw ConfigError(p + "max_iterations", "must be >= 0");
  if (!(omega >= 0)) throw ConfigError(p + "omega", "must be >= 0");
  if (!(tau_max_accept > 0 && tau_max_accept <= 1)) {
    throw ConfigError(p + "tau_max_accept", "must be in (0, 1]");
  }
  if (goal_bias_period < 0) throw ConfigError(p + "goal_bias_period", "must be >= 0");
}

double SparsePath::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    len += (nodes[i].position() - nodes[i - 1].position()).norm();
  }
  return len;
}

double edge_cost(double tau_a, double tau_b, double length, double omega) {
  if (tau_a >= 1.0 || tau_b >= 1.0) return std::numeric_limits<double>::infinity();
  return (1.0 + omega * (1.0 / (1.0 - tau_a) + 1.0 / (1.0 - tau_b) - 2.0)) * length;
}

double edge_cost(const PlaneNode& a, const PlaneNode& b, double omega) {
  return edge_cost(a.tau(), b.tau(), (a.position() - b.position()).norm(), omega);
}

Vec2 sample_ellipsoid(const Vec2& start, const Vec2& goal, double c_best, std::mt19937_64& rng) {
  const double c_min = (goal - start).norm();
  c_best = std::max(c_best, c_min);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = std::sqrt(unit(rng));
  const double phi = 2.0 * std::numbers::pi * unit(rng);
  const double a = c_best / 2.0;
  const double b = std::sqrt(std::max(0.0, c_best * c_best - c_min * c_min)) / 2.0;
  const Vec2 local(a * r * std::cos(phi), b * r * std::sin(phi));
  const Vec2 axis = c_min > 0 ? Vec2((goal - start) / c_min) : Vec2::UnitX();
  const Vec2 perp(-axis.y(), axis.x());
  return 0.5 * (start + goal) + local.x() * axis + local.y() * perp;
}

// ---------------------------------------------------------------------------

namespace {

std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

Vec3 lift(const Vec2& v) { return {v.x(), v.y(), 0.0}; }

}  // namespace

Planner::Planner(const TerrainContext& ctx, TerrainAssessor& assessor, const PlannerConfig& cfg,
                 const Vec2& start, const Vec2& goal)
    : ctx_(ctx), assessor_(assessor), cfg_(cfg), start_(start), goal_(goal), rng_(cfg.seed) {
  t0_ns_ = now_ns();
  auto admit = [&](const Vec2& p, const Vec2& toward, const char* what) {
    std::optional<SurfacePoint> sp;
    try {
      sp = project_to_surface(ctx_.map, p);
    } catch (const TerrainError& e) {
      throw PlanningError(std::string(what) + " outside map: " + e.what());
    }
    if (!sp) throw PlanningError(std::string(what) + " has no terrain surface");
    Vec3 hint = lift(toward - p);
    if (hint.norm() < 1e-9) hint = Vec3::UnitX();
    auto ev = assessor_.evaluate(*sp, hint);
    if (!ev) throw PlanningError(std::string(what) + " plane fit failed");
    if (ev->score.tau >= cfg_.tau_max_accept) {
      throw PlanningError(std::string(what) + " is not traversable (tau = " +
                          std::to_string(ev->score.tau) + ")");
    }
    return *ev;
  };
  auto root = admit(start, goal, "start");
  admit(goal, start, "goal");

  PlaneNode node;
  node.plane = std::move(root.plane);
  node.score = root.score;
  tree_.nodes.push_back(std::move(node));
  tree_.root = 0;
  xy_.push_back(xy(tree_.nodes[0].position()));
  if ((xy_[0] - goal_).norm() <= cfg_.goal_region_radius) {
    tree_.goal_region.push_back(0);
    update_best();
  }
  seconds_ = elapsed();
}

double Planner::elapsed() const { return static_cast<double>(now_ns() - t0_ns_) * 1e-9; }

std::optional<double> Planner::best_cost() const {
  if (!best_goal_) return std::nullopt;
  return best_cost_;
}

int Planner::nearest(const Vec2& p) const {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xy_.size(); ++i) {
    const double d = (xy_[i] - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

std::vector<int> Planner::neighbors(const Vec3& p) const {
  std::vector<int> out;
  const double r2 = cfg_.neighbor_radius * cfg_.neighbor_radius;
  const double r = cfg_.neighbor_radius;
  for (std::size_t i = 0; i < xy_.size(); ++i) {
    if (std::abs(xy_[i].x() - p.x()) > r || std::abs(xy_[i].y() - p.y()) > r) continue;
    if ((tree_.nodes[i].position() - p).squaredNorm() <= r2) out.push_back(static_cast<int>(i));
  }
  return out;
}

bool Planner::edge_free(const Vec3& a, const Vec3& b) {
  const double res = ctx_.map.res();
  const double len = (xy(b) - xy(a)).norm();
  const int n = static_cast<int>(std::ceil(len / res));
  for (int i = 1; i < n; ++i) {
    const double t = static_cast<double>(i) / n;
    const Vec3 p = a + t * (b - a);
    if (!ctx_.map.contains_xy(xy(p))) return false;
    const Eigen::Vector2i col = ctx_.map.column_of(xy(p));
    const auto surface = column_surface_center(ctx_.map, col.x(), col.y());
    if (!surface) return false;
    // The surface under the segment must stay with the endpoints; a jump
    // means the segment spans two separate layers.
    if (std::abs(surface->z() - p.z()) > ctx_.cfg.side / 2) return false;
    const auto tau = assessor_.column_tau(col.x(), col.y());
    if (!tau || *tau >= cfg_.tau_max_accept) return false;
  }
  return true;
}

void Planner::reparent(int child, int new_parent, double new_cost) {
  auto& nodes = tree_.nodes;
  if (const auto old = nodes[child].parent) {
    std::erase(nodes[*old].children, child);
  }
  nodes[child].parent = new_parent;
  nodes[new_parent].children.push_back(child);
  const double delta = new_cost - nodes[child].cost_from_root;
  std::vector<int> stack{child};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    nodes[id].cost_from_root += delta;
    for (int c : nodes[id].children) stack.push_back(c);
  }
}

void Planner::update_best() {
  std::optional<int> best;
  double cost = std::numeric_limits<double>::infinity();
  for (int id : tree_.goal_region) {
    if (tree_.nodes[id].cost_from_root < cost) {
      cost = tree_.nodes[id].cost_from_root;
      best = id;
    }
  }
  if (!best) return;
  if (best_goal_ && cost >= best_cost_) {
    best_goal_ = best;
    return;
  }
  best_goal_ = best;
  best_cost_ = cost;
  double len = (xy(tree_.nodes[*best].position()) - goal_).norm();
  for (int id = *best; tree_.nodes[id].parent; id = *tree_.nodes[id].parent) {
    len += (tree_.nodes[id].position() - tree_.nodes[*tree_.nodes[id].parent].position()).norm();
  }
  best_length_ = len;
  const double t = elapsed();
  if (!stats_.first_solution_iteration) {
    stats_.first_solution_iteration = stats_.iterations;
    stats_.first_solution_seconds = t;
  }
  stats_.cost_trace.push_back({stats_.iterations, t, cost});
}

Vec2 Planner::sample() {
  if (cfg_.goal_bias_period > 0 && stats_.iterations % cfg_.goal_bias_period == 0) return goal_;
  const Vec2 lo = ctx_.map.xy_min();
  const Vec2 hi = ctx_.map.xy_max();
  if (best_goal_) {
    for (int attempt = 0; attempt < 32; ++attempt) {
      const Vec2 s = sample_ellipsoid(start_, goal_, best_length_, rng_);
      if (ctx_.map.contains_xy(s)) return s;
    }
  }
  std::uniform_real_distribution<double> ux(lo.x(), hi.x());
  std::uniform_real_distribution<double> uy(lo.y(), hi.y());
  const double x = ux(rng_);
  return {x, uy(rng_)};
}

bool Planner::insert(const Vec2& target, const Vec2& from_xy, const Vec3& hint_from) {
  if ((target - from_xy).norm() < 1e-9) return false;
  if (!ctx_.map.contains_xy(target)) return false;
  const auto sp = project_to_surface(ctx_.map, target);
  if (!sp) return false;
  Vec3 hint = sp->position - hint_from;
  if (hint.norm() < 1e-9) hint = Vec3::UnitX();
  auto ev = assessor_.evaluate(*sp, hint);
  if (!ev || ev->score.tau >= cfg_.tau_max_accept) return false;

  PlaneNode node;
  node.plane = std::move(ev->plane);
  node.score = ev->score;
  const Vec3 pos = node.position();
  const auto near = neighbors(pos);
  if (near.empty()) return false;

  std::vector<std::pair<double, int>> candidates;
  candidates.reserve(near.size());
  for (int id : near) {
    const auto& nb = tree_.nodes[id];
    candidates.emplace_back(nb.cost_from_root + edge_cost(nb, node, cfg_.omega), id);
  }
  std::sort(candidates.begin(), candidates.end());
  std::optional<int> parent;
  double cost = 0.0;
  for (const auto& [c, id] : candidates) {
    if (!std::isfinite(c)) break;
    if (edge_free(tree_.nodes[id].position(), pos)) {
      parent = id;
      cost = c;
      break;
    }
  }
  if (!parent) return false;

  const int new_id = static_cast<int>(tree_.nodes.size());
  node.parent = *parent;
  node.cost_from_root = cost;
  tree_.nodes.push_back(std::move(node));
  tree_.nodes[*parent].children.push_back(new_id);
  xy_.push_back(xy(pos));

  for (int id : near) {
    if (id == *parent) continue;
    const double c =
        tree_.nodes[new_id].cost_from_root + edge_cost(tree_.nodes[new_id], tree_.nodes[id], cfg_.omega);
    if (c < tree_.nodes[id].cost_from_root - 1e-12 && edge_free(pos, tree_.nodes[id].position())) {
      reparent(id, new_id, c);
    }
  }

  if ((xy(pos) - goal_).norm() <= cfg_.goal_region_radius) tree_.goal_region.push_back(new_id);
  update_best();
  return true;
}

void Planner::seed_with(const SparsePath& previous) {
  for (const auto& node : previous.nodes) {
    const Vec2 target = xy(node.position());
    const int near = nearest(target);
    insert(target, xy_[near], tree_.nodes[near].position());
  }
  seconds_ = elapsed();
  stats_.search_seconds = seconds_;
}

void Planner::run(int iterations) {
  for (int i = 0; i < iterations; ++i) {
    ++stats_.iterations;
    const Vec2 x_rand = sample();
    const int near = nearest(x_rand);
    const Vec2 from = xy_[near];
    const Vec2 d = x_rand - from;
    const double len = d.norm();
    if (len < 1e-9) continue;
    const Vec2 x_new = len <= cfg_.step ? x_rand : Vec2(from + d * (cfg_.step / len));
    insert(x_new, from, tree_.nodes[near].position());
  }
  seconds_ = elapsed();
  stats_.search_seconds = seconds_;
}

SparsePath Planner::extract(int goal_node) const {
  SparsePath path;
  for (std::optional<int> id = goal_node; id; id = tree_.nodes[*id].parent) {
    path.nodes.push_back(tree_.nodes[*id]);
  }
  std::reverse(path.nodes.begin(), path.nodes.end());
  for (auto& n : path.nodes) n.children.clear();
  path.cost = tree_.nodes[goal_node].cost_from_root;
  const std::size_t m = path.nodes.size();
  for (std::size_t i = 0; i < m; ++i) {
    Vec3 q = i + 1 < m ? Vec3(path.nodes[i + 1].position() - path.nodes[i].position())
                       : (m > 1 ? Vec3(path.nodes[i].position() - path.nodes[i - 1].position())
                                : Vec3(lift(goal_ - xy(path.nodes[i].position()))));
    path.nodes[i].plane.rotation = frame_from_normal(path.nodes[i].plane.normal(), q);
  }
  return path;
}

PlanResult Planner::result() const {
  PlanResult r;
  r.tree = tree_;
  if (best_goal_) {
    r.path = extract(*best_goal_);
    r.tree.best_path = r.path;
  }
  r.stats = stats_;
  r.stats.search_seconds = seconds_;
  r.stats.plane_fits = assessor_.plane_fits();
  return r;
}

bool Planner::check_consistency(double tol) const {
  const auto& nodes = tree_.nodes;
  const std::size_t n = nodes.size();
  if (nodes[tree_.root].parent) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<int>(i) == tree_.root) continue;
    const auto& node = nodes[i];
    if (!node.parent) return false;
    const auto& par = nodes[*node.parent];
    if (std::count(par.children.begin(), par.children.end(), static_cast<int>(i)) != 1) return false;
    const double expect = par.cost_from_root + edge_cost(par, node, cfg_.omega);
    if (std::abs(expect - node.cost_from_root) > tol * std::max(1.0, expect)) return false;
    std::size_t steps = 0;
    for (std::optional<int> id = static_cast<int>(i); id; id = nodes[*id].parent) {
      if (++steps > n) return false;
    }
  }
  return true;
}

PlanResult plan(const GridMap3D& map, const PointCloud& cloud, const Vec2& start,
                const Vec2& goal, const PlannerConfig& cfg, const AssessmentConfig& assess_cfg) {
  const NeighborhoodIndex index(cloud, std::max(assess_cfg.side / 2, 0.05));
  const TerrainContext ctx{map, index, assess_cfg};
  LazyAssessor assessor(ctx);
  Planner planner(ctx, assessor, cfg, start, goal);
  planner.run(cfg.max_iterations);
  return planner.result();
}

void replan_heuristic(Planner& planner, const SparsePath& previous_path) {
  planner.seed_with(previous_path);
}

}  // namespace tnav
