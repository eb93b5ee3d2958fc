#include "oracles.hpp"
#include "support.hpp"

#include "tnav/planner.hpp"

#include <doctest.h>

#include <algorithm>

using namespace tnav;

namespace {

struct Scene {
  PointCloud cloud;
  GridMap3D map;
  NeighborhoodIndex index;
  AssessmentConfig cfg;

  explicit Scene(PointCloud c, double res = 0.1)
      : cloud(std::move(c)), map(voxelize(cloud, res)), index(cloud, 0.5) {}

  TerrainContext ctx() const { return {map, index, cfg}; }
};

PointCloud plate(double w, double h) { return test::lattice_plate(0, 0, w, h, 0.05); }

PointCloud two_plates_with_gap() {
  PointCloud c = test::lattice_plate(0, 0, 5, 5, 0.05);
  const PointCloud island = test::lattice_plate(8, 0, 10, 5, 0.05);
  c.points.insert(c.points.end(), island.points.begin(), island.points.end());
  return c;
}

PlannerConfig config(std::uint64_t seed, double omega = 0.2) {
  PlannerConfig p;
  p.seed = seed;
  p.omega = omega;
  return p;
}

}  // namespace

TEST_CASE("edge cost values") {
  CHECK(edge_cost(0.0, 0.0, 2.5, 0.2) == 2.5);
  CHECK(edge_cost(0.5, 0.5, 1.0, 0.2) == doctest::Approx(1.4));
  CHECK(edge_cost(0.7, 0.3, 1.7, 0.0) == 1.7);
  CHECK(std::isinf(edge_cost(1.0, 0.0, 1.0, 0.2)));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 0.999);
  for (int i = 0; i < 1000; ++i) {
    const double l = 3 * u(rng);
    CHECK(edge_cost(u(rng), u(rng), l, u(rng)) >= l);
  }
}

TEST_CASE("ellipse sampling") {
  const Vec2 s(1, 2), g(6, 4);
  const double c_min = (g - s).norm();
  std::mt19937_64 rng(9);

  SUBCASE("degenerate ellipse collapses onto the segment") {
    for (int i = 0; i < 100; ++i) {
      const Vec2 p = sample_ellipsoid(s, g, c_min, rng);
      const double off = std::abs((p - s).x() * (g - s).y() - (p - s).y() * (g - s).x()) / c_min;
      CHECK(off < 1e-9);
      CHECK((p - s).norm() + (p - g).norm() <= c_min + 1e-9);
    }
  }
  SUBCASE("samples stay inside") {
    const double c = 1.4 * c_min;
    for (int i = 0; i < 10000; ++i) {
      const Vec2 p = sample_ellipsoid(s, g, c, rng);
      CHECK((p - s).norm() + (p - g).norm() <= c + 1e-9);
    }
  }
  SUBCASE("uniform over equal-area bins") {
    // Map samples back to the unit disk and bin into 8 rings x 8 sectors of
    // equal area; uniform in the ellipse means uniform in the disk.
    const double c = 1.3 * c_min;
    const double a = c / 2, b = std::sqrt(c * c - c_min * c_min) / 2;
    const Vec2 axis = (g - s) / c_min, perp(-axis.y(), axis.x()), mid = (s + g) / 2;
    constexpr int kRings = 8, kSectors = 8, kSamples = 64000;
    std::vector<int> counts(kRings * kSectors, 0);
    for (int i = 0; i < kSamples; ++i) {
      const Vec2 d = sample_ellipsoid(s, g, c, rng) - mid;
      const double u = d.dot(axis) / a, v = d.dot(perp) / b;
      const double r2 = std::min(u * u + v * v, 1.0 - 1e-12);
      const int ring = static_cast<int>(r2 * kRings);
      double ang = std::atan2(v, u);
      if (ang < 0) ang += 2 * std::numbers::pi;
      const int sector = std::min(kSectors - 1, static_cast<int>(ang / (2 * std::numbers::pi) * kSectors));
      ++counts[ring * kSectors + sector];
    }
    const double expect = static_cast<double>(kSamples) / counts.size();
    double chi2 = 0;
    for (int n : counts) chi2 += (n - expect) * (n - expect) / expect;
    CHECK(oracle::chi_square_p(chi2, static_cast<int>(counts.size()) - 1) > 0.01);
  }
}

TEST_CASE("chi-square helper sanity") {
  // Median of chi2 with 2 dof is 2 ln 2.
  CHECK(oracle::chi_square_p(2 * std::log(2.0), 2) == doctest::Approx(0.5));
  CHECK(oracle::chi_square_p(63, 63) == doctest::Approx(0.4765).epsilon(0.01));
}

TEST_CASE("flat plate plan is near the straight line") {
  const Scene scene(plate(10, 10));
  const auto r = plan(scene.map, scene.cloud, {1, 1}, {9, 9}, config(3), scene.cfg);
  REQUIRE(r.path);
  const double d = std::sqrt(128.0);
  CHECK(std::abs(r.path->cost - d) <= 0.1 * d);
  CHECK(xy(r.path->nodes.front().position()).isApprox(Vec2(1, 1), 0.1));
  CHECK((xy(r.path->nodes.back().position()) - Vec2(9, 9)).norm() <= 0.3 + 1e-9);
  for (std::size_t i = 1; i < r.path->nodes.size(); ++i) {
    CHECK((r.path->nodes[i].position() - r.path->nodes[i - 1].position()).norm() < 0.5);
  }
  for (std::size_t i = 0; i + 1 < r.path->nodes.size(); ++i) {
    const auto& n = r.path->nodes[i];
    const Vec3 dir = (r.path->nodes[i + 1].position() - n.position()).normalized();
    CHECK(n.plane.e_x().dot(dir) == doctest::Approx(1.0));
  }
}

TEST_CASE("zero iterations leaves only the root") {
  const Scene scene(plate(10, 10));
  PlannerConfig cfg = config(1);
  cfg.max_iterations = 0;
  const auto r = plan(scene.map, scene.cloud, {1, 1}, {9, 9}, cfg, scene.cfg);
  CHECK_FALSE(r.path);
  CHECK(r.tree.nodes.size() == 1);
}

TEST_CASE("goal across a gap is unreachable but the tree grows") {
  const Scene scene(two_plates_with_gap());
  PlannerConfig cfg = config(4);
  cfg.max_iterations = 1500;
  const auto r = plan(scene.map, scene.cloud, {2, 2.5}, {9, 2.5}, cfg, scene.cfg);
  CHECK_FALSE(r.path);
  CHECK(r.tree.nodes.size() > 50);
  for (const auto& n : r.tree.nodes) CHECK(n.position().x() < 5.5);
}

TEST_CASE("inadmissible endpoints are planning errors") {
  // A plate running into a 70 degree wall, which scores about 0.62.
  PointCloud c = plate(6, 6);
  const double t = std::tan(70.0 * std::numbers::pi / 180.0);
  for (const auto& p : test::lattice_plate(6, 0, 8, 6, 0.05).points) {
    c.points.emplace_back(p.x(), p.y(), t * (p.x() - 6));
  }
  const Scene scene(std::move(c));
  CHECK_THROWS_AS(plan(scene.map, scene.cloud, {1, 1}, {20, 20}, config(1), scene.cfg),
                  PlanningError);
  PlannerConfig strict = config(1);
  strict.tau_max_accept = 0.5;
  CHECK_THROWS_AS(plan(scene.map, scene.cloud, {1, 1}, {7, 3}, strict, scene.cfg), PlanningError);
  CHECK_THROWS_AS(plan(scene.map, scene.cloud, {7, 3}, {1, 1}, strict, scene.cfg), PlanningError);
  CHECK_NOTHROW(plan(scene.map, scene.cloud, {1, 1}, {4, 3}, strict, scene.cfg));
}

TEST_CASE("tree invariants hold throughout a run") {
  const Scene scene(plate(8, 8));
  const auto ctx = scene.ctx();
  LazyAssessor assessor(ctx);
  PlannerConfig cfg = config(12);
  Planner planner(ctx, assessor, cfg, {1, 1}, {7, 6});
  std::optional<double> last;
  for (int chunk = 0; chunk < 20; ++chunk) {
    planner.run(100);
    CHECK(planner.check_consistency());
    if (const auto c = planner.best_cost()) {
      if (last) CHECK(*c <= *last + 1e-12);
      last = c;
    }
  }
  REQUIRE(last);
  for (const auto& n : planner.tree().nodes) CHECK(n.tau() < cfg.tau_max_accept);
  const auto& trace = planner.stats().cost_trace;
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i].cost < trace[i - 1].cost);
  const auto r = planner.result();
  REQUIRE(r.path);
  CHECK(r.path->nodes.front().parent == std::nullopt);
  CHECK(std::find(r.tree.goal_region.begin(), r.tree.goal_region.end(),
                  static_cast<int>(std::distance(
                      r.tree.nodes.begin(),
                      std::find_if(r.tree.nodes.begin(), r.tree.nodes.end(), [&](const PlaneNode& n) {
                        return n.position() == r.path->nodes.back().position();
                      })))) != r.tree.goal_region.end());
  double min_goal = std::numeric_limits<double>::infinity();
  for (int id : r.tree.goal_region) min_goal = std::min(min_goal, r.tree.nodes[id].cost_from_root);
  CHECK(r.path->cost == doctest::Approx(min_goal));
}

TEST_CASE("planning is deterministic per seed") {
  const Scene scene(plate(8, 8));
  auto run = [&](std::uint64_t seed) {
    return plan(scene.map, scene.cloud, {1, 1}, {7, 7}, config(seed), scene.cfg);
  };
  const auto a = run(5), b = run(5), c = run(6);
  REQUIRE(a.tree.nodes.size() == b.tree.nodes.size());
  for (std::size_t i = 0; i < a.tree.nodes.size(); ++i) {
    CHECK(a.tree.nodes[i].position() == b.tree.nodes[i].position());
    CHECK(a.tree.nodes[i].parent == b.tree.nodes[i].parent);
    CHECK(a.tree.nodes[i].cost_from_root == b.tree.nodes[i].cost_from_root);
  }
  REQUIRE(a.path);
  CHECK(a.path->cost == b.path->cost);
  CHECK(a.tree.nodes.size() != c.tree.nodes.size());
}

TEST_CASE("previous path seeds the next query") {
  const Scene scene(plate(10, 10));
  const auto ctx = scene.ctx();
  const auto first = plan(scene.map, scene.cloud, {1, 1}, {9, 9}, config(2), scene.cfg);
  REQUIRE(first.path);

  SUBCASE("unchanged map finds a solution immediately") {
    LazyAssessor assessor(ctx);
    Planner planner(ctx, assessor, config(77), {1, 1}, {9, 9});
    replan_heuristic(planner, *first.path);
    planner.run(2000);
    REQUIRE(planner.stats().first_solution_iteration);
    CHECK(*planner.stats().first_solution_iteration <= 5);
    CHECK(planner.tree().nodes.size() > first.path->nodes.size());
  }
  SUBCASE("empty previous path changes nothing") {
    LazyAssessor a1(ctx), a2(ctx);
    Planner p1(ctx, a1, config(8), {1, 1}, {9, 9});
    Planner p2(ctx, a2, config(8), {1, 1}, {9, 9});
    replan_heuristic(p2, SparsePath{});
    p1.run(500);
    p2.run(500);
    REQUIRE(p1.tree().nodes.size() == p2.tree().nodes.size());
    for (std::size_t i = 0; i < p1.tree().nodes.size(); ++i) {
      CHECK(p1.tree().nodes[i].position() == p2.tree().nodes[i].position());
    }
  }
  SUBCASE("blocked previous nodes are skipped") {
    // Cut a hole across the middle of the old path; the remaining plate
    // still connects around it.
    PointCloud holed;
    for (const auto& p : scene.cloud.points) {
      const double along = (p.x() + p.y()) / std::sqrt(2.0);
      const double across = (p.y() - p.x()) / std::sqrt(2.0);
      if (std::abs(along - 7.07) < 1.0 && std::abs(across) < 2.5) continue;
      holed.points.push_back(p);
    }
    const Scene blocked(std::move(holed));
    const auto bctx = blocked.ctx();
    LazyAssessor assessor(bctx);
    Planner planner(bctx, assessor, config(21), {1, 1}, {9, 9});
    replan_heuristic(planner, *first.path);
    CHECK(planner.tree().nodes.size() < first.path->nodes.size());
    planner.run(4000);
    const auto r = planner.result();
    REQUIRE(r.path);
    CHECK(planner.check_consistency());
    for (const auto& n : r.path->nodes) {
      const double along = (n.position().x() + n.position().y()) / std::sqrt(2.0);
      const double across = (n.position().y() - n.position().x()) / std::sqrt(2.0);
      // Boundary voxels reach up to one cell diagonal into the cut.
      CHECK_FALSE((std::abs(along - 7.07) < 1.0 - 0.15 && std::abs(across) < 2.5 - 0.15));
    }
  }
}

TEST_CASE("lazy and precomputed column scores agree") {
  PointCloud c = plate(4, 4);
  for (auto& p : c.points) p.z() = 0.2 * std::sin(p.x()) + 0.1 * p.y();
  const Scene scene(std::move(c), 0.2);
  const auto ctx = scene.ctx();
  LazyAssessor lazy(ctx);
  PrecomputedAssessor full(ctx);
  CHECK(full.plane_fits() > 0);
  for (int iy = 0; iy < scene.map.dims().y(); ++iy) {
    for (int ix = 0; ix < scene.map.dims().x(); ++ix) {
      const auto a = lazy.column_tau(ix, iy);
      const auto b = full.column_tau(ix, iy);
      REQUIRE(a.has_value() == b.has_value());
      if (a) CHECK(*a == doctest::Approx(*b).epsilon(1e-6));
    }
  }
  const auto fits = full.plane_fits();
  full.column_tau(3, 3);
  CHECK(full.plane_fits() == fits);
}

TEST_CASE("planner config validation") {
  PlannerConfig cfg;
  CHECK_NOTHROW(cfg.validate(1.0));
  cfg.step = 0.6;
  CHECK_THROWS_WITH_AS(cfg.validate(1.0), doctest::Contains("planner.step"), ConfigError);
  cfg = {};
  cfg.tau_max_accept = 0.0;
  CHECK_THROWS_WITH_AS(cfg.validate(1.0), doctest::Contains("planner.tau_max_accept"), ConfigError);
  cfg = {};
  cfg.max_iterations = -1;
  CHECK_THROWS_AS(cfg.validate(1.0), ConfigError);
}
