// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. An optional first argument overrides the number of
// benchmark trials per fixture (default 100).

#include "oracles.hpp"

#include "tnav/bench.hpp"
#include "tnav/export.hpp"
#include "tnav/sim.hpp"
#include "tnav/terrain_synth.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

using namespace tnav;

namespace {

const std::filesystem::path kRoot = TNAV_SOURCE_DIR;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TerrainSpec fixture(const std::string& rel) { return load_terrain_spec(kRoot / "fixtures" / rel); }

// --- 1 ----------------------------------------------------------------------

Verdict bench_ordering(int trials) {
  AppConfig cfg = AppConfig::defaults();
  cfg.bench.trials = trials;
  const auto fixtures = load_fixtures(kRoot / "fixtures" / "bench");
  const BenchResult r = bench_lazy_vs_full(fixtures, cfg);
  Verdict v{fixtures.size() == 4, ""};
  for (std::size_t i = 0; i + 1 < r.rows.size(); i += 2) {
    const BenchRow& lazy = r.rows[i];
    const BenchRow& full = r.rows[i + 1];
    if (!lazy.total || !full.total || !lazy.search || !full.search) {
      v.pass = false;
      v.detail += lazy.fixture + ": too few solved trials; ";
      continue;
    }
    const bool ok = lazy.total->median < full.total->median &&
                    full.search->median <= lazy.search->median;
    v.pass = v.pass && ok && lazy.trials >= 100 && full.trials >= 100;
    v.detail += fmt("%s total %.1f<%.1f ms, search %.2f<=%.2f ms (%d/%d solved); ",
                    lazy.fixture.c_str(), 1e3 * lazy.total->median, 1e3 * full.total->median,
                    1e3 * full.search->median, 1e3 * lazy.search->median, lazy.solved, lazy.trials);
  }
  return v;
}

// --- 2 ----------------------------------------------------------------------

Verdict speed_dip() {
  const TerrainSpec spec = fixture("band.json");
  const PointCloud cloud = synthesize_terrain(spec);
  struct Run {
    RunReport rep;
    double band_speed = 0;
    double band_length = 0;
  };
  auto run = [&](bool weighted) {
    AppConfig cfg = AppConfig::defaults();
    cfg.nmpc.traversability_weight = weighted;
    SimWorld world(cloud, cfg.map_res, cfg.assessment, cfg.sim.sensing_radius,
                   cfg.planner.tau_max_accept);
    Run out{run_episode(world, *spec.start, *spec.goal, cfg)};
    // Band membership from the ground-truth score under each logged position.
    LazyAssessor truth(world.context());
    double speed = 0;
    int n = 0;
    std::optional<Vec2> prev;
    for (const auto& row : out.rep.log.rows) {
      const Vec2 p(row.x, row.y);
      const Eigen::Vector2i c = world.map().column_of(p);
      const auto tau = truth.column_tau(c.x(), c.y());
      if (tau && *tau >= 0.5) {
        speed += row.v;
        ++n;
        if (prev) out.band_length += (p - *prev).norm();
        prev = p;
      } else {
        prev.reset();
      }
    }
    out.band_speed = n ? speed / n : 0.0;
    return out;
  };
  const Run on = run(true), off = run(false);
  Verdict v;
  v.pass = on.rep.success && off.rep.success && on.band_length >= 2.0 && off.band_length >= 2.0 &&
           on.band_speed <= 0.8 * off.band_speed;
  v.detail = fmt("band %.2f m; mean speed in band %.3f (lambda) vs %.3f (lambda=1), ratio %.3f; "
                 "goal reached %d/%d",
                 on.band_length, on.band_speed, off.band_speed, on.band_speed / off.band_speed,
                 on.rep.success, off.rep.success);
  return v;
}

// --- 3 ----------------------------------------------------------------------

Verdict variance_vs_density() {
  const TerrainSpec spec = fixture("bench/forest.json");
  const PointCloud cloud = synthesize_terrain(spec);
  const AppConfig cfg = AppConfig::defaults();
  const GridMap3D map = voxelize(cloud, cfg.map_res);
  PlannerConfig pc = cfg.planner;
  pc.seed = cfg.seed;
  const PlanResult r = plan(map, cloud, *spec.start, *spec.goal, pc, cfg.assessment);
  if (!r.path) return {false, "no path"};
  auto correlation = [&](const DensifyConfig& dc, std::size_t* count) {
    const DensePath dense = densify(*r.path, r.tree, dc, pc.seed);
    std::vector<double> var, dist;
    for (const auto& w : dense.waypoints) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& n : r.tree.nodes) best = std::min(best, (xy(n.position()) - xy(w.position)).norm());
      var.push_back(w.sigma * w.sigma);
      dist.push_back(best);
    }
    if (count) *count = dense.size();
    return oracle::spearman(var, dist);
  };
  std::size_t count = 0;
  const double rho = correlation(cfg.gpr, &count);
  // Diagnostic only: the same path scored with shorter length scales.
  std::string sweep;
  for (double scale : {0.25, 0.5}) {
    DensifyConfig dc = cfg.gpr;
    dc.hyper.length *= scale;
    sweep += fmt(", l=%.2f: %.3f", dc.hyper.length, correlation(dc, nullptr));
  }
  return {count >= 200 && rho >= 0.5,
          fmt("%zu waypoints, %zu tree nodes, spearman %.3f at l=%.2f (diagnostic%s)", count,
              r.tree.nodes.size(), rho, cfg.gpr.hyper.length, sweep.c_str())};
}

// --- 4 ----------------------------------------------------------------------

Verdict flat_optimality() {
  const TerrainSpec spec = fixture("plate.json");
  const PointCloud cloud = synthesize_terrain(spec);
  const AppConfig cfg = AppConfig::defaults();
  const GridMap3D map = voxelize(cloud, cfg.map_res);
  const NeighborhoodIndex index(cloud, std::max(cfg.assessment.side / 2, 0.05));
  const TerrainContext ctx{map, index, cfg.assessment};
  const double d = (*spec.goal - *spec.start).norm();
  std::vector<double> costs;
  bool monotone = true;
  for (int s = 0; s < 20; ++s) {
    PlannerConfig pc = cfg.planner;
    pc.omega = 0;
    pc.seed = 1000 + s;
    LazyAssessor assessor(ctx);
    Planner planner(ctx, assessor, pc, *spec.start, *spec.goal);
    std::optional<double> last;
    for (int chunk = 0; chunk < 50; ++chunk) {
      planner.run(100);
      const auto c = planner.best_cost();
      if (last && (!c || *c > *last)) monotone = false;
      if (c) last = c;
    }
    const auto& trace = planner.stats().cost_trace;
    for (std::size_t i = 1; i < trace.size(); ++i) monotone = monotone && trace[i].cost <= trace[i - 1].cost;
    costs.push_back(last.value_or(std::numeric_limits<double>::infinity()));
  }
  const double med = median(costs);
  return {med <= 1.05 * d && monotone,
          fmt("median cost %.4f vs 1.05 x %.4f = %.4f; monotone %d", med, d, 1.05 * d, monotone)};
}

// --- 5 ----------------------------------------------------------------------

Verdict plane_fit_oracle() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.5, 0.5), tilt(0, 0.6), azim(0, 2 * std::numbers::pi);
  std::normal_distribution<double> noise(0, 0.01);
  AssessmentConfig cfg;
  double worst_noisy = 0, worst_exact = 0;
  for (int t = 0; t < 200; ++t) {
    const Vec3 n = oracle::spherical(tilt(rng), azim(rng));
    const Vec3 a = n.unitOrthogonal(), b = n.cross(a);
    std::vector<Vec3> exact, noisy;
    for (int i = 0; i < 150; ++i) {
      const Vec3 p = Vec3(1, 2, 0.3) + u(rng) * a + u(rng) * b;
      exact.push_back(p);
      noisy.push_back(p + noise(rng) * n);
    }
    const auto pe = fit_plane(exact, exact[0], Vec3::UnitX(), cfg);
    const auto pn = fit_plane(noisy, noisy[0], Vec3::UnitX(), cfg);
    if (!pe || !pn) return {false, "fit failed"};
    worst_exact = std::max(worst_exact, oracle::angle_between_axes(pe->normal(), n));
    worst_noisy = std::max(worst_noisy,
                           oracle::angle_between_axes(pn->normal(), oracle::brute_force_normal(noisy)));
  }
  const double deg = 180 / std::numbers::pi;
  return {worst_noisy * deg <= 2.0 && worst_exact <= 1e-9,
          fmt("noisy worst %.4f deg vs brute force, exact worst %.2e rad", worst_noisy * deg, worst_exact)};
}

// --- 6 ----------------------------------------------------------------------

Verdict gpr_oracle() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> pos(0, 6), tau(0, 1);
  double worst = 0;
  for (int n : {1, 2, 10, 50, 120, 200}) {
    for (int rep = 0; rep < 3; ++rep) {
      std::vector<Vec2> x;
      std::vector<double> y;
      for (int i = 0; i < n; ++i) {
        x.emplace_back(pos(rng), pos(rng));
        y.push_back(tau(rng));
      }
      const GprHyper h{0.5, 0.7, 1e-4};
      const GprModel model(x, y, h);
      const oracle::NaiveGp naive{x, y, h.sigma_f, h.length, h.noise_var};
      for (int q = 0; q < 30; ++q) {
        const Vec2 p(pos(rng), pos(rng));
        const auto got = model.predict(p);
        const auto [m, v] = naive.predict(p);
        worst = std::max({worst, std::abs(got.mean - m), std::abs(got.variance - v)});
      }
    }
  }
  // Limits: near-noiseless interpolation and reversion to the prior far away.
  const GprModel sharp({{0, 0}, {2, 0}, {0, 2}}, {0.2, 0.7, 0.4}, {0.5, 0.7, 1e-10});
  double interp = 0;
  for (auto [p, t] : {std::pair{Vec2(0, 0), 0.2}, {Vec2(2, 0), 0.7}, {Vec2(0, 2), 0.4}}) {
    const auto g = sharp.predict(p);
    interp = std::max({interp, std::abs(g.mean - t), g.variance});
  }
  const auto far = sharp.predict({500, 500});
  const bool prior = std::abs(far.mean) < 1e-12 && std::abs(far.variance - 0.25) < 1e-12;
  return {worst <= 1e-8 && interp < 1e-4 && prior,
          fmt("worst oracle gap %.2e, interpolation gap %.2e, prior reversion %d", worst, interp, prior)};
}

// --- 7 ----------------------------------------------------------------------

Verdict nmpc_checks() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  NmpcConfig cfg;
  double worst_rel = 0;
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + t % 10;
    NmpcProblem p;
    p.q = cfg.q_diag.asDiagonal();
    p.r = cfg.r_diag.asDiagonal();
    p.dt = 0.1;
    p.start = {u(rng), u(rng), 0.5 * u(rng)};
    for (int k = 0; k < n; ++k) p.reference.push_back({0.1 * k + 0.2 * u(rng), 0.2 * u(rng), 0.3 * u(rng)});
    p.normal = Vec3(0.3 * u(rng), 0.3 * u(rng), 1).normalized();
    p.lambda = 1 + 4 * std::abs(u(rng));
    for (int i = 0; i < 3; ++i) p.obstacles.emplace_back(p.start.x + 0.4 * u(rng), p.start.y + 0.4 * u(rng));
    Eigen::VectorXd z(2 * n);
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = u(rng);
    auto controls = [](const Eigen::VectorXd& v) {
      std::vector<ControlInput> c(v.size() / 2);
      for (std::size_t k = 0; k < c.size(); ++k) c[k] = {v(2 * k), v(2 * k + 1)};
      return c;
    };
    Eigen::VectorXd g;
    penalized_objective(p, controls(z), 50, 0.3, &g);
    const auto fd = oracle::central_gradient(
        [&](const Eigen::VectorXd& v) { return penalized_objective(p, controls(v), 50, 0.3, nullptr); }, z,
        1e-6);
    worst_rel = std::max(worst_rel, (g - fd).norm() / std::max(fd.norm(), 1e-12));
  }

  NmpcProblem p;
  p.q = cfg.q_diag.asDiagonal();
  p.r = cfg.r_diag.asDiagonal();
  for (int k = 0; k < cfg.horizon; ++k) p.reference.push_back({0.075 * k, 0, 0});
  const Vec2 obstacle(1.0, 0.0);
  p.obstacles = {obstacle};
  const NmpcSolution sol = solve(p, std::nullopt, cfg);
  double clearance = std::numeric_limits<double>::infinity();
  for (const auto& s : sol.states) clearance = std::min(clearance, (s.position() - obstacle).norm());

  bool unicycle = true;
  for (int i = 0; i < 200; ++i) {
    const RobotState s{3 * u(rng), 3 * u(rng), 3 * u(rng)};
    const ControlInput c{u(rng), u(rng)};
    const RobotState nx = dynamics_step(s, c, Vec3::UnitZ(), 0.05);
    unicycle = unicycle && nx.x == s.x + std::cos(s.theta) * c.v * 0.05 &&
               nx.y == s.y + std::sin(s.theta) * c.v * 0.05;
  }
  return {worst_rel <= 1e-4 && sol.feasible && clearance >= p.d_safe - 1e-3 && unicycle,
          fmt("worst gradient rel err %.2e; obstacle clearance %.4f (feasible %d); flat unicycle %d",
              worst_rel, clearance, sol.feasible, unicycle)};
}

// --- 8 ----------------------------------------------------------------------

Verdict arch_bridge_audit() {
  const TerrainSpec spec = fixture("bench/arch_bridge.json");
  const PointCloud cloud = synthesize_terrain(spec);
  const AppConfig cfg = AppConfig::defaults();
  auto episode = [&] {
    SimWorld world(cloud, cfg.map_res, cfg.assessment, cfg.sim.sensing_radius,
                   cfg.planner.tau_max_accept);
    return run_episode(world, *spec.start, *spec.goal, cfg);
  };
  const RunReport a = episode(), b = episode();
  // The gap: between the plates, outside the bridge corridor.
  int in_gap = 0;
  for (const auto& row : a.log.rows) {
    if (row.x > 8 && row.x < 14 && (row.y < 8 || row.y > 12)) ++in_gap;
  }
  const bool same_log = trajectory_csv(a.log) == trajectory_csv(b.log);
  const bool same_report = report_json(a).dump() == report_json(b).dump();
  bool same_plan = a.last_plan && b.last_plan &&
                   tree_json(a.last_plan->tree).dump() == tree_json(b.last_plan->tree).dump();
  return {a.success && in_gap == 0 && same_log && same_report && same_plan,
          fmt("success %d, %zu steps, %d in gap, identical log %d / report %d / tree %d", a.success,
              a.log.rows.size(), in_gap, same_log, same_report, same_plan)};
}

}  // namespace

int main(int argc, char** argv) {
  const int trials = argc > 1 ? std::atoi(argv[1]) : 100;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"lazy vs precomputed benchmark ordering", [&] { return bench_ordering(trials); }},
      {"speed dip on a high-traversability band", speed_dip},
      {"variance tracks distance to tree nodes", variance_vs_density},
      {"flat-plate optimality and monotone cost", flat_optimality},
      {"plane fit against brute force", plane_fit_oracle},
      {"GPR against a naive oracle", gpr_oracle},
      {"NMPC gradients, clearance and flat dynamics", nmpc_checks},
      {"arch bridge safety audit and determinism", arch_bridge_audit},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
              << "): " << v.detail << " [" << fmt("%.1f", secs) << " s]" << std::endl;
  }
  return failed ? 1 : 0;
}
