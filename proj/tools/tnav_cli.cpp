// tnav: terrain navigation command line.
//
//   tnav gen-terrain <spec.json> <out.xyz>
//   tnav plan <map> --start x,y --goal x,y [--config c.json] --out dir
//   tnav simulate <map> --start x,y --goal x,y [--config c.json] --out dir
//   tnav bench <fixture dir> [--trials n] [--config c.json] --out dir
//
// <map> is a point cloud (.xyz/.pcd) or a terrain spec (.json) synthesized
// on the fly. Exit status: 0 success, 1 no path / failed episode, 2 usage or
// configuration error.

#include "tnav/bench.hpp"
#include "tnav/export.hpp"
#include "tnav/sim.hpp"
#include "tnav/terrain_synth.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

using namespace tnav;

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsage = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations;
  std::optional<double> res;
  std::optional<int> trials;
  std::optional<int> workers;
  bool no_traversability_weight = false;
};

AppConfig resolve_config(const std::string& path, const Overrides& o) {
  AppConfig cfg = path.empty() ? AppConfig::defaults() : load_config(path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.iterations) cfg.planner.max_iterations = *o.iterations;
  if (o.res) cfg.map_res = *o.res;
  if (o.trials) cfg.bench.trials = *o.trials;
  if (o.workers) cfg.bench.workers = *o.workers;
  if (o.no_traversability_weight) cfg.nmpc.traversability_weight = false;
  cfg.validate();
  return cfg;
}

PointCloud load_map(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError(path, "map not found");
  if (std::filesystem::path(path).extension() == ".json") {
    return synthesize_terrain(load_terrain_spec(path));
  }
  return load_point_cloud(path);
}

Vec2 to_vec2(const std::vector<double>& v, const char* flag) {
  if (v.size() != 2) throw ConfigError(flag, "expected x,y");
  return {v[0], v[1]};
}

int cmd_gen_terrain(const std::string& spec_path, const std::string& out_path) {
  const TerrainSpec spec = load_terrain_spec(spec_path);
  const PointCloud cloud = synthesize_terrain(spec);
  write_xyz(cloud, out_path);
  std::cout << "wrote " << cloud.points.size() << " points to " << out_path << '\n';
  return kOk;
}

int cmd_plan(const std::string& map_path, const Vec2& start, const Vec2& goal,
             const AppConfig& cfg, const std::string& out_dir) {
  const PointCloud cloud = load_map(map_path);
  const GridMap3D map = voxelize(cloud, cfg.map_res);
  PlannerConfig pc = cfg.planner;
  pc.seed = cfg.seed;

  OutputDir out(out_dir);
  PlanResult result;
  try {
    result = plan(map, cloud, start, goal, pc, cfg.assessment);
  } catch (const PlanningError& e) {
    out.write_manifest("plan", to_json(cfg));
    std::cerr << "plan: " << e.what() << '\n';
    return kDomainFailure;
  }
  out.write_json("tree.json", tree_json(result.tree));
  if (!result.path) {
    out.write_manifest("plan", to_json(cfg));
    std::cerr << "plan: no path found after " << result.stats.iterations << " iterations\n";
    return kDomainFailure;
  }
  out.write_json("sparse_path.json", path_json(*result.path));
  const DensePath dense = densify(*result.path, result.tree, cfg.gpr, pc.seed);
  out.write_text("dense_path.csv", dense_csv(dense));
  out.write_manifest("plan", to_json(cfg));
  std::cout << "path cost " << result.path->cost << ", " << result.path->nodes.size()
            << " nodes, " << dense.size() << " dense waypoints\n";
  return kOk;
}

int cmd_simulate(const std::string& map_path, const Vec2& start, const Vec2& goal,
                 const AppConfig& cfg, const std::string& out_dir) {
  SimWorld world(load_map(map_path), cfg.map_res, cfg.assessment, cfg.sim.sensing_radius,
                 cfg.planner.tau_max_accept);
  const RunReport report = run_episode(world, start, goal, cfg);

  OutputDir out(out_dir);
  out.write_text("trajectory.csv", trajectory_csv(report.log));
  out.write_json("report.json", report_json(report));
  if (report.last_plan) {
    out.write_json("tree.json", tree_json(report.last_plan->tree));
    if (report.last_plan->path) out.write_json("sparse_path.json", path_json(*report.last_plan->path));
  }
  if (report.last_dense) out.write_text("dense_path.csv", dense_csv(*report.last_dense));
  out.write_manifest("simulate", to_json(cfg));
  std::cout << report.status << ": driven " << report.path_length << " m in " << report.elapsed
            << " s\n";
  return report.success ? kOk : kDomainFailure;
}

int cmd_bench(const std::string& fixture_dir, const AppConfig& cfg, const std::string& out_dir) {
  const auto fixtures = load_fixtures(fixture_dir);
  const BenchResult result = bench_lazy_vs_full(fixtures, cfg);

  OutputDir out(out_dir);
  out.write_json("bench.json", bench_json(result));
  out.write_text("bench.csv", bench_summary_csv(result));
  out.write_text("bench_timings.csv", bench_timings_csv(result));
  out.write_text("bench_outcomes.csv", bench_outcomes_csv(result));
  out.write_manifest("bench", to_json(cfg));

  for (const auto& row : result.rows) {
    std::cout << row.fixture << ' ' << to_string(row.contender) << ": solved " << row.solved << '/'
              << row.trials;
    if (row.total) std::cout << ", median total " << row.total->median * 1e3 << " ms";
    if (row.search) std::cout << ", median search " << row.search->median * 1e3 << " ms";
    std::cout << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Terrain-aware planning and tracking"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  std::vector<double> start_v, goal_v;
  std::string map_path, out_dir, spec_path, out_path, fixture_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--seed", ov.seed, "random seed (overrides config)");
  };
  auto add_route = [&](CLI::App* sub) {
    sub->add_option("map", map_path, "point cloud (.xyz/.pcd) or terrain spec (.json)")->required();
    sub->add_option("--start", start_v, "start x,y")->delimiter(',')->required();
    sub->add_option("--goal", goal_v, "goal x,y")->delimiter(',')->required();
    sub->add_option("--iterations", ov.iterations, "planner iterations (overrides config)");
    sub->add_option("--res", ov.res, "voxel resolution (overrides config)");
    add_common(sub);
  };

  auto* gen = app.add_subcommand("gen-terrain", "synthesize a point cloud from a terrain spec");
  gen->add_option("spec", spec_path, "terrain spec JSON")->required();
  gen->add_option("out", out_path, "output .xyz file")->required();

  auto* plan_cmd = app.add_subcommand("plan", "plan and densify a path");
  add_route(plan_cmd);

  auto* sim_cmd = app.add_subcommand("simulate", "closed-loop episode");
  add_route(sim_cmd);
  sim_cmd->add_flag("--no-traversability-weight", ov.no_traversability_weight,
                    "force lambda = 1 in the tracker");

  auto* bench_cmd = app.add_subcommand("bench", "lazy plane fitting vs full pre-analysis");
  bench_cmd->add_option("fixtures", fixture_dir, "directory of terrain spec fixtures")->required();
  bench_cmd->add_option("--trials", ov.trials, "paired trials per fixture");
  bench_cmd->add_option("--workers", ov.workers, "worker threads");
  add_common(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_terrain(spec_path, out_path);
    const AppConfig cfg = resolve_config(config_path, ov);
    if (plan_cmd->parsed()) {
      return cmd_plan(map_path, to_vec2(start_v, "--start"), to_vec2(goal_v, "--goal"), cfg, out_dir);
    }
    if (sim_cmd->parsed()) {
      return cmd_simulate(map_path, to_vec2(start_v, "--start"), to_vec2(goal_v, "--goal"), cfg,
                          out_dir);
    }
    if (bench_cmd->parsed()) return cmd_bench(fixture_dir, cfg, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const TerrainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const PlanningError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomainFailure;
  }
  return kUsage;
}
