#include "tnav/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace tnav {

std::string to_string(Contender c) {
  return c == Contender::LazyPlaneFit ? "pf_rrt_star" : "rrt_star_analyse";
}

std::vector<BenchFixture> load_fixtures(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError(dir.string(), "fixture directory not found");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<BenchFixture> out;
  for (const auto& f : files) {
    const TerrainSpec spec = load_terrain_spec(f);
    if (!spec.start || !spec.goal) throw ConfigError(f.string(), "fixture needs start and goal");
    out.push_back({spec.name, synthesize_terrain(spec), *spec.start, *spec.goal});
  }
  if (out.empty()) throw ConfigError(dir.string(), "no *.json fixtures found");
  return out;
}

std::optional<Quartiles> quartiles(std::vector<double> v) {
  if (v.size() < 2) return std::nullopt;
  std::sort(v.begin(), v.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const std::size_t j = std::min(i + 1, v.size() - 1);
    return v[i] + (pos - static_cast<double>(i)) * (v[j] - v[i]);
  };
  return Quartiles{at(0.25), at(0.5), at(0.75)};
}

std::pair<TrialRecord, TrialRecord> run_paired_trial(const BenchFixture& fixture,
                                                     const GridMap3D& map,
                                                     const NeighborhoodIndex& index,
                                                     const AppConfig& cfg, int trial) {
  const TerrainContext ctx{map, index, cfg.assessment};
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(trial);
  PlannerConfig pc = cfg.planner;
  pc.seed = seed;

  struct Run {
    TrialRecord rec;
    std::vector<CostSample> trace;
  };
  // Both contenders, each with its own assessor and identical seed.
  std::vector<Run> runs;
  for (Contender who : {Contender::LazyPlaneFit, Contender::PrecomputedAnalysis}) {
    Run r;
    r.rec.fixture = fixture.name;
    r.rec.trial = trial;
    r.rec.seed = seed;
    r.rec.contender = who;
    std::unique_ptr<TerrainAssessor> assessor;
    if (who == Contender::PrecomputedAnalysis) {
      auto pre = std::make_unique<PrecomputedAssessor>(ctx);
      r.rec.analysis_seconds = pre->analysis_seconds();
      assessor = std::move(pre);
    } else {
      assessor = std::make_unique<LazyAssessor>(ctx);
    }
    try {
      Planner planner(ctx, *assessor, pc, fixture.start, fixture.goal);
      planner.run(pc.max_iterations);
      const auto& st = planner.stats();
      r.rec.tree_size = planner.tree().nodes.size();
      r.rec.plane_fits = assessor->plane_fits();
      if (st.first_solution_seconds) {
        r.rec.solved = true;
        r.rec.search_seconds = *st.first_solution_seconds;
        r.rec.total_seconds = r.rec.analysis_seconds + *st.first_solution_seconds;
        r.rec.first_solution_iteration = st.first_solution_iteration;
        r.rec.initial_cost = st.cost_trace.front().cost;
        r.rec.final_cost = st.cost_trace.back().cost;
        r.trace = st.cost_trace;
      }
    } catch (const PlanningError&) {
    }
    runs.push_back(std::move(r));
  }

  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : runs) {
    if (r.rec.final_cost) best = std::min(best, *r.rec.final_cost);
  }
  if (std::isfinite(best)) {
    const double target = cfg.bench.matched_cost_factor * best;
    for (auto& r : runs) {
      for (const auto& s : r.trace) {
        if (s.cost <= target) {
          r.rec.matched_seconds = r.rec.analysis_seconds + s.seconds;
          break;
        }
      }
    }
  }
  return {runs[0].rec, runs[1].rec};
}

BenchResult bench_lazy_vs_full(const std::vector<BenchFixture>& fixtures, const AppConfig& cfg) {
  cfg.bench.validate();
  BenchResult out;
  for (const auto& fx : fixtures) {
    const GridMap3D map = voxelize(fx.cloud, cfg.map_res);
    const NeighborhoodIndex index(fx.cloud, std::max(cfg.assessment.side / 2, 0.05));
    const int n = cfg.bench.trials;
    std::vector<std::pair<TrialRecord, TrialRecord>> pairs(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int t = next++; t < n; t = next++) {
        pairs[static_cast<std::size_t>(t)] = run_paired_trial(fx, map, index, cfg, t);
      }
    };
    const int workers = std::clamp(cfg.bench.workers, 1, std::max(1, n));
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    for (Contender who : {Contender::LazyPlaneFit, Contender::PrecomputedAnalysis}) {
      BenchRow row;
      row.fixture = fx.name;
      row.contender = who;
      row.trials = n;
      std::vector<double> analysis, search, total, matched;
      for (const auto& [lazy, full] : pairs) {
        const TrialRecord& r = who == Contender::LazyPlaneFit ? lazy : full;
        analysis.push_back(r.analysis_seconds);
        if (r.solved) {
          ++row.solved;
          search.push_back(*r.search_seconds);
          total.push_back(*r.total_seconds);
        }
        if (r.matched_seconds) matched.push_back(*r.matched_seconds);
      }
      row.analysis = quartiles(analysis);
      row.search = quartiles(search);
      row.total = quartiles(total);
      row.matched = quartiles(matched);
      out.rows.push_back(row);
    }
    for (auto& [lazy, full] : pairs) {
      out.trials.push_back(std::move(lazy));
      out.trials.push_back(std::move(full));
    }
  }
  return out;
}

}  // namespace tnav
