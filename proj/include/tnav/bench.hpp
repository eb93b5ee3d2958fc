#pragma once

#include "tnav/config.hpp"
#include "tnav/terrain_synth.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tnav {

enum class Contender { LazyPlaneFit, PrecomputedAnalysis };

std::string to_string(Contender c);

struct BenchFixture {
  std::string name;
  PointCloud cloud;
  Vec2 start = Vec2::Zero();
  Vec2 goal = Vec2::Zero();
};

/// Loads every *.json TerrainSpec in `dir` (sorted by file name). Each spec
/// must carry start and goal.
std::vector<BenchFixture> load_fixtures(const std::filesystem::path& dir);

struct TrialRecord {
  std::string fixture;
  int trial = 0;
  std::uint64_t seed = 0;
  Contender contender = Contender::LazyPlaneFit;
  bool solved = false;
  double analysis_seconds = 0.0;
  std::optional<double> search_seconds;   // to first solution
  std::optional<double> total_seconds;    // analysis + search
  std::optional<double> matched_seconds;  // analysis + search to target cost
  std::optional<int> first_solution_iteration;
  std::optional<double> initial_cost;
  std::optional<double> final_cost;
  std::uint64_t plane_fits = 0;
  std::size_t tree_size = 0;
};

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Linear-interpolated quartiles; fewer than two values give nullopt.
std::optional<Quartiles> quartiles(std::vector<double> values);

struct BenchRow {
  std::string fixture;
  Contender contender = Contender::LazyPlaneFit;
  int trials = 0;
  int solved = 0;
  std::optional<Quartiles> analysis;
  std::optional<Quartiles> search;
  std::optional<Quartiles> total;
  std::optional<Quartiles> matched;
};

struct BenchResult {
  std::vector<TrialRecord> trials;
  std::vector<BenchRow> rows;  // fixture-major, lazy contender first
};

/// Runs both contenders on identical (start, goal, seed) triples: seed for
/// trial i is cfg.seed + i. Planning failures are recorded, not fatal.
BenchResult bench_lazy_vs_full(const std::vector<BenchFixture>& fixtures, const AppConfig& cfg);

/// Single paired trial on a prepared fixture (exposed for tests).
std::pair<TrialRecord, TrialRecord> run_paired_trial(const BenchFixture& fixture,
                                                     const GridMap3D& map,
                                                     const NeighborhoodIndex& index,
                                                     const AppConfig& cfg, int trial);

}  // namespace tnav
