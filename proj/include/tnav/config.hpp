#pragma once

#include "tnav/gpr.hpp"
#include "tnav/nmpc.hpp"
#include "tnav/plane_fit.hpp"
#include "tnav/planner.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>

namespace tnav {

struct SimConfig {
  double replan_interval = 2.0;  // sim seconds tracked between replans
  int max_cycles = 60;           // plan/track cycles before giving up
  double sensing_radius = 5.0;
  double goal_tolerance = 0.6;   // episode success radius around the goal
  int max_plan_failures = 3;     // consecutive cycles without a path
  int replan_iterations = 0;     // iterations for cycles after the first; 0 = planner.max_iterations
  double sensing_noise = 0.0;    // std dev (m) of jitter on sensed obstacles; 0 = exact

  void validate() const;
};

struct BenchConfig {
  int trials = 100;
  int workers = 1;
  double matched_cost_factor = 1.05;

  void validate() const;
};

struct AppConfig {
  double map_res = 0.1;
  AssessmentConfig assessment;
  PlannerConfig planner;
  DensifyConfig gpr;
  NmpcConfig nmpc;
  SimConfig sim;
  BenchConfig bench;
  std::uint64_t seed = 1;

  /// Defaults with the GPR length scale tied to the planner step.
  static AppConfig defaults();

  void validate() const;
};

/// Strict parse over defaults: unknown keys and invalid values throw
/// ConfigError with the dotted field path.
AppConfig parse_config(const nlohmann::json& doc);
AppConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const AppConfig& cfg);

}  // namespace tnav
