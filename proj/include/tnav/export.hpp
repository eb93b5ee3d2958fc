#pragma once

#include "tnav/bench.hpp"
#include "tnav/sim.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace tnav {

nlohmann::json node_json(const PlaneNode& node, int id);
nlohmann::json tree_json(const SamplingTree& tree);
nlohmann::json path_json(const SparsePath& path);
nlohmann::json report_json(const RunReport& report);
nlohmann::json bench_json(const BenchResult& result);

/// Header x,y,z,tau,sigma.
std::string dense_csv(const DensePath& dense);
/// Header t,x,y,theta,v,omega_z,t_mean,sigma_mean,lambda.
std::string trajectory_csv(const TrajectoryLog& log);
/// One row per fixture and contender with quartiles of each timing.
std::string bench_summary_csv(const BenchResult& result);
/// Wall-clock timings per trial (differs between runs).
std::string bench_timings_csv(const BenchResult& result);
/// Timing-free per-trial outcomes; byte-identical under a fixed seed.
std::string bench_outcomes_csv(const BenchResult& result);

/// Collects written files under one output directory and emits manifest.json.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  void write_text(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& doc);
  /// Registers a file written by someone else.
  void add(const std::string& name);

  void write_manifest(const std::string& command, const nlohmann::json& config);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path operator/(const std::string& name) const { return root_ / name; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> files_;
};

}  // namespace tnav
