#pragma once

#include "tnav/planner.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace tnav {

struct GprHyper {
  double sigma_f = 0.5;
  double length = 0.7;
  double noise_var = 1e-4;

  void validate() const;
};

struct GprPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Zero-mean exact GP with the squared-exponential kernel
/// k(a, b) = sigma_f^2 exp(-|a - b|^2 / (2 l^2)).
class GprModel {
 public:
  GprModel(std::vector<Vec2> inputs, std::vector<double> targets, const GprHyper& hyper);

  double kernel(const Vec2& a, const Vec2& b) const;

  GprPrediction predict(const Vec2& query) const;
  std::vector<GprPrediction> predict(std::span<const Vec2> queries) const;

  const std::vector<Vec2>& inputs() const { return inputs_; }
  const std::vector<double>& targets() const { return targets_; }
  const GprHyper& hyper() const { return hyper_; }

 private:
  std::vector<Vec2> inputs_;
  std::vector<double> targets_;
  GprHyper hyper_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

/// Trains on the XY projection and tau of every tree node. Trees larger than
/// `max_train` are uniformly subsampled with `seed`; the default cap sits above
/// any tree the default planner budget can grow.
GprModel fit(const SamplingTree& tree, const GprHyper& hyper, std::size_t max_train = 5000,
             std::uint64_t seed = 0);

/// Linear interpolation keeping every node, spacing at most `step` (3D).
std::vector<Vec3> interpolate(const SparsePath& path, double step);

struct DenseWaypoint {
  Vec3 position;
  double tau = 0.0;       // predicted mean clamped to [0, 1]
  double raw_mean = 0.0;
  double sigma = 0.0;     // predictive standard deviation
  Vec3 normal = Vec3::UnitZ();  // plane normal of the closest sparse node
};

struct DensePath {
  std::vector<DenseWaypoint> waypoints;

  bool empty() const { return waypoints.empty(); }
  std::size_t size() const { return waypoints.size(); }
};

struct DensifyConfig {
  double step = 0.1;
  GprHyper hyper;
  std::size_t max_train = 5000;

  void validate() const;
};

DensePath densify(const SparsePath& path, const SamplingTree& tree, const DensifyConfig& cfg,
                  std::uint64_t seed = 0);

}  // namespace tnav
