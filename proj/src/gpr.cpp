#include "tnav/gpr.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <random>

namespace tnav {

void GprHyper::validate() const {
  if (!(sigma_f > 0)) throw ConfigError("gpr.sigma_f", "must be > 0");
  if (!(length > 0)) throw ConfigError("gpr.length", "must be > 0");
  if (!(noise_var > 0)) throw ConfigError("gpr.noise_var", "must be > 0");
}

void DensifyConfig::validate() const {
  if (!(step > 0)) throw ConfigError("gpr.step", "must be > 0");
  if (max_train < 1) throw ConfigError("gpr.max_train", "must be >= 1");
  hyper.validate();
}

GprModel::GprModel(std::vector<Vec2> inputs, std::vector<double> targets, const GprHyper& hyper)
    : inputs_(std::move(inputs)), targets_(std::move(targets)), hyper_(hyper) {
  if (inputs_.empty()) throw std::invalid_argument("GPR needs at least one training point");
  if (inputs_.size() != targets_.size()) throw std::invalid_argument("GPR input/target size mismatch");
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = hyper_.sigma_f * hyper_.sigma_f + hyper_.noise_var;
    for (Eigen::Index j = 0; j < i; ++j) {
      k(i, j) = k(j, i) = kernel(inputs_[i], inputs_[j]);
    }
  }
  llt_.compute(k);
  // Positive noise keeps K + sigma_n^2 I positive definite.
  assert(llt_.info() == Eigen::Success);
  if (llt_.info() != Eigen::Success) throw std::runtime_error("GPR Cholesky factorization failed");
  alpha_ = llt_.solve(Eigen::Map<const Eigen::VectorXd>(targets_.data(), n));
}

double GprModel::kernel(const Vec2& a, const Vec2& b) const {
  const double l2 = hyper_.length * hyper_.length;
  return hyper_.sigma_f * hyper_.sigma_f * std::exp(-(a - b).squaredNorm() / (2.0 * l2));
}

GprPrediction GprModel::predict(const Vec2& query) const {
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) ks(i) = kernel(query, inputs_[i]);
  GprPrediction out;
  out.mean = ks.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(ks);
  out.variance = std::max(0.0, hyper_.sigma_f * hyper_.sigma_f - v.squaredNorm());
  return out;
}

std::vector<GprPrediction> GprModel::predict(std::span<const Vec2> queries) const {
  std::vector<GprPrediction> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(predict(q));
  return out;
}

GprModel fit(const SamplingTree& tree, const GprHyper& hyper, std::size_t max_train,
             std::uint64_t seed) {
  hyper.validate();
  if (tree.nodes.empty()) throw std::invalid_argument("cannot fit GPR on an empty tree");
  std::vector<std::size_t> ids(tree.nodes.size());
  std::iota(ids.begin(), ids.end(), 0);
  if (ids.size() > max_train) {
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first max_train entries form the subsample.
    for (std::size_t i = 0; i < max_train; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, ids.size() - 1);
      std::swap(ids[i], ids[pick(rng)]);
    }
    ids.resize(max_train);
    std::sort(ids.begin(), ids.end());
  }
  std::vector<Vec2> inputs;
  std::vector<double> targets;
  inputs.reserve(ids.size());
  targets.reserve(ids.size());
  for (std::size_t id : ids) {
    inputs.push_back(xy(tree.nodes[id].position()));
    targets.push_back(tree.nodes[id].tau());
  }
  return GprModel(std::move(inputs), std::move(targets), hyper);
}

namespace {

// Per-point index of the sparse node each dense sample is closest to.
std::vector<Vec3> interpolate_impl(const SparsePath& path, double step,
                                   std::vector<std::size_t>* owner) {
  if (path.nodes.size() < 2) throw std::invalid_argument("interpolation needs at least 2 nodes");
  if (!(step > 0)) throw std::invalid_argument("interpolation step must be > 0");
  std::vector<Vec3> out;
  for (std::size_t s = 0; s + 1 < path.nodes.size(); ++s) {
    const Vec3& a = path.nodes[s].position();
    const Vec3& b = path.nodes[s + 1].position();
    const double len = (b - a).norm();
    const int count = std::max(1, static_cast<int>(std::ceil(len / step - 1e-12)));
    for (int i = 0; i < count; ++i) {
      const double t = static_cast<double>(i) / count;
      out.push_back(a + t * (b - a));
      if (owner) owner->push_back(t <= 0.5 ? s : s + 1);
    }
  }
  out.push_back(path.nodes.back().position());
  if (owner) owner->push_back(path.nodes.size() - 1);
  return out;
}

}  // namespace

std::vector<Vec3> interpolate(const SparsePath& path, double step) {
  return interpolate_impl(path, step, nullptr);
}

DensePath densify(const SparsePath& path, const SamplingTree& tree, const DensifyConfig& cfg,
                  std::uint64_t seed) {
  cfg.validate();
  std::vector<std::size_t> owner;
  const auto points = interpolate_impl(path, cfg.step, &owner);
  const GprModel model = fit(tree, cfg.hyper, cfg.max_train, seed);
  DensePath dense;
  dense.waypoints.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto pred = model.predict(xy(points[i]));
    DenseWaypoint w;
    w.position = points[i];
    w.raw_mean = pred.mean;
    w.tau = std::clamp(pred.mean, 0.0, 1.0);
    w.sigma = std::sqrt(pred.variance);
    w.normal = path.nodes[owner[i]].plane.normal();
    dense.waypoints.push_back(w);
  }
  return dense;
}

}  // namespace tnav
