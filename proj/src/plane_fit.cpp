#include "tnav/plane_fit.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tnav {

void AssessmentConfig::validate() const {
  const std::string p = "assessment.";
  double sum = 0.0;
  for (double a : alpha) {
    if (!(a >= 0.0)) throw ConfigError(p + "alpha", "weights must be >= 0");
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError(p + "alpha", "weights must sum to 1");
  if (!(s_crit > 0)) throw ConfigError(p + "s_crit", "must be > 0");
  if (!(f_crit > 0)) throw ConfigError(p + "f_crit", "must be > 0");
  if (!(lambda_crit > 0)) throw ConfigError(p + "lambda_crit", "must be > 0");
  if (!(kappa_s > 0)) throw ConfigError(p + "kappa_s", "must be > 0");
  if (!(kappa_f > 0)) throw ConfigError(p + "kappa_f", "must be > 0");
  if (!(r_min >= 0.0 && r_min < r_max && r_max <= 1.0)) {
    throw ConfigError(p + "r_min", "require 0 <= r_min < r_max <= 1");
  }
  if (!(t_trace > 0)) throw ConfigError(p + "t_trace", "must be > 0");
  if (raster < 1 || raster > 256) throw ConfigError(p + "raster", "must be in [1, 256]");
  if (min_support_points < 3) throw ConfigError(p + "min_support_points", "must be >= 3");
  if (!(side > 0)) throw ConfigError(p + "side", "must be > 0");
}

namespace {

Vec3 centroid(std::span<const Vec3> pts) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

std::optional<Vec3> in_plane_direction(const Vec3& q, const Vec3& n) {
  const Vec3 v = q - q.dot(n) * n;
  const double len = v.norm();
  if (len <= 1e-9 * std::max(1.0, q.norm())) return std::nullopt;
  return v / len;
}

}  // namespace

std::optional<LocalPlane> fit_plane(std::span<const Vec3> support, const Vec3& center,
                                    const Vec3& next_dir_hint, const AssessmentConfig& cfg) {
  if (support.size() < cfg.min_support_points || support.size() < 3) return std::nullopt;

  const Vec3 c = centroid(support);
  Eigen::MatrixX3d centered(static_cast<Eigen::Index>(support.size()), 3);
  for (std::size_t i = 0; i < support.size(); ++i) {
    centered.row(static_cast<Eigen::Index>(i)) = (support[i] - c).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixX3d> svd(centered, Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  // A second vanishing singular value means the points span at most a line.
  if (sv(0) <= 0.0 || sv(1) <= 1e-9 * sv(0)) return std::nullopt;

  Vec3 n = svd.matrixV().col(2).normalized();
  if (n.z() < 0.0) n = -n;

  auto ex = in_plane_direction(next_dir_hint, n);
  if (!ex) ex = in_plane_direction(Vec3::UnitX(), n);
  if (!ex) ex = in_plane_direction(Vec3::UnitY(), n);

  LocalPlane plane;
  plane.center = center;
  plane.rotation.col(0) = *ex;
  plane.rotation.col(1) = n.cross(*ex);
  plane.rotation.col(2) = n;
  plane.support.assign(support.begin(), support.end());
  plane.side = cfg.side;
  return plane;
}

double slope(const LocalPlane& plane, const AssessmentConfig& cfg) {
  const Vec3 n = plane.normal();
  // atan2 form of arccos(n_z) for a unit normal; stable near zero tilt.
  const double incl = std::atan2(std::hypot(n.x(), n.y()), std::max(0.0, n.z()));
  return cfg.kappa_s * incl;
}

double flatness(const LocalPlane& plane, const AssessmentConfig& cfg) {
  if (plane.support.empty()) return 0.0;
  const Vec3 c = centroid(plane.support);
  const Vec3 n = plane.normal();
  double acc = 0.0;
  for (const auto& p : plane.support) {
    const double d = n.dot(p - c);
    const double d2 = d * d;
    acc += d2 * d2;
  }
  return cfg.kappa_f * acc / static_cast<double>(plane.support.size());
}

double sparsity_from_ratio(double r, double trace, const AssessmentConfig& cfg) {
  if (r > cfg.r_max) return 1.0;
  if (r >= cfg.r_min && trace < cfg.t_trace) return (r - cfg.r_min) / (cfg.r_max - cfg.r_min);
  return 0.0;
}

SparsityDetail sparsity_detail(const LocalPlane& plane, const AssessmentConfig& cfg) {
  const int n = cfg.raster;
  const double extent = plane.side / std::numbers::sqrt2;
  const double half = extent / 2.0;
  std::vector<char> filled(static_cast<std::size_t>(n * n), 0);
  const Vec3 ex = plane.e_x();
  const Vec3 ey = plane.e_y();
  for (const auto& p : plane.support) {
    const Vec3 d = p - plane.center;
    const double u = ex.dot(d);
    const double v = ey.dot(d);
    if (std::abs(u) > half || std::abs(v) > half) continue;
    const int iu = std::min(n - 1, static_cast<int>((u + half) / extent * n));
    const int iv = std::min(n - 1, static_cast<int>((v + half) / extent * n));
    filled[static_cast<std::size_t>(iv * n + iu)] = 1;
  }

  std::vector<Eigen::Vector2d> vacant;
  for (int iv = 0; iv < n; ++iv) {
    for (int iu = 0; iu < n; ++iu) {
      if (!filled[static_cast<std::size_t>(iv * n + iu)]) {
        vacant.emplace_back((iu + 0.5) / n - 0.5, (iv + 0.5) / n - 0.5);
      }
    }
  }

  SparsityDetail out;
  out.vacancy_ratio = static_cast<double>(vacant.size()) / (n * n);
  if (vacant.size() > 1) {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& c : vacant) mean += c;
    mean /= static_cast<double>(vacant.size());
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& c : vacant) cov += (c - mean) * (c - mean).transpose();
    cov /= static_cast<double>(vacant.size());
    out.trace = (cov.transpose() * cov).trace();
  }
  out.value = sparsity_from_ratio(out.vacancy_ratio, out.trace, cfg);
  return out;
}

double sparsity(const LocalPlane& plane, const AssessmentConfig& cfg) {
  return sparsity_detail(plane, cfg).value;
}

double blend_traversability(double s, double f, double lambda, const AssessmentConfig& cfg) {
  const double raw = cfg.alpha[0] * s / cfg.s_crit + cfg.alpha[1] * f / cfg.f_crit +
                     cfg.alpha[2] * lambda / cfg.lambda_crit;
  return std::clamp(raw, 0.0, 1.0);
}

TraversabilityScore assess(const LocalPlane& plane, const AssessmentConfig& cfg) {
  TraversabilityScore score;
  score.slope = slope(plane, cfg);
  score.flatness = flatness(plane, cfg);
  const auto sp = sparsity_detail(plane, cfg);
  score.sparsity = sp.value;
  score.vacancy_ratio = sp.vacancy_ratio;
  score.tau = blend_traversability(score.slope, score.flatness, score.sparsity, cfg);
  return score;
}

}  // namespace tnav
