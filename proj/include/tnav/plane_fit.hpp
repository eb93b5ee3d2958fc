#pragma once

#include "tnav/common.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace tnav {

/// Weights and thresholds for local terrain scoring.
struct AssessmentConfig {
  std::array<double, 3> alpha{0.4, 0.3, 0.3};  // slope, flatness, sparsity
  double s_crit = 0.5;
  double f_crit = 1.6e-7;  // flatness of +-2 cm alternating residuals with kappa_f = 1
  double lambda_crit = 1.0;
  double kappa_s = 0.63661977236758134;  // 2/pi: slope normalized to [0, 1]
  double kappa_f = 1.0;
  double r_min = 0.1;
  double r_max = 0.5;
  double t_trace = 0.005;
  int raster = 8;
  std::size_t min_support_points = 10;
  double side = 1.0;  // l_s, edge of the selection cube (m)

  /// Throws ConfigError("assessment.<field>", ...) on the first violation.
  void validate() const;
};

/// Local frame fitted at a surface point. Columns of `rotation` are
/// (e_x, e_y, e_z) with e_z the upward plane normal.
struct LocalPlane {
  Vec3 center = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  std::vector<Vec3> support;
  double side = 1.0;

  Vec3 e_x() const { return rotation.col(0); }
  Vec3 e_y() const { return rotation.col(1); }
  Vec3 normal() const { return rotation.col(2); }
};

struct SparsityDetail {
  double vacancy_ratio = 0.0;  // r
  double trace = 0.0;          // tr(Sigma^T Sigma)
  double value = 0.0;          // lambda
};

struct TraversabilityScore {
  double tau = 0.0;
  double slope = 0.0;
  double flatness = 0.0;
  double sparsity = 0.0;
  double vacancy_ratio = 0.0;
};

/// Least-squares plane through `support` with its frame oriented by
/// `next_dir_hint`. Empty when the support is too small or collinear.
std::optional<LocalPlane> fit_plane(std::span<const Vec3> support, const Vec3& center,
                                    const Vec3& next_dir_hint, const AssessmentConfig& cfg);

/// kappa_s times the inclination of the normal from world up.
double slope(const LocalPlane& plane, const AssessmentConfig& cfg);

/// kappa_f times the mean fourth power of residuals to the support centroid
/// plane.
double flatness(const LocalPlane& plane, const AssessmentConfig& cfg);

/// Vacancy of the plane footprint rasterized into cfg.raster^2 cells. The
/// raster is the square of side l_s/sqrt(2) centered on the plane, which is
/// the largest square fully covered by the selection cube at any yaw.
SparsityDetail sparsity_detail(const LocalPlane& plane, const AssessmentConfig& cfg);
double sparsity(const LocalPlane& plane, const AssessmentConfig& cfg);

/// Piecewise sparsity rule from a vacancy ratio and the vacant-cell spread.
double sparsity_from_ratio(double r, double trace, const AssessmentConfig& cfg);

/// Weighted blend of normalized components, clamped to [0, 1].
double blend_traversability(double s, double f, double lambda, const AssessmentConfig& cfg);

TraversabilityScore assess(const LocalPlane& plane, const AssessmentConfig& cfg);

}  // namespace tnav
