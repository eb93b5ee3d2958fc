#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>

namespace tnav {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;
using Mat3 = Eigen::Matrix3d;

/// Raised for malformed input files and invalid geometry requests.
class TerrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a configuration value violates a module invariant. The
/// message always starts with the dotted path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline Vec2 xy(const Vec3& p) { return p.head<2>(); }

}  // namespace tnav
