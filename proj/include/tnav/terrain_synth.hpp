#pragma once

#include "tnav/terrain_map.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tnav {

/// Axis-aligned XY footprint.
struct Footprint {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();

  bool contains(const Vec2& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
  }
};

enum class Axis { X, Y };

namespace prim {

struct Plate {
  Footprint area;
  double z = 0.0;
};

/// z = z0 + tan(angle) * (coord - area.min[axis]).
struct Ramp {
  Footprint area;
  double angle_deg = 0.0;
  double z0 = 0.0;
  Axis axis = Axis::X;
};

/// Two levels split at the footprint midline along `axis`, joined by a
/// vertical riser.
struct Step {
  Footprint area;
  double height = 0.0;
  double z0 = 0.0;
  Axis axis = Axis::X;
};

/// Closed box standing on z0: top face plus four walls.
struct Block {
  Footprint area;
  double height = 0.0;
  double z0 = 0.0;
};

/// Removes every point whose XY falls strictly inside the footprint.
struct Hole {
  Footprint area;
};

/// Adds `count` seeded Gaussian bumps of height in [amplitude/2, amplitude].
struct Roughness {
  Footprint area;
  double amplitude = 0.0;
  double sigma = 0.1;
  int count = 0;
};

/// Adds amplitude * sin(2 pi (coord - min) / wavelength).
struct Corrugation {
  Footprint area;
  double amplitude = 0.0;
  double wavelength = 1.0;
  Axis axis = Axis::X;
};

}  // namespace prim

using Primitive = std::variant<prim::Plate, prim::Ramp, prim::Step, prim::Block, prim::Hole,
                               prim::Roughness, prim::Corrugation>;

/// Scenario description for synthetic terrain. Surface primitives are
/// unioned, height modifiers then apply in listed order, holes apply last.
struct TerrainSpec {
  std::string name;
  std::uint64_t seed = 0;
  double spacing = 0.05;
  std::vector<Primitive> primitives;
  /// Optional scenario endpoints used by the benchmark and simulator.
  std::optional<Vec2> start;
  std::optional<Vec2> goal;
};

/// Validates and converts a TerrainSpec document. Throws ConfigError naming
/// the offending field (e.g. "primitives[1].max").
TerrainSpec parse_terrain_spec(const nlohmann::json& doc);
TerrainSpec load_terrain_spec(const std::filesystem::path& path);

/// Deterministic in (spec, spec.seed).
PointCloud synthesize_terrain(const TerrainSpec& spec);

}  // namespace tnav
