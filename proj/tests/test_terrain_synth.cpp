#include "support.hpp"

#include "tnav/terrain_synth.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace tnav;
using nlohmann::json;

TEST_CASE("flat plate is level") {
  const auto spec = parse_terrain_spec(json::parse(R"({
    "spacing": 0.05,
    "primitives": [{"type": "plate", "min": [0, 0], "max": [10, 10]}]})"));
  const PointCloud c = synthesize_terrain(spec);
  CHECK(c.size() == 201 * 201);
  for (const auto& p : c.points) CHECK(p.z() == 0.0);
}

TEST_CASE("ramp follows tan(angle) * x") {
  const auto spec = parse_terrain_spec(json::parse(R"({
    "primitives": [{"type": "ramp", "min": [0, 0], "max": [4, 2], "angle_deg": 30}]})"));
  const double t = std::tan(std::numbers::pi / 6);
  for (const auto& p : synthesize_terrain(spec).points) {
    CHECK(std::abs(p.z() - t * p.x()) <= 1e-9);
  }
}

TEST_CASE("hole leaves its footprint empty") {
  const auto spec = parse_terrain_spec(json::parse(R"({
    "primitives": [{"type": "plate", "min": [0, 0], "max": [5, 5]},
                   {"type": "hole", "min": [2, 2], "max": [3, 3]}]})"));
  const PointCloud c = synthesize_terrain(spec);
  CHECK(c.size() > 0);
  for (const auto& p : c.points) {
    const bool inside = p.x() > 2 && p.x() < 3 && p.y() > 2 && p.y() < 3;
    CHECK_FALSE(inside);
  }
}

TEST_CASE("step, block, roughness and corrugation shapes") {
  const auto spec = parse_terrain_spec(json::parse(R"({
    "seed": 4,
    "primitives": [
      {"type": "step", "min": [0, 0], "max": [2, 1], "height": 0.3},
      {"type": "block", "min": [5, 0], "max": [6, 1], "height": 0.5},
      {"type": "plate", "min": [10, 0], "max": [12, 2]},
      {"type": "roughness", "min": [10, 0], "max": [12, 2], "amplitude": 0.1, "count": 5},
      {"type": "plate", "min": [20, 0], "max": [22, 1]},
      {"type": "corrugation", "min": [20, 0], "max": [22, 1], "amplitude": 0.03,
       "wavelength": 0.25}]})"));
  const PointCloud c = synthesize_terrain(spec);
  double step_hi = -1, block_hi = -1, rough_hi = -1, corr_lo = 1, corr_hi = -1;
  for (const auto& p : c.points) {
    if (p.x() <= 2) {
      if (p.x() > 1.01) CHECK(p.z() == doctest::Approx(0.3));
      if (p.x() < 0.99) CHECK(p.z() == doctest::Approx(0.0));
      step_hi = std::max(step_hi, p.z());
    } else if (p.x() <= 6) {
      block_hi = std::max(block_hi, p.z());
    } else if (p.x() <= 12) {
      rough_hi = std::max(rough_hi, p.z());
      CHECK(p.z() >= 0.0);
    } else {
      corr_lo = std::min(corr_lo, p.z());
      corr_hi = std::max(corr_hi, p.z());
    }
  }
  CHECK(step_hi == doctest::Approx(0.3));
  CHECK(block_hi == doctest::Approx(0.5));
  CHECK(rough_hi > 0.04);
  CHECK(rough_hi <= 0.1 * 5 + 1e-12);
  // 0.05 m samples hit the sine at multiples of 72 degrees.
  CHECK(corr_hi == doctest::Approx(0.03 * std::sin(0.4 * std::numbers::pi)));
  CHECK(corr_lo == doctest::Approx(-0.03 * std::sin(0.4 * std::numbers::pi)));
}

TEST_CASE("synthesis is deterministic in the seed") {
  const auto doc = json::parse(R"({
    "seed": 9,
    "primitives": [{"type": "plate", "min": [0, 0], "max": [3, 3]},
                   {"type": "roughness", "min": [0, 0], "max": [3, 3], "amplitude": 0.2,
                    "count": 10}]})");
  const auto a = synthesize_terrain(parse_terrain_spec(doc));
  const auto b = synthesize_terrain(parse_terrain_spec(doc));
  CHECK(a.points == b.points);
  auto other = doc;
  other["seed"] = 10;
  CHECK(synthesize_terrain(parse_terrain_spec(other)).points != a.points);
}

TEST_CASE("spec validation names the field") {
  auto message = [](const char* text) {
    try {
      parse_terrain_spec(json::parse(text));
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("accepted");
  };
  CHECK(message(R"({"primitives": [{"type": "plate", "min": [0, 0], "max": [-1, 2]}]})")
            .starts_with("primitives[0].max"));
  CHECK(message(R"({"primitives": [{"type": "ramp", "min": [0, 0], "max": [1, 1],
                    "angle_deg": 85}]})")
            .starts_with("primitives[0].angle_deg"));
  CHECK(message(R"({"primitives": [{"type": "plate", "min": [0, 0], "max": [1, 1],
                    "colour": "red"}]})")
            .starts_with("primitives[0].colour"));
  CHECK(message(R"({"primitives": [{"type": "cone", "min": [0, 0], "max": [1, 1]}]})")
            .starts_with("primitives[0].type"));
  CHECK(message(R"({"spacing": -1, "primitives": []})").starts_with("spacing"));
  CHECK(message(R"({"primitives": []})").starts_with("primitives"));
}

TEST_CASE("missing spec file") {
  try {
    load_terrain_spec("/nonexistent/spec.json");
    FAIL("expected failure");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("spec not found") != std::string::npos);
  }
}

TEST_CASE("shipped fixtures parse and carry endpoints") {
  const auto dir = test::source_dir() / "fixtures";
  int count = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path().string());
    const TerrainSpec spec = load_terrain_spec(e.path());
    CHECK(spec.start.has_value());
    CHECK(spec.goal.has_value());
    ++count;
  }
  CHECK(count >= 6);
}
