#include "tnav/terrain_synth.hpp"

#include "tnav/json_fields.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

namespace tnav {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Footprint read_footprint(JsonFields& f) {
  Footprint fp{f.vec2("min"), f.vec2("max")};
  if (!(fp.max.x() > fp.min.x()) || !(fp.max.y() > fp.min.y())) {
    throw ConfigError(f.child("max"), "must exceed min on both axes (non-positive size)");
  }
  return fp;
}

Axis read_axis(JsonFields& f) {
  const std::string a = f.string("axis", "x");
  if (a == "x") return Axis::X;
  if (a == "y") return Axis::Y;
  throw ConfigError(f.child("axis"), "must be \"x\" or \"y\"");
}

double finite(JsonFields& f, const std::string& key, double fallback) {
  const double v = f.number(key, fallback);
  if (!std::isfinite(v)) throw ConfigError(f.child(key), "must be finite");
  return v;
}

double positive(JsonFields& f, const std::string& key, double fallback) {
  const double v = f.number(key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(f.child(key), "must be > 0");
  return v;
}

Primitive read_primitive(const nlohmann::json& doc, const std::string& path) {
  JsonFields f(doc, path);
  const std::string type = f.string("type");
  Primitive out;
  if (type == "plate") {
    out = prim::Plate{read_footprint(f), finite(f, "z", 0.0)};
  } else if (type == "ramp") {
    prim::Ramp r{read_footprint(f), finite(f, "angle_deg", 0.0), finite(f, "z0", 0.0),
                 read_axis(f)};
    if (std::abs(r.angle_deg) >= 80.0) throw ConfigError(f.child("angle_deg"), "must be within (-80, 80)");
    out = r;
  } else if (type == "step") {
    out = prim::Step{read_footprint(f), finite(f, "height", 0.0), finite(f, "z0", 0.0),
                     read_axis(f)};
  } else if (type == "block") {
    out = prim::Block{read_footprint(f), positive(f, "height", 1.0), finite(f, "z0", 0.0)};
  } else if (type == "hole") {
    out = prim::Hole{read_footprint(f)};
  } else if (type == "roughness") {
    prim::Roughness r{read_footprint(f), finite(f, "amplitude", 0.0), positive(f, "sigma", 0.1),
                      static_cast<int>(f.integer("count", 0))};
    if (r.amplitude < 0.0) throw ConfigError(f.child("amplitude"), "must be >= 0");
    if (r.count < 0 || r.count > 100000) throw ConfigError(f.child("count"), "must be in [0, 100000]");
    out = r;
  } else if (type == "corrugation") {
    prim::Corrugation c{read_footprint(f), finite(f, "amplitude", 0.0),
                        positive(f, "wavelength", 1.0), read_axis(f)};
    if (c.amplitude < 0.0) throw ConfigError(f.child("amplitude"), "must be >= 0");
    out = c;
  } else {
    throw ConfigError(f.child("type"), "unknown primitive type '" + type + "'");
  }
  f.finish();
  return out;
}

// Lattice samples min, min + spacing, ... up to and including max (within
// rounding slack).
std::vector<double> lattice(double lo, double hi, double spacing) {
  const auto n = static_cast<long>(std::floor((hi - lo) / spacing + 1e-9)) + 1;
  std::vector<double> v(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + i * spacing;
  return v;
}

template <class Height>
void sample_surface(const Footprint& a, double spacing, Height height, std::vector<Vec3>& out) {
  const auto xs = lattice(a.min.x(), a.max.x(), spacing);
  const auto ys = lattice(a.min.y(), a.max.y(), spacing);
  for (double y : ys) {
    for (double x : xs) out.emplace_back(x, y, height(x, y));
  }
}

void sample_wall(const Vec2& from, const Vec2& to, double z0, double z1, double spacing,
                 std::vector<Vec3>& out) {
  const double len = (to - from).norm();
  const auto ts = lattice(0.0, len, spacing);
  const auto zs = lattice(std::min(z0, z1), std::max(z0, z1), spacing);
  for (double t : ts) {
    const Vec2 p = from + (len > 0 ? t / len : 0.0) * (to - from);
    for (double z : zs) out.emplace_back(p.x(), p.y(), z);
  }
}

struct Generator {
  double spacing;
  std::vector<Vec3>& pts;

  void operator()(const prim::Plate& p) const {
    sample_surface(p.area, spacing, [&](double, double) { return p.z; }, pts);
  }
  void operator()(const prim::Ramp& r) const {
    const double slope = std::tan(r.angle_deg * kDeg);
    const double base = r.axis == Axis::X ? r.area.min.x() : r.area.min.y();
    sample_surface(
        r.area, spacing,
        [&](double x, double y) { return r.z0 + slope * ((r.axis == Axis::X ? x : y) - base); },
        pts);
  }
  void operator()(const prim::Step& s) const {
    const int ax = s.axis == Axis::X ? 0 : 1;
    const double mid = 0.5 * (s.area.min[ax] + s.area.max[ax]);
    sample_surface(
        s.area, spacing,
        [&](double x, double y) { return (ax == 0 ? x : y) < mid ? s.z0 : s.z0 + s.height; },
        pts);
    Vec2 a = s.area.min;
    Vec2 b = s.area.max;
    a[ax] = mid;
    b[ax] = mid;
    sample_wall(a, b, s.z0, s.z0 + s.height, spacing, pts);
  }
  void operator()(const prim::Block& b) const {
    const double top = b.z0 + b.height;
    sample_surface(b.area, spacing, [&](double, double) { return top; }, pts);
    const Vec2 c00 = b.area.min;
    const Vec2 c11 = b.area.max;
    const Vec2 c10(c11.x(), c00.y());
    const Vec2 c01(c00.x(), c11.y());
    sample_wall(c00, c10, b.z0, top, spacing, pts);
    sample_wall(c10, c11, b.z0, top, spacing, pts);
    sample_wall(c11, c01, b.z0, top, spacing, pts);
    sample_wall(c01, c00, b.z0, top, spacing, pts);
  }
  template <class T>
  void operator()(const T&) const {}
};

}  // namespace

TerrainSpec parse_terrain_spec(const nlohmann::json& doc) {
  JsonFields f(doc, "");
  TerrainSpec spec;
  spec.name = f.string("name", "terrain");
  const long long seed = f.integer("seed", 0);
  if (seed < 0) throw ConfigError("seed", "must be >= 0");
  spec.seed = static_cast<std::uint64_t>(seed);
  spec.spacing = f.number("spacing", 0.05);
  if (!(spec.spacing >= 1e-3 && spec.spacing <= 10.0)) {
    throw ConfigError("spacing", "must be within [0.001, 10]");
  }
  if (f.has("start")) spec.start = f.vec2("start");
  if (f.has("goal")) spec.goal = f.vec2("goal");
  const auto& prims = f.raw("primitives");
  if (!prims.is_array() || prims.empty()) {
    throw ConfigError("primitives", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < prims.size(); ++i) {
    spec.primitives.push_back(read_primitive(prims[i], "primitives[" + std::to_string(i) + "]"));
  }
  f.finish();
  return spec;
}

TerrainSpec load_terrain_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "spec not found");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  return parse_terrain_spec(doc);
}

PointCloud synthesize_terrain(const TerrainSpec& spec) {
  PointCloud cloud;
  Generator gen{spec.spacing, cloud.points};
  for (const auto& p : spec.primitives) std::visit(gen, p);

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& p : spec.primitives) {
    if (const auto* r = std::get_if<prim::Roughness>(&p)) {
      struct Bump {
        Vec2 c;
        double h;
      };
      std::vector<Bump> bumps;
      const Vec2 size = r->area.max - r->area.min;
      for (int i = 0; i < r->count; ++i) {
        const Vec2 c = r->area.min + Vec2(unit(rng) * size.x(), unit(rng) * size.y());
        bumps.push_back({c, r->amplitude * (0.5 + 0.5 * unit(rng))});
      }
      const double inv = 1.0 / (2.0 * r->sigma * r->sigma);
      for (auto& q : cloud.points) {
        if (!r->area.contains(xy(q))) continue;
        for (const auto& b : bumps) q.z() += b.h * std::exp(-(xy(q) - b.c).squaredNorm() * inv);
      }
    } else if (const auto* c = std::get_if<prim::Corrugation>(&p)) {
      const int ax = c->axis == Axis::X ? 0 : 1;
      for (auto& q : cloud.points) {
        if (!c->area.contains(xy(q))) continue;
        q.z() += c->amplitude *
                 std::sin(2.0 * std::numbers::pi * (q[ax] - c->area.min[ax]) / c->wavelength);
      }
    }
  }

  for (const auto& p : spec.primitives) {
    if (const auto* h = std::get_if<prim::Hole>(&p)) {
      std::erase_if(cloud.points, [&](const Vec3& q) {
        return q.x() > h->area.min.x() && q.x() < h->area.max.x() && q.y() > h->area.min.y() &&
               q.y() < h->area.max.y();
      });
    }
  }
  return cloud;
}

}  // namespace tnav
