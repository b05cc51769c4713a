#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pickopt/errors.hpp"
#include "pickopt/grid.hpp"
#include "pickopt/rng.hpp"
#include "pickopt/vec.hpp"

namespace pickopt {

enum class PackageKind : int { Box = 0, Polybag = 1, Envelope = 2 };

inline const char* to_string(PackageKind k) {
  switch (k) {
    case PackageKind::Box: return "box";
    case PackageKind::Polybag: return "polybag";
    case PackageKind::Envelope: return "envelope";
  }
  return "box";
}

inline PackageKind package_kind_from_string(const std::string& s) {
  if (s == "box") return PackageKind::Box;
  if (s == "polybag") return PackageKind::Polybag;
  if (s == "envelope") return PackageKind::Envelope;
  throw DataFormatError("unknown package kind: " + s);
}

// One package on the conveyor. The top surface is a plane through the
// package's top-center point, tilted about the local x and y axes; this is
// the entire geometric model (no meshes, no side walls in the top-down view).
struct PackageSpec {
  int id = 0;
  PackageKind kind = PackageKind::Box;
  Vec3 center;         // conveyor frame, meters
  double yaw = 0.0;    // radians
  Vec3 dims;           // length (local x), width (local y), height
  Vec2 top_tilt;       // radians, rotation about local x then local y

  Vec2 axis_x() const { return Vec2{1.0, 0.0}.rotated(yaw); }
  Vec2 axis_y() const { return Vec2{0.0, 1.0}.rotated(yaw); }

  bool footprint_contains(double px, double py) const {
    const Vec2 d{px - center.x, py - center.y};
    return std::abs(d.dot(axis_x())) <= dims.x * 0.5 &&
           std::abs(d.dot(axis_y())) <= dims.y * 0.5;
  }

  // Outward unit normal of the top plane (z component positive).
  Vec3 top_normal() const {
    const double tx = top_tilt.x;
    const double ty = top_tilt.y;
    // Ry(ty) * Rx(tx) * (0, 0, 1), then yaw about z.
    const Vec3 local{std::sin(ty) * std::cos(tx), -std::sin(tx),
                     std::cos(ty) * std::cos(tx)};
    const Vec2 xy = Vec2{local.x, local.y}.rotated(yaw);
    return Vec3{xy.x, xy.y, local.z};
  }

  double top_z() const { return center.z + dims.z * 0.5; }

  // Height of the top plane at a footprint point.
  double top_surface_z(double px, double py) const {
    const Vec3 n = top_normal();
    return top_z() -
           (n.x * (px - center.x) + n.y * (py - center.y)) / n.z;
  }

  std::vector<Vec2> footprint_polygon() const {
    const Vec2 ux = axis_x() * (dims.x * 0.5);
    const Vec2 uy = axis_y() * (dims.y * 0.5);
    const Vec2 c{center.x, center.y};
    return {c - ux - uy, c + ux - uy, c + ux + uy, c - ux + uy};
  }
};

inline void validate(const PackageSpec& p) {
  if (p.dims.x <= 0.0 || p.dims.y <= 0.0 || p.dims.z <= 0.0)
    throw ConfigError("package dims must be strictly positive");
  if (p.dims.z > 0.6) throw ConfigError("package height exceeds 0.6 m");
  if (p.dims.x > 0.6 || p.dims.y > 0.6)
    throw ConfigError("package footprint exceeds 0.6 m per side");
  if (std::abs(p.top_tilt.x) > 0.25 || std::abs(p.top_tilt.y) > 0.25)
    throw ConfigError("top_tilt component exceeds 0.25 rad");
}

struct Scene {
  std::vector<PackageSpec> packages;
  Rect conveyor_bounds;
  uint64_t seed = 0;
};

inline void validate(const Scene& s) {
  for (const auto& p : s.packages) {
    validate(p);
    if (!s.conveyor_bounds.contains(p.center.x, p.center.y))
      throw ConfigError("package center outside conveyor bounds");
  }
}

// Per-kind sampling ranges for generate_scene.
struct KindRanges {
  double len_min = 0.0, len_max = 0.0;
  double wid_min = 0.0, wid_max = 0.0;
  double hgt_min = 0.0, hgt_max = 0.0;
  double tilt_max = 0.0;  // per-axis bound, radians
};

struct SceneConfig {
  int count_min = 5;
  int count_max = 12;
  double weight_box = 0.60;
  double weight_polybag = 0.25;
  double weight_envelope = 0.15;
  KindRanges box{0.15, 0.45, 0.12, 0.35, 0.05, 0.30, 0.04};
  KindRanges polybag{0.15, 0.40, 0.12, 0.30, 0.03, 0.12, 0.15};
  KindRanges envelope{0.18, 0.35, 0.12, 0.25, 0.008, 0.02, 0.02};
  double pile_probability = 0.35;
  Rect conveyor_bounds{0.0, 0.0, 1.2, 1.0};
};

inline void validate_ranges(const KindRanges& r, const std::string& name) {
  auto check = [&](double lo, double hi, const char* field) {
    if (lo <= 0.0 || hi < lo)
      throw ConfigError("scene config: invalid " + name + "." + field);
  };
  check(r.len_min, r.len_max, "length range");
  check(r.wid_min, r.wid_max, "width range");
  check(r.hgt_min, r.hgt_max, "height range");
  if (r.len_max > 0.6 || r.wid_max > 0.6)
    throw ConfigError("scene config: " + name + " footprint range exceeds 0.6 m");
  if (r.hgt_max > 0.6)
    throw ConfigError("scene config: " + name + " height range exceeds 0.6 m");
  if (r.tilt_max < 0.0 || r.tilt_max > 0.25)
    throw ConfigError("scene config: " + name + ".tilt_max outside [0, 0.25]");
}

inline void validate(const SceneConfig& c) {
  if (c.count_min < 0 || c.count_max < c.count_min)
    throw ConfigError("scene config: invalid count range");
  if (c.weight_box < 0.0 || c.weight_polybag < 0.0 || c.weight_envelope < 0.0 ||
      c.weight_box + c.weight_polybag + c.weight_envelope <= 0.0)
    throw ConfigError("scene config: invalid kind weights");
  validate_ranges(c.box, "box");
  validate_ranges(c.polybag, "polybag");
  validate_ranges(c.envelope, "envelope");
  if (c.pile_probability < 0.0 || c.pile_probability > 1.0)
    throw ConfigError("scene config: pile_probability outside [0, 1]");
  if (c.conveyor_bounds.width() <= 0.0 || c.conveyor_bounds.height() <= 0.0)
    throw ConfigError("scene config: empty conveyor bounds");
}

// Deterministic for fixed (config, seed). Packages are drawn independently;
// with pile_probability a package is dropped onto an earlier one and raised
// so its base rests on the highest surface under its footprint center.
inline Scene generate_scene(const SceneConfig& config, uint64_t seed) {
  validate(config);
  RngStream rng(derive_seed(seed, "scene"));
  Scene scene;
  scene.seed = seed;
  scene.conveyor_bounds = config.conveyor_bounds;
  const Rect& b = config.conveyor_bounds;

  const int count =
      static_cast<int>(rng.uniform_int(config.count_min, config.count_max));
  scene.packages.reserve(count);

  const double wsum =
      config.weight_box + config.weight_polybag + config.weight_envelope;

  for (int i = 0; i < count; ++i) {
    PackageSpec p;
    p.id = i;

    const double ku = rng.uniform() * wsum;
    const KindRanges* r = nullptr;
    if (ku < config.weight_box) {
      p.kind = PackageKind::Box;
      r = &config.box;
    } else if (ku < config.weight_box + config.weight_polybag) {
      p.kind = PackageKind::Polybag;
      r = &config.polybag;
    } else {
      p.kind = PackageKind::Envelope;
      r = &config.envelope;
    }

    p.dims = {rng.uniform(r->len_min, r->len_max),
              rng.uniform(r->wid_min, r->wid_max),
              rng.uniform(r->hgt_min, r->hgt_max)};
    p.yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
    p.top_tilt = {rng.uniform(-r->tilt_max, r->tilt_max),
                  rng.uniform(-r->tilt_max, r->tilt_max)};

    double base_z = 0.0;
    Vec2 c;
    if (i > 0 && rng.uniform() < config.pile_probability) {
      const auto& base =
          scene.packages[static_cast<size_t>(rng.uniform_int(0, i - 1))];
      const double a = rng.uniform(-0.5, 0.5) * base.dims.x;
      const double bb = rng.uniform(-0.5, 0.5) * base.dims.y;
      c = Vec2{base.center.x, base.center.y} +
          base.axis_x() * a + base.axis_y() * bb;
      c.x = std::clamp(c.x, b.xmin, b.xmax - 1e-9);
      c.y = std::clamp(c.y, b.ymin, b.ymax - 1e-9);
      for (const auto& q : scene.packages)
        if (q.footprint_contains(c.x, c.y))
          base_z = std::max(base_z, q.top_surface_z(c.x, c.y));
    } else {
      c = {rng.uniform(b.xmin, b.xmax), rng.uniform(b.ymin, b.ymax)};
    }
    p.center = {c.x, c.y, base_z + p.dims.z * 0.5};
    scene.packages.push_back(p);
  }
  validate(scene);
  return scene;
}

// Top-down sensor rendering of a scene. EMPTY cells are conveyor (z = 0).
struct SensorFrame {
  static constexpr int kEmpty = -1;

  double resolution = 0.0;
  Grid<double> heightgrid;
  Grid<int> segmentgrid;
  std::map<int, PackageKind> kinds;  // package id -> type label

  const Rect& bounds() const { return heightgrid.bounds(); }
  int nx() const { return heightgrid.nx(); }
  int ny() const { return heightgrid.ny(); }

  // Point cloud, one (x, y, z) per non-empty cell, row-major order.
  std::vector<Vec3> points() const {
    std::vector<Vec3> pts;
    for (int iy = 0; iy < ny(); ++iy)
      for (int ix = 0; ix < nx(); ++ix)
        if (segmentgrid.at(ix, iy) != kEmpty)
          pts.push_back({heightgrid.center_x(ix), heightgrid.center_y(iy),
                         heightgrid.at(ix, iy)});
    return pts;
  }
};

// Z-buffer rendering at cell centers. Visibility ties (exact equal heights)
// keep the lower package id; a package surface at or below the conveyor
// plane does not claim the cell.
inline SensorFrame render_sensor(const Scene& scene, double resolution) {
  if (resolution < 0.002 || resolution > 0.02)
    throw ConfigError("render resolution outside [0.002, 0.02] m");
  SensorFrame frame;
  frame.resolution = resolution;
  frame.heightgrid = Grid<double>(scene.conveyor_bounds, resolution, 0.0);
  frame.segmentgrid =
      Grid<int>(scene.conveyor_bounds, resolution, SensorFrame::kEmpty);

  auto& hg = frame.heightgrid;
  auto& sg = frame.segmentgrid;
  for (const auto& p : scene.packages) {
    frame.kinds[p.id] = p.kind;
    const auto poly = p.footprint_polygon();
    double fxmin = poly[0].x, fxmax = poly[0].x;
    double fymin = poly[0].y, fymax = poly[0].y;
    for (const auto& v : poly) {
      fxmin = std::min(fxmin, v.x);
      fxmax = std::max(fxmax, v.x);
      fymin = std::min(fymin, v.y);
      fymax = std::max(fymax, v.y);
    }
    const int ix0 = std::max(0, hg.cell_x(fxmin));
    const int ix1 = std::min(hg.nx() - 1, hg.cell_x(fxmax));
    const int iy0 = std::max(0, hg.cell_y(fymin));
    const int iy1 = std::min(hg.ny() - 1, hg.cell_y(fymax));
    for (int iy = iy0; iy <= iy1; ++iy) {
      const double cy = hg.center_y(iy);
      for (int ix = ix0; ix <= ix1; ++ix) {
        const double cx = hg.center_x(ix);
        if (!p.footprint_contains(cx, cy)) continue;
        const double z = p.top_surface_z(cx, cy);
        if (z > hg.at(ix, iy)) {
          hg.at(ix, iy) = z;
          sg.at(ix, iy) = p.id;
        }
      }
    }
  }
  return frame;
}

struct SegmentSummary {
  int id = SensorFrame::kEmpty;
  PackageKind kind = PackageKind::Box;
  int cell_count = 0;
  Vec2 centroid;
  std::vector<Vec2> bounding_polygon;  // axis-aligned cell bounding box, CCW
};

// One summary per visible segment, sorted by id.
inline std::vector<SegmentSummary> visible_segments(const SensorFrame& frame) {
  struct Acc {
    int count = 0;
    double sx = 0.0, sy = 0.0;
    int ix0 = 0, ix1 = 0, iy0 = 0, iy1 = 0;
  };
  std::map<int, Acc> accs;
  const auto& sg = frame.segmentgrid;
  for (int iy = 0; iy < frame.ny(); ++iy) {
    for (int ix = 0; ix < frame.nx(); ++ix) {
      const int id = sg.at(ix, iy);
      if (id == SensorFrame::kEmpty) continue;
      auto [it, inserted] = accs.try_emplace(id);
      Acc& a = it->second;
      if (inserted) {
        a.ix0 = a.ix1 = ix;
        a.iy0 = a.iy1 = iy;
      } else {
        a.ix0 = std::min(a.ix0, ix);
        a.ix1 = std::max(a.ix1, ix);
        a.iy0 = std::min(a.iy0, iy);
        a.iy1 = std::max(a.iy1, iy);
      }
      ++a.count;
      a.sx += sg.center_x(ix);
      a.sy += sg.center_y(iy);
    }
  }
  std::vector<SegmentSummary> out;
  out.reserve(accs.size());
  for (const auto& [id, a] : accs) {
    SegmentSummary s;
    s.id = id;
    s.kind = frame.kinds.at(id);
    s.cell_count = a.count;
    s.centroid = {a.sx / a.count, a.sy / a.count};
    const double x0 = sg.center_x(a.ix0) - 0.5 * frame.resolution;
    const double x1 = sg.center_x(a.ix1) + 0.5 * frame.resolution;
    const double y0 = sg.center_y(a.iy0) - 0.5 * frame.resolution;
    const double y1 = sg.center_y(a.iy1) + 0.5 * frame.resolution;
    s.bounding_polygon = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace pickopt
