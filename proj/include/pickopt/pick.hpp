#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "pickopt/geometry.hpp"
#include "pickopt/rng.hpp"
#include "pickopt/scene.hpp"
#include "pickopt/vec.hpp"

namespace pickopt {

// 8 suction cups on the two diagonals of the footprint square: cups 0..3
// outer corners, cups 4..7 inner, counter-clockwise from (-,-).
struct EoatModel {
  std::array<Vec2, 8> cup_centers{
      Vec2{-0.105, -0.105}, Vec2{0.105, -0.105}, Vec2{0.105, 0.105},
      Vec2{-0.105, 0.105},  Vec2{-0.045, -0.045}, Vec2{0.045, -0.045},
      Vec2{0.045, 0.045},   Vec2{-0.045, 0.045}};
  double cup_radius = 0.02;
  double footprint = 0.25;
  double seal_rmse_max = 0.005;
  double seal_dz_max = 0.01;

  Vec2 cup_position(int i, double x, double y, double r) const {
    const Vec2 p = cup_centers[i].rotated(r);
    return {x + p.x, y + p.y};
  }
};

struct PickAction {
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;  // rotation about the surface normal, (-pi, pi]
  std::vector<int> cups;
  double z = 0.0;
  Vec3 normal{0.0, 0.0, 1.0};
  int target_segment = SensorFrame::kEmpty;
};

enum class PickResult : int { Success = 0, Missed = 1, Infeasible = 2 };

inline const char* to_string(PickResult r) {
  switch (r) {
    case PickResult::Success: return "success";
    case PickResult::Missed: return "missed";
    case PickResult::Infeasible: return "infeasible";
  }
  return "missed";
}

inline PickResult pick_result_from_string(const std::string& s) {
  if (s == "success") return PickResult::Success;
  if (s == "missed") return PickResult::Missed;
  if (s == "infeasible") return PickResult::Infeasible;
  throw DataFormatError("unknown pick result: " + s);
}

struct PickOutcome {
  PickResult result = PickResult::Missed;
  bool multipick = false;
  double p_true = 0.0;  // exactly the probability used for sampling
};

namespace detail {

// Cells of the frame whose centers lie within `radius` of (cx, cy). Returns
// false if the disk extends past the conveyor bounds.
inline bool disk_cells(const SensorFrame& frame, double cx, double cy,
                       double radius, std::vector<std::pair<int, int>>& out) {
  out.clear();
  const Rect& b = frame.bounds();
  if (cx - radius < b.xmin || cx + radius > b.xmax || cy - radius < b.ymin ||
      cy + radius > b.ymax)
    return false;
  const auto& hg = frame.heightgrid;
  const int ix0 = std::max(0, hg.cell_x(cx - radius));
  const int ix1 = std::min(hg.nx() - 1, hg.cell_x(cx + radius));
  const int iy0 = std::max(0, hg.cell_y(cy - radius));
  const int iy1 = std::min(hg.ny() - 1, hg.cell_y(cy + radius));
  const double r2 = radius * radius;
  for (int iy = iy0; iy <= iy1; ++iy) {
    const double dy = hg.center_y(iy) - cy;
    for (int ix = ix0; ix <= ix1; ++ix) {
      const double dx = hg.center_x(ix) - cx;
      if (dx * dx + dy * dy <= r2) out.emplace_back(ix, iy);
    }
  }
  return true;
}

}  // namespace detail

// Deterministic cup activation. Cup i is active iff its disk (rotated by r,
// translated to the pick point) lies entirely on the target segment, the
// local plane-fit rmse under the disk is within seal_rmse_max, and the
// surface height at the cup center is within seal_dz_max of the height at
// the pick point.
inline std::vector<int> activate_cups(const SensorFrame& frame,
                                      const EoatModel& eoat, double x,
                                      double y, double r) {
  std::vector<int> active;
  if (!frame.bounds().contains(x, y)) return active;
  const auto& hg = frame.heightgrid;
  const auto& sg = frame.segmentgrid;
  const int target = sg.at(hg.cell_x(x), hg.cell_y(y));
  if (target == SensorFrame::kEmpty) return active;
  const double pick_z = hg.at(hg.cell_x(x), hg.cell_y(y));

  std::vector<std::pair<int, int>> cells;
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) {
    const Vec2 c = eoat.cup_position(i, x, y, r);
    if (!detail::disk_cells(frame, c.x, c.y, eoat.cup_radius, cells)) continue;
    if (cells.empty()) continue;

    bool on_target = true;
    pts.clear();
    for (const auto& [ix, iy] : cells) {
      if (sg.at(ix, iy) != target) {
        on_target = false;
        break;
      }
      pts.push_back({hg.center_x(ix), hg.center_y(iy), hg.at(ix, iy)});
    }
    if (!on_target) continue;

    double rmse = 0.0;
    try {
      rmse = fit_plane(pts).rmse;
    } catch (const GeometryError&) {
      continue;
    }
    if (rmse > eoat.seal_rmse_max) continue;

    const double cup_z = hg.at(hg.cell_x(c.x), hg.cell_y(c.y));
    if (std::abs(cup_z - pick_z) > eoat.seal_dz_max) continue;
    active.push_back(i);
  }
  return active;
}

// Pick action with z / normal / cups derived from the frame; the stored
// fields are never allowed to go stale relative to (x, y, r).
inline PickAction make_action(const SensorFrame& frame, const EoatModel& eoat,
                              double x, double y, double r) {
  PickAction a;
  a.x = x;
  a.y = y;
  a.r = wrap_angle(r);
  const SurfaceInfo s = surface_at(frame, x, y);
  a.z = s.z;
  a.normal = s.normal;
  a.target_segment = s.segment_id;
  a.cups = activate_cups(frame, eoat, x, y, a.r);
  return a;
}

// Heuristic control-arm candidate sampler: first candidate at the segment
// centroid aligned to its principal axis, the rest jittered uniformly inside
// the segment with rotation jitter of +-pi/4.
inline std::vector<PickAction> sample_candidates(const SensorFrame& frame,
                                                 const SegmentSummary& segment,
                                                 int k, uint64_t seed,
                                                 const EoatModel& eoat = {}) {
  std::vector<PickAction> out;
  if (segment.cell_count < 10 || k < 1) return out;

  const auto& sg = frame.segmentgrid;
  const double bx0 = segment.bounding_polygon[0].x;
  const double by0 = segment.bounding_polygon[0].y;
  const double bx1 = segment.bounding_polygon[2].x;
  const double by1 = segment.bounding_polygon[2].y;

  // Principal axis of member-cell centers.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  int n = 0;
  const int ix0 = std::max(0, sg.cell_x(bx0));
  const int ix1 = std::min(sg.nx() - 1, sg.cell_x(bx1));
  const int iy0 = std::max(0, sg.cell_y(by0));
  const int iy1 = std::min(sg.ny() - 1, sg.cell_y(by1));
  for (int iy = iy0; iy <= iy1; ++iy)
    for (int ix = ix0; ix <= ix1; ++ix) {
      if (sg.at(ix, iy) != segment.id) continue;
      const double cx = sg.center_x(ix), cy = sg.center_y(iy);
      sx += cx;
      sy += cy;
      sxx += cx * cx;
      sxy += cx * cy;
      syy += cy * cy;
      ++n;
    }
  const double mx = sx / n, my = sy / n;
  const double cxx = sxx / n - mx * mx;
  const double cxy = sxy / n - mx * my;
  const double cyy = syy / n - my * my;
  const double axis = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);

  // The centroid of a concave or partly occluded footprint can land on a
  // different segment; fall back to the member cell center nearest to it.
  double fx = segment.centroid.x, fy = segment.centroid.y;
  if (sg.at(sg.cell_x(fx), sg.cell_y(fy)) != segment.id) {
    double best = std::numeric_limits<double>::infinity();
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int ix = ix0; ix <= ix1; ++ix) {
        if (sg.at(ix, iy) != segment.id) continue;
        const double dx = sg.center_x(ix) - segment.centroid.x;
        const double dy = sg.center_y(iy) - segment.centroid.y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best) {
          best = d2;
          fx = sg.center_x(ix);
          fy = sg.center_y(iy);
        }
      }
  }

  RngStream rng(seed);
  out.reserve(k);
  out.push_back(make_action(frame, eoat, fx, fy, axis));
  for (int j = 1; j < k; ++j) {
    double px = segment.centroid.x, py = segment.centroid.y;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const double ux = rng.uniform(bx0, bx1);
      const double uy = rng.uniform(by0, by1);
      if (!frame.bounds().contains(ux, uy)) continue;
      if (sg.at(sg.cell_x(ux), sg.cell_y(uy)) != segment.id) continue;
      px = ux;
      py = uy;
      break;
    }
    const double pr = axis + rng.uniform(-std::numbers::pi / 4.0,
                                         std::numbers::pi / 4.0);
    out.push_back(make_action(frame, eoat, px, py, pr));
  }
  return out;
}

struct WorkspaceConfig {
  Vec3 arm_base{0.6, -0.4, 0.0};  // long-edge midpoint, 0.4 m back
  double reach = 1.831;           // meters
  double tilt_max = 0.5;          // radians from vertical
  int min_cups = 1;
};

inline bool check_feasible(const PickAction& action,
                           const WorkspaceConfig& ws) {
  const Vec3 d{action.x - ws.arm_base.x, action.y - ws.arm_base.y,
               action.z - ws.arm_base.z};
  if (d.norm() > ws.reach) return false;
  if (tilt_from_vertical(action.normal) > ws.tilt_max) return false;
  return static_cast<int>(action.cups.size()) >= ws.min_cups;
}

// A pick lifts a second package when any active cup overlaps a non-target
// segment by >= half its disk area with that surface within the seal height
// budget of the pick surface (the EOAT face sits at the pick-point height,
// so a cup hovering over a lower package cannot seal against it).
inline bool detect_multipick(const SensorFrame& frame, const EoatModel& eoat,
                             const PickAction& action) {
  const auto& hg = frame.heightgrid;
  const auto& sg = frame.segmentgrid;
  if (!frame.bounds().contains(action.x, action.y)) return false;
  const double pick_z = hg.at(hg.cell_x(action.x), hg.cell_y(action.y));
  std::vector<std::pair<int, int>> cells;
  for (int i : action.cups) {
    const Vec2 c = eoat.cup_position(i, action.x, action.y, action.r);
    detail::disk_cells(frame, c.x, c.y, eoat.cup_radius, cells);
    if (cells.empty()) continue;
    std::map<int, int> overlap;
    for (const auto& [ix, iy] : cells) {
      const int id = sg.at(ix, iy);
      if (id == SensorFrame::kEmpty || id == action.target_segment) continue;
      if (std::abs(hg.at(ix, iy) - pick_z) > eoat.seal_dz_max) continue;
      ++overlap[id];
    }
    for (const auto& [id, cnt] : overlap)
      if (2 * cnt >= static_cast<int>(cells.size())) return true;
  }
  return false;
}

}  // namespace pickopt
