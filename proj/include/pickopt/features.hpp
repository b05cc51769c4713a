#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "pickopt/geometry.hpp"
#include "pickopt/pick.hpp"
#include "pickopt/scene.hpp"

namespace pickopt {

inline constexpr int kFeatureDim = 78;
inline constexpr double kHeightMapHalfWidth = 0.3;  // meters
inline constexpr int kHeightMapCells = 8;           // 8x8 block

struct FeatureVector {
  std::array<double, kFeatureDim> values{};

  double operator[](size_t i) const { return values[i]; }
  double& operator[](size_t i) { return values[i]; }
  bool operator==(const FeatureVector&) const = default;
};

// Canonical feature order. Indices: 0 pkg_height, 1 plane_rmse,
// 2 n_active_cups, 3 align_mean, 4 align_max, 5 n_neighbors, 6 rank_norm,
// 7 dist_boundary, 8 dist_centroid, 9..72 height map row-major,
// 73 hmap_var, 74 hmap_range, 75..77 kind one-hot.
inline const std::array<std::string, kFeatureDim>& feature_names() {
  static const std::array<std::string, kFeatureDim> names = [] {
    std::array<std::string, kFeatureDim> n;
    n[0] = "pkg_height";
    n[1] = "plane_rmse";
    n[2] = "n_active_cups";
    n[3] = "align_mean";
    n[4] = "align_max";
    n[5] = "n_neighbors";
    n[6] = "rank_norm";
    n[7] = "dist_boundary";
    n[8] = "dist_centroid";
    for (int iy = 0; iy < kHeightMapCells; ++iy)
      for (int ix = 0; ix < kHeightMapCells; ++ix)
        n[9 + iy * kHeightMapCells + ix] =
            "hmap_" + std::to_string(iy) + "_" + std::to_string(ix);
    n[73] = "hmap_var";
    n[74] = "hmap_range";
    n[75] = "kind_box";
    n[76] = "kind_polybag";
    n[77] = "kind_envelope";
    return n;
  }();
  return names;
}

inline int feature_index(const std::string& name) {
  const auto& names = feature_names();
  for (int i = 0; i < kFeatureDim; ++i)
    if (names[i] == name) return i;
  throw DataFormatError("unknown feature name: " + name);
}

// Per-segment statistics cached per frame so feature extraction does not
// rescan the grid for every action.
struct SegmentStat {
  int id = SensorFrame::kEmpty;
  int cell_count = 0;
  Vec2 centroid;
  double mean_z = 0.0;
  double plane_rmse = 0.0;
};

struct FrameContext {
  std::map<int, AdjacencyInfo> adjacency;
  std::map<int, SegmentStat> segments;
  std::vector<SegmentSummary> summaries;
};

namespace detail {

// Accumulates the stat of one segment by scanning the grid row-major; the
// cached and uncached feature paths must visit cells in the same order so
// their floating-point results match exactly.
inline std::map<int, SegmentStat> segment_stats(const SensorFrame& frame,
                                                int only_id = SensorFrame::kEmpty) {
  std::map<int, SegmentStat> stats;
  std::map<int, std::vector<Vec3>> pts;
  const auto& sg = frame.segmentgrid;
  const auto& hg = frame.heightgrid;
  std::map<int, double> sx, sy, sz;
  for (int iy = 0; iy < frame.ny(); ++iy)
    for (int ix = 0; ix < frame.nx(); ++ix) {
      const int id = sg.at(ix, iy);
      if (id == SensorFrame::kEmpty) continue;
      if (only_id != SensorFrame::kEmpty && id != only_id) continue;
      auto& st = stats[id];
      st.id = id;
      ++st.cell_count;
      sx[id] += hg.center_x(ix);
      sy[id] += hg.center_y(iy);
      sz[id] += hg.at(ix, iy);
      pts[id].push_back({hg.center_x(ix), hg.center_y(iy), hg.at(ix, iy)});
    }
  for (auto& [id, st] : stats) {
    st.centroid = {sx[id] / st.cell_count, sy[id] / st.cell_count};
    st.mean_z = sz[id] / st.cell_count;
    try {
      st.plane_rmse = fit_plane(pts[id]).rmse;
    } catch (const GeometryError&) {
      st.plane_rmse = 0.0;
    }
  }
  return stats;
}

// Distance from (x, y) to the nearest cell center not labeled `target`,
// searched in expanding square rings; cells beyond the conveyor edge count
// as non-target.
inline double boundary_distance(const SensorFrame& frame, int target,
                                double x, double y) {
  const auto& sg = frame.segmentgrid;
  const int cx = sg.cell_x(x), cy = sg.cell_y(y);
  const double res = frame.resolution;
  double best = std::numeric_limits<double>::infinity();
  auto visit = [&](int ix, int iy) {
    const bool inside =
        ix >= 0 && ix < sg.nx() && iy >= 0 && iy < sg.ny();
    if (inside && sg.at(ix, iy) == target) return;
    const double dx = sg.center_x(ix) - x;
    const double dy = sg.center_y(iy) - y;
    best = std::min(best, std::sqrt(dx * dx + dy * dy));
  };
  visit(cx, cy);
  const int max_rad = std::max(sg.nx(), sg.ny()) + 2;
  for (int rad = 1; rad <= max_rad; ++rad) {
    if (std::isfinite(best) && (rad - 1) * res > best) break;
    for (int ix = cx - rad; ix <= cx + rad; ++ix) {
      visit(ix, cy - rad);
      visit(ix, cy + rad);
    }
    for (int iy = cy - rad + 1; iy <= cy + rad - 1; ++iy) {
      visit(cx - rad, iy);
      visit(cx + rad, iy);
    }
  }
  return best;
}

inline FeatureVector compute_features_impl(const SensorFrame& frame,
                                           const AdjacencyInfo& adj,
                                           const SegmentStat& stat,
                                           const PickAction& action,
                                           const EoatModel& eoat) {
  FeatureVector phi;
  phi[0] = stat.mean_z;
  phi[1] = stat.plane_rmse;
  phi[2] = static_cast<double>(action.cups.size());

  double align_sum = 0.0, align_max = 0.0;
  for (int i : action.cups) {
    const Vec2 c = eoat.cup_position(i, action.x, action.y, action.r);
    const Vec3 n = surface_at(frame, c.x, c.y, eoat.cup_radius).normal;
    const double d = std::clamp(action.normal.dot(n), -1.0, 1.0);
    const double angle =
        std::min(std::acos(d), std::numbers::pi / 2.0);
    align_sum += angle;
    align_max = std::max(align_max, angle);
  }
  phi[3] = action.cups.empty() ? 0.0 : align_sum / action.cups.size();
  phi[4] = align_max;

  phi[5] = static_cast<double>(adj.neighbor_ids.size());
  phi[6] = static_cast<double>(adj.rank) / (1.0 + phi[5]);
  phi[7] = boundary_distance(frame, action.target_segment, action.x, action.y);
  phi[8] = (Vec2{action.x, action.y} - stat.centroid).norm();

  const HeightMap hm =
      local_height_map(frame, {action.x, action.y}, kHeightMapHalfWidth,
                       kHeightMapCells, 0.0);
  double sum = 0.0;
  double lo = hm.values[0], hi = hm.values[0];
  for (int i = 0; i < kHeightMapCells * kHeightMapCells; ++i) {
    const double v = hm.values[i];
    phi[9 + i] = v;
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double mean = sum / (kHeightMapCells * kHeightMapCells);
  double var = 0.0;
  for (int i = 0; i < kHeightMapCells * kHeightMapCells; ++i)
    var += (phi[9 + i] - mean) * (phi[9 + i] - mean);
  phi[73] = var / (kHeightMapCells * kHeightMapCells);
  phi[74] = hi - lo;

  const PackageKind kind = frame.kinds.at(action.target_segment);
  phi[75] = kind == PackageKind::Box ? 1.0 : 0.0;
  phi[76] = kind == PackageKind::Polybag ? 1.0 : 0.0;
  phi[77] = kind == PackageKind::Envelope ? 1.0 : 0.0;
  return phi;
}

}  // namespace detail

inline FrameContext make_context(const SensorFrame& frame) {
  FrameContext ctx;
  ctx.adjacency = adjacency_graph(frame);
  ctx.segments = detail::segment_stats(frame);
  ctx.summaries = visible_segments(frame);
  return ctx;
}

inline FeatureVector compute_features(const SensorFrame& frame,
                                      const std::map<int, AdjacencyInfo>& adjacency,
                                      const PickAction& action,
                                      const EoatModel& eoat = {}) {
  const auto it = adjacency.find(action.target_segment);
  if (action.target_segment == SensorFrame::kEmpty || it == adjacency.end())
    throw PipelineError("compute_features: target segment not visible");
  const auto stats = detail::segment_stats(frame, action.target_segment);
  return detail::compute_features_impl(frame, it->second,
                                       stats.at(action.target_segment), action,
                                       eoat);
}

inline FeatureVector compute_features(const SensorFrame& frame,
                                      const FrameContext& ctx,
                                      const PickAction& action,
                                      const EoatModel& eoat = {}) {
  const auto it = ctx.adjacency.find(action.target_segment);
  if (action.target_segment == SensorFrame::kEmpty ||
      it == ctx.adjacency.end())
    throw PipelineError("compute_features: target segment not visible");
  return detail::compute_features_impl(frame, it->second,
                                       ctx.segments.at(action.target_segment),
                                       action, eoat);
}

}  // namespace pickopt
