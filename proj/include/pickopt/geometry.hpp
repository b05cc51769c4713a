#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "pickopt/errors.hpp"
#include "pickopt/scene.hpp"
#include "pickopt/vec.hpp"

namespace pickopt {

struct PlaneFit {
  Vec3 normal{0.0, 0.0, 1.0};  // unit, z > 0
  Vec3 point;                  // centroid of the fitted points
  double rmse = 0.0;           // orthogonal RMS distance
};

// Total-least-squares plane through a point set: the normal is the
// eigenvector of the point covariance with the smallest eigenvalue.
inline PlaneFit fit_plane(const std::vector<Vec3>& points) {
  const size_t n = points.size();
  if (n < 3) throw GeometryError("fit_plane: fewer than 3 points");

  Vec3 c{0.0, 0.0, 0.0};
  for (const auto& p : points) c = c + p;
  c = c * (1.0 / static_cast<double>(n));

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d d(p.x - c.x, p.y - c.y, p.z - c.z);
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const Eigen::Vector3d evals = es.eigenvalues();  // ascending
  if (evals(1) <= 1e-12)
    throw GeometryError("fit_plane: collinear or degenerate points");

  Eigen::Vector3d nrm = es.eigenvectors().col(0);
  if (nrm(2) < 0.0) nrm = -nrm;
  if (nrm(2) <= 1e-12)
    throw GeometryError("fit_plane: vertical plane, cannot orient z-up");
  nrm.normalize();

  PlaneFit fit;
  fit.normal = {nrm(0), nrm(1), nrm(2)};
  fit.point = c;
  fit.rmse = std::sqrt(std::max(0.0, evals(0)));
  return fit;
}

struct SurfaceInfo {
  double z = 0.0;
  Vec3 normal{0.0, 0.0, 1.0};
  int segment_id = SensorFrame::kEmpty;
};

// Surface height/normal under a query point. The normal comes from a plane
// fit over same-segment cells within patch_radius; patches too small or too
// thin to fit fall back to the vertical normal.
inline SurfaceInfo surface_at(const SensorFrame& frame, double x, double y,
                              double patch_radius = 0.05) {
  if (!frame.bounds().contains(x, y))
    throw GeometryError("surface_at: query outside conveyor bounds");
  const auto& hg = frame.heightgrid;
  const auto& sg = frame.segmentgrid;
  const int cx = hg.cell_x(x);
  const int cy = hg.cell_y(y);

  SurfaceInfo info;
  info.segment_id = sg.at(cx, cy);
  if (info.segment_id == SensorFrame::kEmpty) return info;
  info.z = hg.at(cx, cy);

  const int w = static_cast<int>(std::ceil(patch_radius / frame.resolution));
  const int ix0 = std::max(0, cx - w), ix1 = std::min(hg.nx() - 1, cx + w);
  const int iy0 = std::max(0, cy - w), iy1 = std::min(hg.ny() - 1, cy + w);
  std::vector<Vec3> pts;
  pts.reserve(static_cast<size_t>(ix1 - ix0 + 1) * (iy1 - iy0 + 1));
  const double r2 = patch_radius * patch_radius;
  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      if (sg.at(ix, iy) != info.segment_id) continue;
      const double dx = hg.center_x(ix) - x;
      const double dy = hg.center_y(iy) - y;
      if (dx * dx + dy * dy > r2) continue;
      pts.push_back({hg.center_x(ix), hg.center_y(iy), hg.at(ix, iy)});
    }
  }
  try {
    info.normal = fit_plane(pts).normal;
  } catch (const GeometryError&) {
    info.normal = {0.0, 0.0, 1.0};
  }
  return info;
}

struct HeightMap {
  int g = 0;            // grid is g x g
  Vec2 center;
  double extent = 0.0;  // half-width d
  double fill_value = 0.0;
  std::vector<double> values;  // row-major, values[iy * g + ix]

  double at(int ix, int iy) const { return values[iy * g + ix]; }
  double& at(int ix, int iy) { return values[iy * g + ix]; }
};

// G x G mean-pooled height map over [center - d, center + d]^2. Cells with no
// sensor coverage (outside conveyor bounds) take fill_value. Mean (not max)
// pooling keeps boundary-cell values continuous in the pick-point offset,
// which downstream tree models rely on to recover step directions.
inline HeightMap local_height_map(const SensorFrame& frame, Vec2 center,
                                  double d, int g, double fill_value = 0.0) {
  if (d <= 0.0) throw ConfigError("local_height_map: d must be > 0");
  if (g < 2) throw ConfigError("local_height_map: G must be >= 2");
  HeightMap hm;
  hm.g = g;
  hm.center = center;
  hm.extent = d;
  hm.fill_value = fill_value;
  hm.values.assign(static_cast<size_t>(g) * g, fill_value);

  const auto& hg = frame.heightgrid;
  const double cell = 2.0 * d / g;
  for (int iy = 0; iy < g; ++iy) {
    const double y0 = center.y - d + iy * cell;
    const double y1 = y0 + cell;
    for (int ix = 0; ix < g; ++ix) {
      const double x0 = center.x - d + ix * cell;
      const double x1 = x0 + cell;
      // Source cells whose centers fall in [x0, x1) x [y0, y1).
      const int sx0 = std::max(0, hg.cell_x(x0));
      const int sx1 = std::min(hg.nx() - 1, hg.cell_x(x1));
      const int sy0 = std::max(0, hg.cell_y(y0));
      const int sy1 = std::min(hg.ny() - 1, hg.cell_y(y1));
      double sum = 0.0;
      int cnt = 0;
      for (int sy = sy0; sy <= sy1; ++sy) {
        const double cyy = hg.center_y(sy);
        if (cyy < y0 || cyy >= y1) continue;
        for (int sx = sx0; sx <= sx1; ++sx) {
          const double cxx = hg.center_x(sx);
          if (cxx < x0 || cxx >= x1) continue;
          sum += hg.at(sx, sy);
          ++cnt;
        }
      }
      hm.at(ix, iy) = cnt ? sum / cnt : fill_value;
    }
  }
  return hm;
}

struct AdjacencyInfo {
  int segment_id = SensorFrame::kEmpty;
  std::set<int> neighbor_ids;
  int rank = 1;      // 1 = highest among itself and its neighbors
  int n_higher = 0;  // rank = 1 + n_higher
};

// Two segments are neighbors iff any of their cells lie within
// adjacency_gap cells (Chebyshev distance) of each other. Segment height is
// the mean cell z; rank counts strictly higher neighbors, equal heights
// breaking toward the lower segment id.
inline std::map<int, AdjacencyInfo> adjacency_graph(const SensorFrame& frame,
                                                    int adjacency_gap = 2) {
  const auto& sg = frame.segmentgrid;
  const auto& hg = frame.heightgrid;
  std::map<int, AdjacencyInfo> out;
  std::map<int, double> height_sum;
  std::map<int, int> cell_count;

  for (int iy = 0; iy < frame.ny(); ++iy) {
    for (int ix = 0; ix < frame.nx(); ++ix) {
      const int id = sg.at(ix, iy);
      if (id == SensorFrame::kEmpty) continue;
      auto& info = out[id];
      info.segment_id = id;
      height_sum[id] += hg.at(ix, iy);
      ++cell_count[id];
      const int jx1 = std::min(frame.nx() - 1, ix + adjacency_gap);
      const int jy0 = std::max(0, iy - adjacency_gap);
      const int jy1 = std::min(frame.ny() - 1, iy + adjacency_gap);
      for (int jy = jy0; jy <= jy1; ++jy) {
        for (int jx = ix; jx <= jx1; ++jx) {
          const int jd = sg.at(jx, jy);
          if (jd == SensorFrame::kEmpty || jd == id) continue;
          info.neighbor_ids.insert(jd);
          out[jd].segment_id = jd;
          out[jd].neighbor_ids.insert(id);
        }
      }
    }
  }

  std::map<int, double> mean_height;
  for (const auto& [id, sum] : height_sum) mean_height[id] = sum / cell_count[id];
  for (auto& [id, info] : out) {
    int higher = 0;
    for (int nb : info.neighbor_ids) {
      const double hn = mean_height.at(nb);
      const double hs = mean_height.at(id);
      if (hn > hs || (hn == hs && nb < id)) ++higher;
    }
    info.n_higher = higher;
    info.rank = 1 + higher;
  }
  return out;
}

// Mean cell height per segment, matching the ranking heights used by
// adjacency_graph.
inline std::map<int, double> segment_mean_heights(const SensorFrame& frame) {
  std::map<int, double> sum;
  std::map<int, int> count;
  for (int iy = 0; iy < frame.ny(); ++iy)
    for (int ix = 0; ix < frame.nx(); ++ix) {
      const int id = frame.segmentgrid.at(ix, iy);
      if (id == SensorFrame::kEmpty) continue;
      sum[id] += frame.heightgrid.at(ix, iy);
      ++count[id];
    }
  for (auto& [id, s] : sum) s /= count[id];
  return sum;
}

}  // namespace pickopt
