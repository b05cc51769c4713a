#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pickopt/vec.hpp"

namespace pickopt {

// Row-major 2-D grid over an axis-aligned rectangle. Cell (ix, iy) covers
// [xmin + ix*res, xmin + (ix+1)*res) x [ymin + iy*res, ...), center at +res/2.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(const Rect& bounds, double res, T fill)
      : bounds_(bounds),
        res_(res),
        nx_(static_cast<int>(std::llround(bounds.width() / res))),
        ny_(static_cast<int>(std::llround(bounds.height() / res))),
        data_(static_cast<size_t>(nx_) * static_cast<size_t>(ny_), fill) {
    assert(nx_ > 0 && ny_ > 0);
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double resolution() const { return res_; }
  const Rect& bounds() const { return bounds_; }

  bool in_bounds(int ix, int iy) const {
    return ix >= 0 && ix < nx_ && iy >= 0 && iy < ny_;
  }

  // Cell containing a world point; caller checks in_bounds first.
  int cell_x(double x) const {
    return static_cast<int>(std::floor((x - bounds_.xmin) / res_));
  }
  int cell_y(double y) const {
    return static_cast<int>(std::floor((y - bounds_.ymin) / res_));
  }

  double center_x(int ix) const { return bounds_.xmin + (ix + 0.5) * res_; }
  double center_y(int iy) const { return bounds_.ymin + (iy + 0.5) * res_; }

  T& at(int ix, int iy) { return data_[static_cast<size_t>(iy) * nx_ + ix]; }
  const T& at(int ix, int iy) const {
    return data_[static_cast<size_t>(iy) * nx_ + ix];
  }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  Rect bounds_;
  double res_ = 0.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<T> data_;
};

}  // namespace pickopt
