#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "pickopt/errors.hpp"

namespace pickopt {

// Row-major dense feature matrix.
struct DataMatrix {
  size_t n = 0;
  size_t d = 0;
  std::vector<double> values;

  DataMatrix() = default;
  DataMatrix(size_t rows, size_t dim)
      : n(rows), d(dim), values(rows * dim, 0.0) {}

  const double* row(size_t i) const { return values.data() + i * d; }
  double* row(size_t i) { return values.data() + i * d; }
  double at(size_t i, size_t j) const { return values[i * d + j]; }
  double& at(size_t i, size_t j) { return values[i * d + j]; }

  void add_row(const std::vector<double>& r) {
    if (d == 0) d = r.size();
    if (r.size() != d) throw PipelineError("DataMatrix: ragged row");
    values.insert(values.end(), r.begin(), r.end());
    ++n;
  }
};

}  // namespace pickopt
