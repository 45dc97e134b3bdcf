#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace fitzcert {

template <typename H>
std::pair<Vector, double> zoom_maximize(H&& h, const Vector& lo, const Vector& hi, int k, double stop) {
  const Eigen::Index n = lo.size();
  Vector a = lo;
  Vector b = hi;
  Vector best = 0.5 * (lo + hi);
  double best_val = -std::numeric_limits<double>::infinity();
  Vector y(n);
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int round = 0; round < 200; ++round) {
    const Vector cell = (b - a) / static_cast<double>(k - 1);
    std::fill(idx.begin(), idx.end(), 0);
    for (;;) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const int j = idx[static_cast<std::size_t>(i)];
        y[i] = j == k - 1 ? b[i] : a[i] + j * cell[i];
      }
      const double val = h(y);
      if (val > best_val) {
        best_val = val;
        best = y;
      }
      Eigen::Index i = 0;
      while (i < n && ++idx[static_cast<std::size_t>(i)] == k) {
        idx[static_cast<std::size_t>(i)] = 0;
        ++i;
      }
      if (i == n) { break; }
    }
    if (cell.maxCoeff() <= stop || !std::isfinite(best_val)) { break; }
    a = (best - 2.0 * cell).cwiseMax(lo);
    b = (best + 2.0 * cell).cwiseMin(hi);
  }
  return {best, best_val};
}

} // namespace fitzcert
