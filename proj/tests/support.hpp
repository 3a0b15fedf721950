#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "defectgeom/grid.hpp"

namespace testsupport {

using namespace defectgeom;

inline double second_derivative_scale(const TensorField& e) {
  const TensorField ex = partial(e, Axis::x), ey = partial(e, Axis::y);
  return std::max({partial(ex, Axis::x).max_abs(), partial(ex, Axis::y).max_abs(), partial(ey, Axis::y).max_abs()});
}

inline double gradient_scale(const TensorField& f) {
  return std::max(partial(f, Axis::x).max_abs(), partial(f, Axis::y).max_abs());
}

inline double observed_order(double err_coarse, double err_fine, double h_coarse, double h_fine) {
  return std::log(err_coarse / err_fine) / std::log(h_coarse / h_fine);
}

// max over nodes farther than r0 from c of |a - b|, and of |b|.
inline std::pair<double, double> masked_diff(const TensorField& a, const TensorField& b, Point2 c, double r0) {
  double d = 0.0, m = 0.0;
  const Grid2D& g = a.grid();
  for (int n = 0; n < g.nodes(); ++n) {
    const Point2 p = g.position(n);
    if (std::hypot(p.x - c.x, p.y - c.y) <= r0) continue;
    for (int k = 0; k < a.ncomp(); ++k) {
      d = std::max(d, std::abs(a(n, k) - b(n, k)));
      m = std::max(m, std::abs(b(n, k)));
    }
  }
  return {d, m};
}

inline double max_diff(const TensorField& a, const TensorField& b) { return (a - b).max_abs(); }

}  // namespace testsupport
