#pragma once

#include <optional>
#include <vector>

#include "defectgeom/geometry.hpp"
#include "defectgeom/grid.hpp"

namespace defectgeom {

struct TransportOptions {
  // RK4 substep length as a fraction of the grid spacing.
  double substep = 0.5;
  bool record_trace = true;
};

struct TransportResult {
  Vec3 final_vector{0.0, 0.0, 0.0};
  std::vector<Vec3> trace;  // one entry per path vertex
  double metric_length = 0.0;
  std::optional<Vec3> gap;  // set for closed paths
};

// dv^i = -G^i_{jb} v^j dx_b with G^i_{jb} = ginv_il Gamma_{l;jb}; ginv is the
// exact inverse of the paired metric (identity when none is paired).
TransportResult parallel_transport(const Connection& c, const Vec3& v0, const Polyline& path,
                                   const TransportOptions& opt = {});

struct HolonomyResult {
  Vec3 gap{0.0, 0.0, 0.0};
  Vec3 predicted{0.0, 0.0, 0.0};
  double area = 0.0;  // signed: positive for counterclockwise loops
};

// Gap from the transport ODE and its small-loop prediction
// -sign(area) * int_S ginv_il eps_zqm R_{l;nmq} v0_n / 2 dS, S = cells enclosed by the
// loop, ginv the exact inverse of the paired metric (identity when none).
HolonomyResult holonomy_gap(const Connection& c, const Curvature& r, const Polyline& loop, const Vec3& v0,
                            const TransportOptions& opt = {});
HolonomyResult holonomy_gap(const Connection& c, const Metric& m, const Polyline& loop, const Vec3& v0,
                            const TransportOptions& opt = {});

struct GeodesicOptions {
  double step = 0.5;  // fraction of h
};

struct GeodesicResult {
  std::vector<Point2> points;
  std::vector<Vec3> tangents;
  bool exited = false;
  double arc_length = 0.0;

  Polyline path() const;
};

// dx_b/ds = tau_b, dtau^l/ds = -G^l_{jb} tau^j tau^b. tau0 is normalized with the
// paired metric at the start point. Stops early (exited = true) at the grid edge.
GeodesicResult geodesic_trace(const Connection& c, Point2 start, const Vec3& tau0, double arc_length,
                              const GeodesicOptions& opt = {});

// int sqrt(g_ij dx_i dx_j), midpoint rule on pieces no longer than max_step (default h/2).
double metric_length(const Metric& m, const Polyline& path, double max_step = 0.0);

// g_ij a_i b_j with g bilinearly sampled.
double metric_inner(const Metric& m, Point2 p, const Vec3& a, const Vec3& b);

}  // namespace defectgeom
