#include "defectgeom/transport.hpp"

#include <cmath>
#include <stdexcept>

namespace defectgeom {

namespace {

// Raised connection G^i_{jb} at p, b restricted to the plane.
struct RaisedSample {
  double g[3][3][2];
};

RaisedSample raised_at(const Connection& c, Point2 p) {
  const SmallTensor gm = sample(c.gamma, p);
  RaisedSample r{};
  SmallTensor inv = SmallTensor::identity();
  if (c.metric) inv = inverse3(sample(c.metric->g, p));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int b = 0; b < 2; ++b) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l) s += inv[at2(i, l)] * gm[at3(l, j, b)];
        r.g[i][j][b] = s;
      }
  return r;
}

Vec3 transport_rhs(const RaisedSample& r, const Vec3& v, double dx, double dy) {
  Vec3 out{0.0, 0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) s += (r.g[i][j][0] * dx + r.g[i][j][1] * dy) * v[j];
    out[i] = -s;
  }
  return out;
}

Vec3 axpy(const Vec3& v, double a, const Vec3& k) { return {v[0] + a * k[0], v[1] + a * k[1], v[2] + a * k[2]}; }

void require_inside(const Grid2D& g, const Polyline& path, const char* what) {
  for (const Point2& v : path.vertices)
    if (!g.contains(v)) throw std::domain_error(std::string(what) + ": path leaves the grid");
}

}  // namespace

TransportResult parallel_transport(const Connection& c, const Vec3& v0, const Polyline& path,
                                   const TransportOptions& opt) {
  const Grid2D& g = c.gamma.grid();
  require_inside(g, path, "parallel_transport");
  TransportResult res;
  Vec3 v = v0;
  if (opt.record_trace) res.trace.push_back(v);
  for (int s = 0; s < path.segments(); ++s) {
    const auto pts = subdivide_segment(path.vertices[s], path.vertices[s + 1], opt.substep * g.h);
    for (std::size_t q = 1; q < pts.size(); ++q) {
      const Point2 a = pts[q - 1], b = pts[q];
      const double dx = b.x - a.x, dy = b.y - a.y;
      const Point2 mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
      const RaisedSample ra = raised_at(c, a), rm = raised_at(c, mid), rb = raised_at(c, b);
      const Vec3 k1 = transport_rhs(ra, v, dx, dy);
      const Vec3 k2 = transport_rhs(rm, axpy(v, 0.5, k1), dx, dy);
      const Vec3 k3 = transport_rhs(rm, axpy(v, 0.5, k2), dx, dy);
      const Vec3 k4 = transport_rhs(rb, axpy(v, 1.0, k3), dx, dy);
      for (int i = 0; i < 3; ++i) v[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }
    if (opt.record_trace) res.trace.push_back(v);
  }
  res.final_vector = v;
  if (c.metric) res.metric_length = metric_length(*c.metric, path);
  else res.metric_length = path.length();
  if (path.closed) res.gap = Vec3{v[0] - v0[0], v[1] - v0[1], v[2] - v0[2]};
  return res;
}

HolonomyResult holonomy_gap(const Connection& c, const Curvature& r, const Polyline& loop, const Vec3& v0,
                            const TransportOptions& opt) {
  if (!loop.closed) throw std::invalid_argument("holonomy_gap: loop is not closed");
  require_same_grid(c.gamma.grid(), r.riemann.grid(), "holonomy_gap");
  const Grid2D& g = c.gamma.grid();
  HolonomyResult out;
  out.gap = *parallel_transport(c, v0, loop, opt).gap;
  out.area = loop.signed_area();
  const SurfaceRegion s = SurfaceRegion::from_polygon(g, loop);
  const auto w = s.node_weights();
  const double orient = out.area >= 0.0 ? 1.0 : -1.0;
  for (int n = 0; n < g.nodes(); ++n) {
    if (w[n] == 0.0) continue;
    const auto rv = r.riemann.at_node(n);
    double low[3];
    for (int l = 0; l < 3; ++l) {
      low[l] = 0.0;
      for (int nn = 0; nn < 3; ++nn) low[l] += 0.5 * (rv[at4(l, nn, Y, X)] - rv[at4(l, nn, X, Y)]) * v0[nn];
    }
    const SmallTensor inv = c.metric ? inverse3(c.metric->g.value(n)) : SmallTensor::identity();
    for (int i = 0; i < 3; ++i) {
      double s = 0.0;
      for (int l = 0; l < 3; ++l) s += inv[at2(i, l)] * low[l];
      out.predicted[i] -= orient * w[n] * s;
    }
  }
  return out;
}

HolonomyResult holonomy_gap(const Connection& c, const Metric& m, const Polyline& loop, const Vec3& v0,
                            const TransportOptions& opt) {
  return holonomy_gap(c, riemann_curvature(c.gamma, m), loop, v0, opt);
}

Polyline GeodesicResult::path() const {
  if (points.size() < 2) return Polyline({points.front(), points.front()}, false);
  return Polyline(points, false);
}

GeodesicResult geodesic_trace(const Connection& c, Point2 start, const Vec3& tau0, double arc_length,
                              const GeodesicOptions& opt) {
  const Grid2D& g = c.gamma.grid();
  if (!g.contains(start)) throw std::domain_error("geodesic_trace: start point lies outside the grid");
  if (!(arc_length >= 0.0)) throw std::invalid_argument("geodesic_trace: negative arc length");
  Vec3 tau = tau0;
  const double norm2 = c.metric ? metric_inner(*c.metric, start, tau, tau)
                                : tau[0] * tau[0] + tau[1] * tau[1] + tau[2] * tau[2];
  if (!(norm2 > 0.0)) throw std::invalid_argument("geodesic_trace: initial tangent has zero length");
  for (double& t : tau) t /= std::sqrt(norm2);

  GeodesicResult res;
  res.points.push_back(start);
  res.tangents.push_back(tau);
  const int steps = std::max(1, static_cast<int>(std::ceil(arc_length / (opt.step * g.h) - 1e-12)));
  const double ds = arc_length / steps;

  struct State {
    double x, y;
    Vec3 t;
  };
  auto rhs = [&](const State& s, bool& ok) -> State {
    const Point2 p{s.x, s.y};
    if (!g.contains(p)) {
      ok = false;
      return {0.0, 0.0, {0.0, 0.0, 0.0}};
    }
    const RaisedSample r = raised_at(c, p);
    return {s.t[0], s.t[1], transport_rhs(r, s.t, s.t[0], s.t[1])};
  };
  auto add = [](const State& s, double a, const State& k) {
    return State{s.x + a * k.x, s.y + a * k.y, axpy(s.t, a, k.t)};
  };

  State s{start.x, start.y, tau};
  for (int n = 0; n < steps; ++n) {
    bool ok = true;
    const State k1 = rhs(s, ok);
    const State k2 = ok ? rhs(add(s, 0.5 * ds, k1), ok) : k1;
    const State k3 = ok ? rhs(add(s, 0.5 * ds, k2), ok) : k2;
    const State k4 = ok ? rhs(add(s, ds, k3), ok) : k3;
    State next{s.x + ds / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
               s.y + ds / 6.0 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y), s.t};
    for (int i = 0; i < 3; ++i) next.t[i] += ds / 6.0 * (k1.t[i] + 2 * k2.t[i] + 2 * k3.t[i] + k4.t[i]);
    if (!ok || !g.contains({next.x, next.y})) {
      res.exited = true;
      break;
    }
    s = next;
    res.points.push_back({s.x, s.y});
    res.tangents.push_back(s.t);
    res.arc_length += ds;
  }
  return res;
}

double metric_inner(const Metric& m, Point2 p, const Vec3& a, const Vec3& b) {
  const SmallTensor gv = sample(m.g, p);
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += gv[at2(i, j)] * a[i] * b[j];
  return s;
}

double metric_length(const Metric& m, const Polyline& path, double max_step) {
  const Grid2D& g = m.g.grid();
  require_inside(g, path, "metric_length");
  if (max_step <= 0.0) max_step = 0.5 * g.h;
  double len = 0.0;
  for (int s = 0; s < path.segments(); ++s) {
    const auto pts = subdivide_segment(path.vertices[s], path.vertices[s + 1], max_step);
    for (std::size_t q = 1; q < pts.size(); ++q) {
      const Vec3 d{pts[q].x - pts[q - 1].x, pts[q].y - pts[q - 1].y, 0.0};
      const Point2 mid{0.5 * (pts[q].x + pts[q - 1].x), 0.5 * (pts[q].y + pts[q - 1].y)};
      len += std::sqrt(metric_inner(m, mid, d, d));
    }
  }
  return len;
}

}  // namespace defectgeom
