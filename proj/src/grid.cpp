#include "defectgeom/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace defectgeom {

Grid2D::Grid2D(double x0_, double y0_, double h_, int nx_, int ny_, int order)
    : x0(x0_), y0(y0_), h(h_), nx(nx_), ny(ny_), stencil_order(order) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("Grid2D: spacing must be positive");
  if (nx < 3 || ny < 3) throw std::invalid_argument("Grid2D: need at least 3 nodes per axis");
  if (order != 2 && order != 4 && order != 6) throw std::invalid_argument("Grid2D: stencil order must be 2, 4 or 6");
}

Grid2D Grid2D::square(double lo, double hi, int n, int order) {
  if (n < 3 || !(hi > lo)) throw std::invalid_argument("Grid2D::square: bad extent");
  return Grid2D(lo, lo, (hi - lo) / (n - 1), n, n, order);
}

bool Grid2D::contains(Point2 p) const {
  const double slack = 1e-9 * h;
  return p.x >= x0 - slack && p.x <= x_max() + slack && p.y >= y0 - slack && p.y <= y_max() + slack;
}

Grid2D Grid2D::refined(int levels) const {
  if (levels < 0) throw std::invalid_argument("Grid2D::refined: negative level");
  const int f = 1 << levels;
  return Grid2D(x0, y0, h / f, (nx - 1) * f + 1, (ny - 1) * f + 1, stencil_order);
}

bool Grid2D::operator==(const Grid2D& o) const {
  return x0 == o.x0 && y0 == o.y0 && h == o.h && nx == o.nx && ny == o.ny &&
         stencil_order == o.stencil_order;
}

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": fields live on different grids");
}

TensorField::TensorField(const Grid2D& g, int rank)
    : grid_(g), rank_(rank), ncomp_(pow3(rank)), v_(static_cast<std::size_t>(g.nodes()) * pow3(rank), 0.0) {
  if (rank < 0 || rank > SmallTensor::kMaxRank) throw std::invalid_argument("TensorField: rank outside 0..4");
}

SmallTensor TensorField::value(int node) const {
  SmallTensor t(rank_);
  auto s = at_node(node);
  for (int c = 0; c < ncomp_; ++c) t[c] = s[c];
  return t;
}

void TensorField::set(int node, const SmallTensor& t) {
  if (t.rank() != rank_) throw std::invalid_argument("TensorField::set: rank mismatch");
  for (int c = 0; c < ncomp_; ++c) (*this)(node, c) = t[c];
}

double TensorField::max_abs() const {
  double m = 0.0;
  for (double v : v_) m = std::max(m, std::abs(v));
  return m;
}

double TensorField::max_abs_component(int comp) const {
  double m = 0.0;
  for (int n = 0; n < nodes(); ++n) m = std::max(m, std::abs((*this)(n, comp)));
  return m;
}

bool TensorField::all_finite() const {
  return std::all_of(v_.begin(), v_.end(), [](double v) { return std::isfinite(v); });
}

TensorField& TensorField::operator+=(const TensorField& o) {
  require_same_grid(grid_, o.grid_, "TensorField +=");
  if (o.rank_ != rank_) throw std::invalid_argument("TensorField +=: rank mismatch");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

TensorField& TensorField::operator-=(const TensorField& o) {
  require_same_grid(grid_, o.grid_, "TensorField -=");
  if (o.rank_ != rank_) throw std::invalid_argument("TensorField -=: rank mismatch");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

TensorField& TensorField::operator*=(double s) {
  for (double& v : v_) v *= s;
  return *this;
}

TensorField operator+(TensorField a, const TensorField& b) { return a += b; }
TensorField operator-(TensorField a, const TensorField& b) { return a -= b; }
TensorField operator*(double s, TensorField a) { return a *= s; }

TensorField component(const TensorField& f, int comp) {
  TensorField out(f.grid(), 0);
  for (int n = 0; n < f.nodes(); ++n) out(n, 0) = f(n, comp);
  return out;
}

// ---------------------------------------------------------------- polylines

Polyline::Polyline(std::vector<Point2> v, bool is_closed) : vertices(std::move(v)), closed(is_closed) {
  if (vertices.size() < 2) throw std::invalid_argument("Polyline: need at least 2 vertices");
  if (closed) {
    const Point2& a = vertices.front();
    const Point2& b = vertices.back();
    if (a.x != b.x || a.y != b.y) throw std::invalid_argument("Polyline: closed path must end where it starts");
  }
}

Polyline Polyline::segment(Point2 a, Point2 b) { return Polyline({a, b}, false); }

Polyline Polyline::square(Point2 c, double side) {
  const double s = 0.5 * side;
  return rectangle(c.x - s, c.y - s, c.x + s, c.y + s);
}

Polyline Polyline::rectangle(double xmin, double ymin, double xmax, double ymax) {
  return Polyline({{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}, {xmin, ymin}}, true);
}

double Polyline::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < vertices.size(); ++i)
    len += std::hypot(vertices[i].x - vertices[i - 1].x, vertices[i].y - vertices[i - 1].y);
  return len;
}

double Polyline::signed_area() const {
  double a = 0.0;
  for (std::size_t i = 1; i < vertices.size(); ++i)
    a += vertices[i - 1].x * vertices[i].y - vertices[i].x * vertices[i - 1].y;
  return 0.5 * a;
}

Polyline Polyline::reversed() const {
  std::vector<Point2> v(vertices.rbegin(), vertices.rend());
  return Polyline(std::move(v), closed);
}

Polyline Polyline::then(const Polyline& next) const {
  const Point2& a = vertices.back();
  const Point2& b = next.vertices.front();
  if (a.x != b.x || a.y != b.y) throw std::invalid_argument("Polyline::then: paths do not join");
  std::vector<Point2> v = vertices;
  v.insert(v.end(), next.vertices.begin() + 1, next.vertices.end());
  const bool is_closed = v.front().x == v.back().x && v.front().y == v.back().y;
  return Polyline(std::move(v), is_closed);
}

std::vector<Point2> subdivide_segment(Point2 a, Point2 b, double max_step) {
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  const int n = std::max(1, static_cast<int>(std::ceil(len / max_step - 1e-12)));
  std::vector<Point2> pts(n + 1);
  for (int s = 0; s <= n; ++s) {
    const double t = static_cast<double>(s) / n;
    pts[s] = {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
  }
  pts[n] = b;
  return pts;
}

// ---------------------------------------------------------------- regions

SurfaceRegion::SurfaceRegion(const Grid2D& g, std::vector<std::uint8_t> cell_mask)
    : grid_(g), mask_(std::move(cell_mask)) {
  if (mask_.size() != static_cast<std::size_t>(g.nx - 1) * (g.ny - 1))
    throw std::invalid_argument("SurfaceRegion: mask size does not match grid cells");
  if (cell_count() == 0) throw std::invalid_argument("SurfaceRegion: region is empty");
}

SurfaceRegion SurfaceRegion::rectangle(const Grid2D& g, double xmin, double ymin, double xmax, double ymax) {
  std::vector<std::uint8_t> m(static_cast<std::size_t>(g.nx - 1) * (g.ny - 1), 0);
  for (int j = 0; j < g.ny - 1; ++j)
    for (int i = 0; i < g.nx - 1; ++i) {
      const double cx = g.x(i) + 0.5 * g.h, cy = g.y(j) + 0.5 * g.h;
      if (cx >= xmin && cx <= xmax && cy >= ymin && cy <= ymax) m[static_cast<std::size_t>(j) * (g.nx - 1) + i] = 1;
    }
  return SurfaceRegion(g, std::move(m));
}

static bool inside_polygon(const std::vector<Point2>& v, Point2 p) {
  bool in = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double xc = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (p.x < xc) in = !in;
    }
  }
  return in;
}

SurfaceRegion SurfaceRegion::from_polygon(const Grid2D& g, const Polyline& loop) {
  if (!loop.closed) throw std::invalid_argument("SurfaceRegion::from_polygon: path is not closed");
  std::vector<std::uint8_t> m(static_cast<std::size_t>(g.nx - 1) * (g.ny - 1), 0);
  for (int j = 0; j < g.ny - 1; ++j)
    for (int i = 0; i < g.nx - 1; ++i)
      if (inside_polygon(loop.vertices, {g.x(i) + 0.5 * g.h, g.y(j) + 0.5 * g.h}))
        m[static_cast<std::size_t>(j) * (g.nx - 1) + i] = 1;
  return SurfaceRegion(g, std::move(m));
}

SurfaceRegion SurfaceRegion::from_node_mask(const Grid2D& g, const std::vector<std::uint8_t>& nm) {
  if (nm.size() != static_cast<std::size_t>(g.nodes()))
    throw std::invalid_argument("SurfaceRegion::from_node_mask: mask size does not match grid nodes");
  std::vector<std::uint8_t> m(static_cast<std::size_t>(g.nx - 1) * (g.ny - 1), 0);
  for (int j = 0; j < g.ny - 1; ++j)
    for (int i = 0; i < g.nx - 1; ++i)
      if (nm[g.node(i, j)] && nm[g.node(i + 1, j)] && nm[g.node(i, j + 1)] && nm[g.node(i + 1, j + 1)])
        m[static_cast<std::size_t>(j) * (g.nx - 1) + i] = 1;
  return SurfaceRegion(g, std::move(m));
}

SurfaceRegion SurfaceRegion::whole(const Grid2D& g) {
  return SurfaceRegion(g, std::vector<std::uint8_t>(static_cast<std::size_t>(g.nx - 1) * (g.ny - 1), 1));
}

int SurfaceRegion::cell_count() const {
  return static_cast<int>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

double SurfaceRegion::area() const { return cell_count() * grid_.h * grid_.h; }

std::vector<double> SurfaceRegion::node_weights() const {
  const Grid2D& g = grid_;
  std::vector<double> w(g.nodes(), 0.0);
  const double q = 0.25 * g.h * g.h;
  for (int j = 0; j < g.ny - 1; ++j)
    for (int i = 0; i < g.nx - 1; ++i) {
      if (!cell(i, j)) continue;
      w[g.node(i, j)] += q;
      w[g.node(i + 1, j)] += q;
      w[g.node(i, j + 1)] += q;
      w[g.node(i + 1, j + 1)] += q;
    }
  return w;
}

Polyline SurfaceRegion::boundary() const {
  const Grid2D& g = grid_;
  // Directed edges of every cell, counterclockwise; interior edges cancel.
  std::map<std::pair<int, int>, int> edges;
  auto add = [&](int a, int b) {
    auto rev = edges.find({b, a});
    if (rev != edges.end()) {
      if (--rev->second == 0) edges.erase(rev);
    } else {
      ++edges[{a, b}];
    }
  };
  for (int j = 0; j < g.ny - 1; ++j)
    for (int i = 0; i < g.nx - 1; ++i) {
      if (!cell(i, j)) continue;
      const int a = g.node(i, j), b = g.node(i + 1, j), c = g.node(i + 1, j + 1), d = g.node(i, j + 1);
      add(a, b);
      add(b, c);
      add(c, d);
      add(d, a);
    }
  std::map<int, int> next;
  for (const auto& [e, count] : edges) {
    if (count != 1 || next.count(e.first))
      throw std::domain_error("SurfaceRegion::boundary: boundary is not a single simple loop");
    next[e.first] = e.second;
  }
  // Start at the lowest-then-leftmost node so the trace is deterministic.
  const int start = next.begin()->first;
  std::vector<int> loop{start};
  int cur = next.at(start);
  while (cur != start) {
    loop.push_back(cur);
    if (loop.size() > next.size()) throw std::domain_error("SurfaceRegion::boundary: broken boundary chain");
    cur = next.at(cur);
  }
  if (loop.size() != next.size())
    throw std::domain_error("SurfaceRegion::boundary: region has more than one boundary loop");
  loop.push_back(start);

  std::vector<Point2> pts;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const Point2 p = g.position(loop[k]);
    if (k > 0 && k + 1 < loop.size()) {
      const Point2 a = g.position(loop[k - 1]);
      const Point2 b = g.position(loop[k + 1]);
      const double cross = (p.x - a.x) * (b.y - p.y) - (p.y - a.y) * (b.x - p.x);
      if (cross == 0.0) continue;
    }
    pts.push_back(p);
  }
  return Polyline(std::move(pts), true);
}

// ---------------------------------------------------------------- derivatives

namespace {

// Derivative of samples f[0], f[s], ..., f[(n-1)s] at index i. Rows of the
// closure tables are one-sided stencils for the first nodes; the last nodes
// use them mirrored.
struct Stencil {
  int half;                    // interior half-width
  const double* interior;      // 2 half + 1 weights
  int width;                   // closure width
  const double (*closure)[7];  // half rows
};

constexpr double kC2[] = {-0.5, 0.0, 0.5};
constexpr double kB2[1][7] = {{-1.5, 2.0, -0.5}};
constexpr double kC4[] = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};
// Six-point closures keep composed second derivatives fourth order near the edge.
constexpr double kB4[2][7] = {{-137.0 / 60.0, 5.0, -5.0, 10.0 / 3.0, -1.25, 0.2},
                              {-0.2, -13.0 / 12.0, 2.0, -1.0, 1.0 / 3.0, -0.05}};
constexpr double kC6[] = {-1.0 / 60.0, 3.0 / 20.0, -0.75, 0.0, 0.75, -3.0 / 20.0, 1.0 / 60.0};
constexpr double kB6[3][7] = {{-49.0 / 20.0, 6.0, -7.5, 20.0 / 3.0, -3.75, 1.2, -1.0 / 6.0},
                              {-1.0 / 6.0, -77.0 / 60.0, 2.5, -5.0 / 3.0, 5.0 / 6.0, -0.25, 1.0 / 30.0},
                              {1.0 / 30.0, -0.4, -7.0 / 12.0, 4.0 / 3.0, -0.5, 2.0 / 15.0, -1.0 / 60.0}};

Stencil stencil_for(int order, int n) {
  if (order >= 6 && n >= 7) return {3, kC6, 7, kB6};
  if (order >= 4 && n >= 6) return {2, kC4, 6, kB4};
  return {1, kC2, 3, kB2};
}

inline double d1(const double* f, int s, int n, int i, double inv_h, const Stencil& st) {
  double acc = 0.0;
  if (i >= st.half && i < n - st.half) {
    const double* base = f + static_cast<std::ptrdiff_t>(i - st.half) * s;
    for (int k = 0; k < 2 * st.half + 1; ++k) acc += st.interior[k] * base[k * s];
    return acc * inv_h;
  }
  if (i < st.half) {
    for (int k = 0; k < st.width; ++k) acc += st.closure[i][k] * f[k * s];
    return acc * inv_h;
  }
  const double* last = f + static_cast<std::ptrdiff_t>(n - 1) * s;
  for (int k = 0; k < st.width; ++k) acc += st.closure[n - 1 - i][k] * last[-k * s];
  return -acc * inv_h;
}

}  // namespace

TensorField partial(const TensorField& f, Axis axis) {
  const Grid2D& g = f.grid();
  TensorField out(g, f.rank());
  const int nc = f.ncomp();
  const double inv_h = 1.0 / g.h;
  const double* src = f.data().data();
  double* dst = out.data().data();
  if (axis == Axis::x) {
    const Stencil st = stencil_for(g.stencil_order, g.nx);
    for (int j = 0; j < g.ny; ++j)
      for (int c = 0; c < nc; ++c) {
        const double* row = src + static_cast<std::size_t>(g.node(0, j)) * nc + c;
        for (int i = 0; i < g.nx; ++i)
          dst[static_cast<std::size_t>(g.node(i, j)) * nc + c] = d1(row, nc, g.nx, i, inv_h, st);
      }
  } else {
    const Stencil st = stencil_for(g.stencil_order, g.ny);
    const int stride = g.nx * nc;
    for (int i = 0; i < g.nx; ++i)
      for (int c = 0; c < nc; ++c) {
        const double* col = src + static_cast<std::size_t>(g.node(i, 0)) * nc + c;
        for (int j = 0; j < g.ny; ++j)
          dst[static_cast<std::size_t>(g.node(i, j)) * nc + c] = d1(col, stride, g.ny, j, inv_h, st);
      }
  }
  return out;
}

std::array<TensorField, 3> gradient(const TensorField& f) {
  return {partial(f, Axis::x), partial(f, Axis::y), TensorField(f.grid(), f.rank())};
}

TensorField laplacian(const TensorField& f) {
  return partial(partial(f, Axis::x), Axis::x) + partial(partial(f, Axis::y), Axis::y);
}

static void require_rank(const TensorField& f, int r, const char* what) {
  if (f.rank() != r) throw std::invalid_argument(std::string(what) + ": expected rank " + std::to_string(r));
}

TensorField curl_rows(const TensorField& u) {
  require_rank(u, 2, "curl_rows");
  const auto d = gradient(u);
  TensorField out(u.grid(), 2);
  for (int n = 0; n < u.nodes(); ++n)
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) {
        double s = 0.0;
        for (int l = 0; l < 2; ++l)
          for (int j = 0; j < 3; ++j) {
            const int e = eps3(i, l, j);
            if (e) s += e * d[l](n, at2(j, k));
          }
        out(n, at2(i, k)) = s;
      }
  return out;
}

TensorField divergence_rows(const TensorField& u) {
  require_rank(u, 2, "divergence_rows");
  const auto d = gradient(u);
  TensorField out(u.grid(), 1);
  for (int n = 0; n < u.nodes(); ++n)
    for (int k = 0; k < 3; ++k) out(n, k) = d[0](n, at2(0, k)) + d[1](n, at2(1, k));
  return out;
}

void require_symmetric(const TensorField& e, const char* what) {
  require_rank(e, 2, what);
  const double tol = 1e-12 * std::max(1.0, e.max_abs());
  for (int n = 0; n < e.nodes(); ++n)
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        if (std::abs(e(n, at2(i, j)) - e(n, at2(j, i))) > tol)
          throw std::invalid_argument(std::string(what) + ": input tensor is not symmetric");
}

TensorField incompatibility_op(const TensorField& e) {
  require_symmetric(e, "incompatibility_op");
  const TensorField ex = partial(e, Axis::x), ey = partial(e, Axis::y);
  const std::array<std::array<TensorField, 2>, 2> dd{
      {{partial(ex, Axis::x), partial(ey, Axis::x)}, {partial(ex, Axis::y), partial(ey, Axis::y)}}};
  TensorField out(e.grid(), 2);
  for (int n = 0; n < e.nodes(); ++n)
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) {
        double s = 0.0;
        for (int p = 0; p < 2; ++p)
          for (int m = 0; m < 3; ++m) {
            const int ekpm = eps3(k, p, m);
            if (!ekpm) continue;
            for (int q = 0; q < 2; ++q)
              for (int nn = 0; nn < 3; ++nn) {
                const int elqn = eps3(l, q, nn);
                if (elqn) s += ekpm * elqn * dd[p][q](n, at2(m, nn));
              }
          }
        out(n, at2(k, l)) = s;
      }
  return out;
}

// ---------------------------------------------------------------- sampling and integrals

SmallTensor sample(const TensorField& f, Point2 p) {
  const Grid2D& g = f.grid();
  if (!g.contains(p)) throw std::domain_error("sample: point lies outside the grid");
  const double fx = (p.x - g.x0) / g.h, fy = (p.y - g.y0) / g.h;
  const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx - 2);
  const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny - 2);
  const double tx = fx - i, ty = fy - j;
  const double w00 = (1 - tx) * (1 - ty), w10 = tx * (1 - ty), w01 = (1 - tx) * ty, w11 = tx * ty;
  const auto a = f.at_node(g.node(i, j)), b = f.at_node(g.node(i + 1, j));
  const auto c = f.at_node(g.node(i, j + 1)), d = f.at_node(g.node(i + 1, j + 1));
  SmallTensor out(f.rank());
  for (int k = 0; k < f.ncomp(); ++k) out[k] = w00 * a[k] + w10 * b[k] + w01 * c[k] + w11 * d[k];
  return out;
}

Vec3 line_integral(const TensorField& form, const Polyline& path, int differential_slot) {
  require_rank(form, 2, "line_integral");
  if (differential_slot != 0 && differential_slot != 1)
    throw std::invalid_argument("line_integral: differential slot must be 0 or 1");
  const Grid2D& g = form.grid();
  for (const Point2& v : path.vertices)
    if (!g.contains(v)) throw std::domain_error("line_integral: path leaves the grid");
  Vec3 acc{0.0, 0.0, 0.0};
  auto contract = [&](const SmallTensor& t, int k, double dx, double dy) {
    return differential_slot == 0 ? t[at2(X, k)] * dx + t[at2(Y, k)] * dy
                                   : t[at2(k, X)] * dx + t[at2(k, Y)] * dy;
  };
  for (int s = 0; s < path.segments(); ++s) {
    const auto pts = subdivide_segment(path.vertices[s], path.vertices[s + 1], 0.5 * g.h);
    SmallTensor prev = sample(form, pts[0]);
    for (std::size_t q = 1; q < pts.size(); ++q) {
      const SmallTensor cur = sample(form, pts[q]);
      const double dx = pts[q].x - pts[q - 1].x, dy = pts[q].y - pts[q - 1].y;
      for (int k = 0; k < 3; ++k) acc[k] += 0.5 * (contract(prev, k, dx, dy) + contract(cur, k, dx, dy));
      prev = cur;
    }
  }
  return acc;
}

SmallTensor surface_integral(const TensorField& f, const SurfaceRegion& region) {
  require_same_grid(f.grid(), region.grid(), "surface_integral");
  const auto w = region.node_weights();
  SmallTensor out(f.rank());
  for (int n = 0; n < f.nodes(); ++n) {
    if (w[n] == 0.0) continue;
    for (int c = 0; c < f.ncomp(); ++c) out[c] += w[n] * f(n, c);
  }
  return out;
}

}  // namespace defectgeom
