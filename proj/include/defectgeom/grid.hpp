#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "defectgeom/tensor.hpp"

namespace defectgeom {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

enum class Axis { x = 0, y = 1 };

// Uniform node lattice on the cross-section. Node (i, j) sits at
// (x0 + i h, y0 + j h) and has flat index j * nx + i.
//
// stencil_order selects the first-derivative stencil: 6 (default), 4 or 2.
// Short axes drop to a lower order: 6 needs 7 nodes, 4 needs 6.
struct Grid2D {
  double x0 = 0.0;
  double y0 = 0.0;
  double h = 1.0;
  int nx = 3;
  int ny = 3;
  int stencil_order = 6;

  Grid2D() = default;
  Grid2D(double x0_, double y0_, double h_, int nx_, int ny_, int order = 6);

  // Square domain [lo, hi]^2 sampled with n nodes per axis.
  static Grid2D square(double lo, double hi, int n, int order = 6);

  int nodes() const { return nx * ny; }
  int node(int i, int j) const { return j * nx + i; }
  double x(int i) const { return x0 + i * h; }
  double y(int j) const { return y0 + j * h; }
  double x_max() const { return x0 + (nx - 1) * h; }
  double y_max() const { return y0 + (ny - 1) * h; }
  Point2 position(int node) const { return {x(node % nx), y(node / nx)}; }
  bool contains(Point2 p) const;

  // Same domain with spacing halved `levels` times.
  Grid2D refined(int levels) const;

  bool operator==(const Grid2D& o) const;
};

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what);

class TensorField {
 public:
  TensorField() = default;
  TensorField(const Grid2D& g, int rank);

  template <class F>
  static TensorField from_function(const Grid2D& g, int rank, F&& f) {
    TensorField out(g, rank);
    for (int n = 0; n < g.nodes(); ++n) out.set(n, f(g.position(n)));
    return out;
  }

  const Grid2D& grid() const { return grid_; }
  int rank() const { return rank_; }
  int ncomp() const { return ncomp_; }
  int nodes() const { return grid_.nodes(); }

  double& operator()(int node, int comp) { return v_[static_cast<std::size_t>(node) * ncomp_ + comp]; }
  double operator()(int node, int comp) const { return v_[static_cast<std::size_t>(node) * ncomp_ + comp]; }

  SmallTensor value(int node) const;
  void set(int node, const SmallTensor& t);

  std::span<double> data() { return v_; }
  std::span<const double> data() const { return v_; }
  std::span<const double> at_node(int node) const {
    return {v_.data() + static_cast<std::size_t>(node) * ncomp_, static_cast<std::size_t>(ncomp_)};
  }

  double max_abs() const;
  double max_abs_component(int comp) const;
  bool all_finite() const;

  TensorField& operator+=(const TensorField& o);
  TensorField& operator-=(const TensorField& o);
  TensorField& operator*=(double s);

 private:
  Grid2D grid_;
  int rank_ = 0;
  int ncomp_ = 1;
  std::vector<double> v_;
};

TensorField operator+(TensorField a, const TensorField& b);
TensorField operator-(TensorField a, const TensorField& b);
TensorField operator*(double s, TensorField a);

// Rank-r field with component `comp` of f in every node (rank 0 result).
TensorField component(const TensorField& f, int comp);

struct Polyline {
  std::vector<Point2> vertices;
  bool closed = false;

  Polyline() = default;
  Polyline(std::vector<Point2> v, bool is_closed);

  static Polyline segment(Point2 a, Point2 b);
  // Counterclockwise axis-aligned square loop starting at its lower-left corner.
  static Polyline square(Point2 center, double side);
  static Polyline rectangle(double xmin, double ymin, double xmax, double ymax);

  int segments() const { return static_cast<int>(vertices.size()) - 1; }
  double length() const;
  // Shoelace area; positive for counterclockwise loops.
  double signed_area() const;
  Polyline reversed() const;
  // Appends `next`, whose first vertex must equal this path's last vertex.
  Polyline then(const Polyline& next) const;
};

// Points on segment a->b split into pieces no longer than max_step (both ends included).
std::vector<Point2> subdivide_segment(Point2 a, Point2 b, double max_step);

// Cell-mask surface. Cell (i, j) spans nodes i..i+1, j..j+1.
class SurfaceRegion {
 public:
  SurfaceRegion(const Grid2D& g, std::vector<std::uint8_t> cell_mask);

  // Cells whose centre lies in [xmin, xmax] x [ymin, ymax].
  static SurfaceRegion rectangle(const Grid2D& g, double xmin, double ymin, double xmax, double ymax);
  // Cells whose centre lies inside the closed polyline.
  static SurfaceRegion from_polygon(const Grid2D& g, const Polyline& loop);
  // Cells with all four corner nodes in the node mask.
  static SurfaceRegion from_node_mask(const Grid2D& g, const std::vector<std::uint8_t>& node_mask);
  static SurfaceRegion whole(const Grid2D& g);

  const Grid2D& grid() const { return grid_; }
  bool cell(int i, int j) const { return mask_[static_cast<std::size_t>(j) * (grid_.nx - 1) + i] != 0; }
  int cell_count() const;
  double area() const;

  // Trapezoid weights: h^2/4 per adjacent included cell.
  std::vector<double> node_weights() const;

  // Counterclockwise boundary loop traced along cell edges.
  Polyline boundary() const;

 private:
  Grid2D grid_;
  std::vector<std::uint8_t> mask_;
};

// Derivative along one axis, componentwise.
TensorField partial(const TensorField& f, Axis axis);
// d/dx, d/dy and the identically zero d/dz.
std::array<TensorField, 3> gradient(const TensorField& f);
TensorField laplacian(const TensorField& f);

// (curl U)_ik = eps_ilj d_l U_jk.
TensorField curl_rows(const TensorField& u);
// (div U)_k = d_i U_ik.
TensorField divergence_rows(const TensorField& u);
// eta_kl = eps_kpm eps_lqn d_p d_q E_mn. Throws std::invalid_argument for non-symmetric E.
TensorField incompatibility_op(const TensorField& e);

void require_symmetric(const TensorField& e, const char* what);

// Bilinear sample. Throws std::domain_error outside the grid.
SmallTensor sample(const TensorField& f, Point2 p);

// Integral of a rank-2 form along a path. differential_slot = 0 integrates
// form[b][k] dx_b (derivative-first layout); 1 integrates form[k][b] dx_b.
Vec3 line_integral(const TensorField& form, const Polyline& path, int differential_slot = 0);

SmallTensor surface_integral(const TensorField& f, const SurfaceRegion& region);

}  // namespace defectgeom
