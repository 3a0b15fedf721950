#include "defectgeom/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace defectgeom {

KinematicState make_state(const DefectScene& scene, const Grid2D& g) {
  KinematicState s;
  s.reference = scene.reference;
  s.strain = scene_strain(scene, g);
  s.dislocation = scene_dislocation_density(scene, g);
  s.disclination = scene_disclination_density(scene, g);
  s.contortion = contortion_from_densities(s.dislocation, s.disclination, scene.reference);
  return s;
}

TensorField frank_tensor(const TensorField& e) {
  require_symmetric(e, "frank_tensor");
  const auto d = gradient(e);
  TensorField out(e.grid(), 2);
  for (int n = 0; n < e.nodes(); ++n)
    for (int m = 0; m < 3; ++m)
      for (int k = 0; k < 3; ++k) {
        double s = 0.0;
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 3; ++q) {
            const int eps = eps3(k, p, q);
            if (eps) s += eps * d[p](n, at2(q, m));
          }
        out(n, at2(m, k)) = s;
      }
  return out;
}

static void require_inside(const Grid2D& g, Point2 x0, const char* what) {
  if (!g.contains(x0)) throw std::domain_error(std::string(what) + ": reference point lies outside the grid");
}

// U[j][k] = E_kj + eps_kpq (x_p - x0_p) W[j][q]
static TensorField moment_tensor(const TensorField& e, const TensorField& w, Point2 x0) {
  const Grid2D& g = e.grid();
  TensorField out(g, 2);
  for (int n = 0; n < g.nodes(); ++n) {
    const Point2 p = g.position(n);
    const double r[3] = {p.x - x0.x, p.y - x0.y, 0.0};
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        double s = e(n, at2(k, j));
        for (int a = 0; a < 2; ++a)
          for (int q = 0; q < 3; ++q) {
            const int eps = eps3(k, a, q);
            if (eps) s += eps * r[a] * w(n, at2(j, q));
          }
        out(n, at2(j, k)) = s;
      }
  }
  return out;
}

TensorField burgers_tensor(const TensorField& e, Point2 x0) {
  require_inside(e.grid(), x0, "burgers_tensor");
  return moment_tensor(e, frank_tensor(e), x0);
}

TensorField incompatibility(const TensorField& e) { return incompatibility_op(e); }

TensorField contortion_from_densities(const TensorField& lam, const TensorField& th, Point2 x0) {
  require_same_grid(lam.grid(), th.grid(), "contortion_from_densities");
  const Grid2D& g = lam.grid();
  TensorField k(g, 2);
  for (int n = 0; n < g.nodes(); ++n) {
    const Point2 p = g.position(n);
    const double tz = th(n, at2(Z, Z));
    const double ax = lam(n, at2(Z, X)) - tz * (p.y - x0.y);
    const double ay = lam(n, at2(Z, Y)) + tz * (p.x - x0.x);
    const double az = lam(n, at2(Z, Z));
    k(n, at2(Z, X)) = ax;
    k(n, at2(Z, Y)) = ay;
    k(n, at2(Z, Z)) = az - 0.5 * az;
    k(n, at2(X, X)) = -0.5 * az;
    k(n, at2(Y, Y)) = -0.5 * az;
  }
  return k;
}

TensorField completed_frank(const TensorField& e, const TensorField& kappa) {
  require_same_grid(e.grid(), kappa.grid(), "completed_frank");
  TensorField f = frank_tensor(e);
  for (int n = 0; n < f.nodes(); ++n)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) f(n, at2(j, k)) -= kappa(n, at2(k, j));
  return f;
}

TensorField completed_burgers(const TensorField& e, const TensorField& kappa, Point2 x0) {
  require_inside(e.grid(), x0, "completed_burgers");
  return moment_tensor(e, completed_frank(e, kappa), x0);
}

TensorField burgers_curl(const TensorField& u, const TensorField& w) {
  require_same_grid(u.grid(), w.grid(), "burgers_curl");
  TensorField c = curl_rows(u);
  for (int n = 0; n < c.nodes(); ++n)
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) {
        double s = 0.0;
        for (int j = 0; j < 3; ++j)
          for (int q = 0; q < 3; ++q) {
            const int eps = eps3(i, Z, j) * eps3(k, Z, q);
            if (eps) s += eps * w(n, at2(j, q));
          }
        c(n, at2(i, k)) += s;
      }
  return c;
}

Densities densities_from_completed(const TensorField& rot, const TensorField& disp) {
  require_same_grid(rot.grid(), disp.grid(), "densities_from_completed");
  return {curl_rows(rot), burgers_curl(disp, rot)};
}

TensorField kroener_residual(const TensorField& e, const TensorField& th, const TensorField& kappa) {
  require_same_grid(e.grid(), th.grid(), "kroener_residual");
  require_same_grid(e.grid(), kappa.grid(), "kroener_residual");
  const TensorField eta = incompatibility_op(e);
  const TensorField kx = partial(kappa, Axis::x), ky = partial(kappa, Axis::y);
  TensorField r(e.grid(), 1);
  for (int n = 0; n < r.nodes(); ++n)
    for (int k = 0; k < 3; ++k)
      r(n, k) = eta(n, at2(Z, k)) - th(n, at2(Z, k)) - (kx(n, at2(k, Y)) - ky(n, at2(k, X)));
  return r;
}

static Vec3 z_row_integral(const TensorField& f, const SurfaceRegion& s) {
  if (f.rank() != 2) throw std::invalid_argument("charge integral: density must be rank 2");
  const SmallTensor t = surface_integral(f, s);
  return {t[at2(Z, X)], t[at2(Z, Y)], t[at2(Z, Z)]};
}

Vec3 frank_vector(const TensorField& disclination, const SurfaceRegion& s) { return z_row_integral(disclination, s); }
Vec3 burgers_vector(const TensorField& dislocation, const SurfaceRegion& s) { return z_row_integral(dislocation, s); }

// max|Theta| over the nodes of the path's bounding box times the box area.
static double theta_measure(const TensorField& rot, const Polyline& path) {
  const Grid2D& g = rot.grid();
  double xmin = path.vertices[0].x, xmax = xmin, ymin = path.vertices[0].y, ymax = ymin;
  for (const Point2& v : path.vertices) {
    xmin = std::min(xmin, v.x);
    xmax = std::max(xmax, v.x);
    ymin = std::min(ymin, v.y);
    ymax = std::max(ymax, v.y);
  }
  const TensorField th = curl_rows(rot);
  const int i0 = std::max(0, static_cast<int>(std::floor((xmin - g.x0) / g.h)));
  const int i1 = std::min(g.nx - 1, static_cast<int>(std::ceil((xmax - g.x0) / g.h)));
  const int j0 = std::max(0, static_cast<int>(std::floor((ymin - g.y0) / g.h)));
  const int j1 = std::min(g.ny - 1, static_cast<int>(std::ceil((ymax - g.y0) / g.h)));
  double m = 0.0;
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i)
      for (double v : th.at_node(g.node(i, j))) m = std::max(m, std::abs(v));
  const double area = std::max(xmax - xmin, g.h) * std::max(ymax - ymin, g.h);
  return m * area;
}

BravaisRotation bravais_rotation(const TensorField& e, const TensorField& kappa, const Polyline& path,
                                 const Vec3& omega0, const BravaisOptions& opt) {
  const TensorField rot = completed_frank(e, kappa);
  BravaisRotation out;
  const Vec3 d = line_integral(rot, path, 0);
  for (int k = 0; k < 3; ++k) out.omega[k] = omega0[k] + d[k];
  out.theta_measure = theta_measure(rot, path);
  const double scale = std::max({std::abs(omega0[0]), std::abs(omega0[1]), std::abs(omega0[2]), 1.0});
  if (out.theta_measure >= opt.theta_tolerance * scale) {
    std::ostringstream os;
    os << "disclination density is not negligible along the path (max|Theta| * area = " << out.theta_measure
       << "); the rotation may depend on the path";
    out.warnings.push_back(os.str());
  }
  return out;
}

BravaisDistortion bravais_distortion(const TensorField& e, const TensorField& kappa, const Vec3& omega0,
                                     const Polyline& path, const BravaisOptions& opt) {
  BravaisRotation r = bravais_rotation(e, kappa, path, omega0, opt);
  BravaisDistortion out;
  out.omega = r.omega;
  out.warnings = std::move(r.warnings);
  const SmallTensor ev = sample(e, path.vertices.back());
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) {
      double s = ev[at2(k, l)];
      for (int j = 0; j < 3; ++j) s -= eps3(k, l, j) * r.omega[j];
      out.beta[at2(k, l)] = s;
    }
  return out;
}

TensorField bravais_rotation_field(const TensorField& e, const TensorField& kappa, Point2 x0, const Vec3& omega0) {
  const Grid2D& g = e.grid();
  require_inside(g, x0, "bravais_rotation_field");
  const TensorField rot = completed_frank(e, kappa);
  const int i0 = std::clamp(static_cast<int>(std::lround((x0.x - g.x0) / g.h)), 0, g.nx - 1);
  const int j0 = std::clamp(static_cast<int>(std::lround((x0.y - g.y0) / g.h)), 0, g.ny - 1);
  TensorField w(g, 1);
  for (int k = 0; k < 3; ++k) w(g.node(i0, j0), k) = omega0[k];
  // d omega_k = W[b][k] dx_b
  for (int i = i0 + 1; i < g.nx; ++i)
    for (int k = 0; k < 3; ++k)
      w(g.node(i, j0), k) =
          w(g.node(i - 1, j0), k) + 0.5 * g.h * (rot(g.node(i - 1, j0), at2(X, k)) + rot(g.node(i, j0), at2(X, k)));
  for (int i = i0 - 1; i >= 0; --i)
    for (int k = 0; k < 3; ++k)
      w(g.node(i, j0), k) =
          w(g.node(i + 1, j0), k) - 0.5 * g.h * (rot(g.node(i + 1, j0), at2(X, k)) + rot(g.node(i, j0), at2(X, k)));
  for (int i = 0; i < g.nx; ++i) {
    for (int j = j0 + 1; j < g.ny; ++j)
      for (int k = 0; k < 3; ++k)
        w(g.node(i, j), k) =
            w(g.node(i, j - 1), k) + 0.5 * g.h * (rot(g.node(i, j - 1), at2(Y, k)) + rot(g.node(i, j), at2(Y, k)));
    for (int j = j0 - 1; j >= 0; --j)
      for (int k = 0; k < 3; ++k)
        w(g.node(i, j), k) =
            w(g.node(i, j + 1), k) - 0.5 * g.h * (rot(g.node(i, j + 1), at2(Y, k)) + rot(g.node(i, j), at2(Y, k)));
  }
  return w;
}

TensorField bravais_distortion_field(const TensorField& e, const TensorField& rotation) {
  require_same_grid(e.grid(), rotation.grid(), "bravais_distortion_field");
  TensorField b(e.grid(), 2);
  for (int n = 0; n < b.nodes(); ++n)
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) {
        double s = e(n, at2(k, l));
        for (int j = 0; j < 3; ++j) s -= eps3(k, l, j) * rotation(n, j);
        b(n, at2(k, l)) = s;
      }
  return b;
}

}  // namespace defectgeom
