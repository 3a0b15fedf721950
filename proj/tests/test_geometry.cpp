#include <cmath>
#include <memory>
#include <stdexcept>

#include "doctest.h"
#include "defectgeom/geometry.hpp"
#include "defectgeom/kinematics.hpp"
#include "support.hpp"

using namespace defectgeom;
using testsupport::max_diff;

namespace {

TensorField uniform_diag(const Grid2D& g, double exx) {
  TensorField e(g, 2);
  for (int k = 0; k < g.nodes(); ++k) e(k, at2(0, 0)) = exx;
  return e;
}

TensorField screw_phi(const Grid2D& g) {
  TensorField lam(g, 2);
  for (int k = 0; k < g.nodes(); ++k) {
    const Point2 p = g.position(k);
    lam(k, at2(2, 2)) = 0.3 * std::exp(-(p.x * p.x + p.y * p.y) / 0.2);
  }
  return lam;
}

}  // namespace

TEST_CASE("Bravais metric values") {
  const Grid2D g = Grid2D::square(-1.0, 1.0, 9);
  const Metric m0 = bravais_metric(TensorField(g, 2));
  CHECK(max_diff(m0.g, m0.inverse) == 0.0);
  for (int k = 0; k < g.nodes(); ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(m0.g(k, at2(i, j)) == kronecker(i, j));

  const double eps = 1e-3;
  const Metric m = bravais_metric(uniform_diag(g, eps));
  CHECK(m.g(0, at2(0, 0)) == doctest::Approx(1 - 2 * eps));
  CHECK(m.warnings.empty());
  // product with the small-strain inverse differs from delta at second order
  double worst = 0.0;
  for (int k = 0; k < g.nodes(); ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = -kronecker(i, j);
        for (int l = 0; l < 3; ++l) s += m.g(k, at2(i, l)) * m.inverse(k, at2(l, j));
        worst = std::max(worst, std::abs(s));
      }
  CHECK(worst <= 1e-5);
  CHECK(worst > 0.0);

  CHECK_FALSE(bravais_metric(uniform_diag(g, 0.2)).warnings.empty());
  CHECK_THROWS_AS(bravais_metric(uniform_diag(g, 0.6)), std::domain_error);
}

TEST_CASE("exact inverse") {
  SmallTensor a(2);
  a[at2(0, 0)] = 2.0;
  a[at2(1, 1)] = 3.0;
  a[at2(2, 2)] = 1.5;
  a[at2(0, 1)] = a[at2(1, 0)] = 0.4;
  a[at2(1, 2)] = a[at2(2, 1)] = -0.3;
  const SmallTensor inv = inverse3(a);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int l = 0; l < 3; ++l) s += a[at2(i, l)] * inv[at2(l, j)];
      CHECK(s == doctest::Approx(kronecker(i, j)).epsilon(1e-14));
    }
}

TEST_CASE("Bravais Christoffel symbols") {
  const Grid2D g = Grid2D::square(-1.0, 1.0, 17);
  auto m = std::make_shared<Metric>(bravais_metric(uniform_diag(g, 0.01)));
  CHECK(christoffel_bravais(m).gamma.max_abs() < 1e-14);
  CHECK(christoffel_bravais(m).symmetric);

  const double a = 0.02;
  TensorField e(g, 2);
  for (int k = 0; k < g.nodes(); ++k) e(k, at2(0, 0)) = a * g.position(k).x;
  auto ml = std::make_shared<Metric>(bravais_metric(e));
  const TensorField gam = christoffel_bravais(ml).gamma;
  for (int k = 0; k < g.nodes(); ++k)
    for (int c = 0; c < 27; ++c) CHECK(gam(k, c) == doctest::Approx(c == at3(0, 0, 0) ? -a : 0.0).epsilon(1e-12));
}

TEST_CASE("Levi-Civita connection is metric compatible") {
  auto res = [](int n) {
    const Grid2D g = Grid2D::square(-1.0, 1.0, n);
    const DisplacementWave w{{1e-4, 2e-4, -1e-4}, {1.5, -1.0}, 0.2};
    auto m = std::make_shared<Metric>(bravais_metric(displacement_wave_strain(w, g)));
    return metric_compatibility_residual(christoffel_bravais(m).gamma, *m).max_abs();
  };
  // small-strain raising leaves an O(E^2 dE) floor
  CHECK(res(33) < 1e-10);
  CHECK(res(65) < 1e-10);
}

TEST_CASE("dislocation torsion and connection contortion") {
  const Grid2D g = Grid2D::square(-1.0, 1.0, 21);
  const TensorField lam = screw_phi(g);
  const TensorField t = dislocation_torsion(lam);
  CHECK(dislocation_torsion(TensorField(g, 2)).max_abs() == 0.0);
  for (int k = 0; k < g.nodes(); ++k) {
    const double phi = lam(k, at2(2, 2));
    CHECK(t(k, at3(2, 0, 1)) == doctest::Approx(-phi / 2));
    CHECK(t(k, at3(2, 1, 0)) == doctest::Approx(phi / 2));
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(t(k, at3(a, i, j)) == -t(k, at3(a, j, i)));
  }
  const TensorField dg = connection_contortion(t);
  CHECK(connection_contortion(TensorField(g, 3)).max_abs() == 0.0);
  for (int k = 0; k < g.nodes(); ++k)
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(dg(k, at3(a, i, j)) == doctest::Approx(-dg(k, at3(i, a, j))));
  const TensorField kappa = contortion_from_densities(lam, TensorField(g, 2), {0.0, 0.0});
  CHECK(max_diff(contortion_closed_form(kappa), dg) < 1e-15);
}

TEST_CASE("full connection recovers the torsion") {
  const Grid2D g = Grid2D::square(-1.0, 1.0, 33);
  auto m = std::make_shared<Metric>(bravais_metric(TensorField(g, 2)));
  const Connection cb = christoffel_bravais(m);
  const TensorField t = dislocation_torsion(screw_phi(g));
  const TensorField dg = connection_contortion(t);
  CHECK(max_diff(full_connection(cb, TensorField(g, 3)).gamma, cb.gamma) == 0.0);
  const Connection cf = full_connection(cb, dg);
  CHECK_FALSE(cf.symmetric);
  CHECK(max_diff(torsion_of(cf.gamma), t) == 0.0);
  // flat metric: contortion is skew so compatibility is exact
  CHECK(metric_compatibility_residual(cf.gamma, *m).max_abs() < 1e-15);
}

TEST_CASE("flipping the contortion sign shifts the compatibility residual by twice its contraction") {
  const Grid2D g = Grid2D::square(-1.0, 1.0, 33);
  const DisplacementWave w{{1e-2, 2e-2, -1e-2}, {1.5, -1.0}, 0.2};
  auto m = std::make_shared<Metric>(bravais_metric(displacement_wave_strain(w, g)));
  const Connection cb = christoffel_bravais(m);
  const TensorField dg = connection_contortion(dislocation_torsion(screw_phi(g)));
  const TensorField good = metric_compatibility_residual(full_connection(cb, dg).gamma, *m);
  const TensorField bad = metric_compatibility_residual(full_connection(cb, -1.0 * dg).gamma, *m);
  double worst = 0.0, size = 0.0;
  for (int n = 0; n < g.nodes(); ++n)
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double d = 0.0;
          for (int l = 0; l < 3; ++l)
            for (int q = 0; q < 3; ++q)
              d += m->inverse(n, at2(l, q)) *
                   (dg(n, at3(q, i, k)) * m->g(n, at2(l, j)) + dg(n, at3(q, j, k)) * m->g(n, at2(l, i)));
          worst = std::max(worst, std::abs(bad(n, at3(k, i, j)) - good(n, at3(k, i, j)) + 2.0 * d));
          size = std::max(size, std::abs(d));
        }
  CHECK(size > 1e-4);
  CHECK(worst < 1e-14);
}

TEST_CASE("curvature of flat and compatible scenes") {
  const Grid2D g = Grid2D::square(-1.0, 1.0, 33);
  auto m = std::make_shared<Metric>(bravais_metric(TensorField(g, 2)));
  const Curvature r0 = riemann_curvature(TensorField(g, 3), *m);
  CHECK(r0.riemann.max_abs() == 0.0);

  const DisplacementWave w{{1e-4, 2e-4, -1e-4}, {1.5, -1.0}, 0.2};
  const TensorField e = displacement_wave_strain(w, g);
  auto mc = std::make_shared<Metric>(bravais_metric(e));
  const Curvature rc = riemann_curvature(christoffel_bravais(mc).gamma, *mc);
  // delta - 2E is the pulled-back metric only to first order, so curvature is O(E E'')
  CHECK(rc.einstein.max_abs() < 10.0 * e.max_abs() * testsupport::second_derivative_scale(e));
}

TEST_CASE("Riemann tensor is skew in its last two slots") {
  const Grid2D g = Grid2D::square(-1.0, 1.0, 33);
  DefectScene sc;
  sc.airy_bumps.push_back({1e-3, {0.0, 0.1}, 0.4});
  sc.mollified_screws.push_back({0.01, {0.1, 0.0}, 0.3});
  auto m = std::make_shared<Metric>(bravais_metric(scene_strain(sc, g)));
  const Connection cb = christoffel_bravais(m);
  const Connection cf = full_connection(cb, connection_contortion(dislocation_torsion(scene_dislocation_density(sc, g))));
  for (const Connection* c : {&cb, &cf}) {
    const TensorField r = riemann_curvature(c->gamma, *m).riemann;
    for (int n = 0; n < g.nodes(); n += 7)
      for (int l = 0; l < 3; ++l)
        for (int k = 0; k < 3; ++k)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) CHECK(r(n, at4(l, k, a, b)) == -r(n, at4(l, k, b, a)));
  }
}

TEST_CASE("Einstein and Gauss relations on an incompatible scene") {
  auto run = [](int n) {
    const Grid2D g = Grid2D::square(-1.5, 1.5, n);
    DefectScene sc;
    sc.airy_bumps.push_back({1e-5, {0.1, -0.1}, 0.4});
    const TensorField e = scene_strain(sc, g);
    auto m = std::make_shared<Metric>(bravais_metric(e));
    const Curvature r = riemann_curvature(christoffel_bravais(m).gamma, *m);
    const TensorField eta = incompatibility(e);
    const double s = testsupport::second_derivative_scale(e);
    TensorField trace_eta(g, 0);
    for (int k = 0; k < g.nodes(); ++k) trace_eta(k, 0) = eta(k, 0) + eta(k, 4) + eta(k, 8);
    return std::array<double, 3>{max_diff(r.einstein, eta) / s, max_diff(r.gauss, -1.0 * trace_eta) / s,
                                 gauss_trace_check(scene_solenoidal_trace(sc, g), r.gauss).max_abs() / s};
  };
  const auto a = run(65), b = run(129);
  // linear-order relations: residual floor is of the order of the strain amplitude
  for (double v : b) CHECK(v < 1e-3);
  CHECK(b[2] <= a[2] * 1.01);
}

TEST_CASE("Gauss trace check of zero input") {
  const Grid2D g = Grid2D::square(-1.0, 1.0, 9);
  CHECK(gauss_trace_check(TensorField(g, 0), TensorField(g, 0)).max_abs() == 0.0);
}
