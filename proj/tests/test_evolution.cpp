#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "defectgeom/defect_fields.hpp"
#include "defectgeom/evolution.hpp"
#include "support.hpp"

using namespace defectgeom;
using testsupport::max_diff;

namespace {

TensorField constant(const Grid2D& g, double v) {
  TensorField f(g, 0);
  for (int k = 0; k < g.nodes(); ++k) f(k, 0) = v;
  return f;
}

SmallTensor iso(double d) {
  SmallTensor t = SmallTensor::identity();
  t *= d;
  return t;
}

double centroid_x(const TensorField& c, int comp = 0) {
  const std::vector<double> w = cell_volumes(c.grid());
  double m = 0.0, mx = 0.0;
  for (int n = 0; n < c.nodes(); ++n) {
    m += w[n] * c(n, comp);
    mx += w[n] * c(n, comp) * c.grid().position(n).x;
  }
  return mx / m;
}

}  // namespace

TEST_CASE("largest symmetric eigenvalue") {
  const double a[4] = {1.0, 2.0, 0.0, 1.0};
  CHECK(max_symmetric_eigenvalue(a, 2) == doctest::Approx(2.0));
  const double d[9] = {3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.5};
  CHECK(max_symmetric_eigenvalue(d, 3) == doctest::Approx(3.0));
}

TEST_CASE("dual-cell volumes cover the domain") {
  const Grid2D g = Grid2D::square(-1.0, 2.0, 13);
  const std::vector<double> w = cell_volumes(g);
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(9.0));
  CHECK(w[0] == doctest::Approx(g.h * g.h / 4));
  CHECK(total_mass(constant(g, 2.0)) == doctest::Approx(18.0));
}

TEST_CASE("stability bounds are enforced") {
  const Grid2D g = Grid2D::square(0.0, 1.0, 17);
  EvolutionConfig cfg;
  cfg.vacancy.diffusivity = iso(1e-2);
  cfg.dt = 0.2 * g.h * g.h / 1e-2;
  CHECK_NOTHROW(check_point_defect_cfl(g, cfg));
  cfg.dt *= 1.01;
  CHECK_THROWS_AS(check_point_defect_cfl(g, cfg), std::invalid_argument);
  CHECK_THROWS_AS(step_point_defects(constant(g, 0.1), constant(g, 0.1), cfg), std::invalid_argument);

  EvolutionConfig adv;
  adv.velocity = TensorField(g, 1);
  for (int n = 0; n < g.nodes(); ++n) (*adv.velocity)(n, 0) = 2.0;
  adv.dt = 0.5 * g.h / 2.0;
  CHECK_NOTHROW(check_point_defect_cfl(g, adv));
  adv.dt *= 1.5;
  CHECK_THROWS_AS(check_point_defect_cfl(g, adv), std::invalid_argument);

  EvolutionConfig kc;
  for (int a = 0; a < 9; ++a) kc.kappa_diffusivity[10 * a] = 1e-2;
  kc.dt = 0.3 * g.h * g.h / 1e-2;
  CHECK_THROWS_AS(check_contortion_cfl(g, kc), std::invalid_argument);
  kc.dt = 0.0;
  CHECK_THROWS_AS(check_contortion_cfl(g, kc), std::invalid_argument);
}

TEST_CASE("uniform concentrations without sources stay put") {
  const Grid2D g = Grid2D::square(0.0, 1.0, 17);
  EvolutionConfig cfg;
  cfg.vacancy.diffusivity = iso(1e-2);
  cfg.interstitial.diffusivity = iso(2e-2);
  cfg.dt = 0.1 * g.h * g.h / 2e-2;
  const PointDefectStep s = step_point_defects(constant(g, 0.1), constant(g, 0.2), cfg);
  CHECK(max_diff(s.vacancies, constant(g, 0.1)) < 1e-16);
  CHECK(max_diff(s.interstitials, constant(g, 0.2)) < 1e-16);
  CHECK(s.recombined == 0.0);
}

TEST_CASE("Gaussian spreading and mass conservation") {
  const Grid2D g = Grid2D::square(-2.0, 2.0, 97);
  const double d = 1e-3;
  EvolutionConfig cfg;
  cfg.vacancy.diffusivity = iso(d);
  cfg.dt = 0.2 * g.h * g.h / d;
  TensorField c = gaussian_profile({0.0, 0.0}, 0.25, g);
  const double m0 = total_mass(c);
  auto var = [&](const TensorField& f) {
    const std::vector<double> w = cell_volumes(g);
    double m = 0.0, s = 0.0;
    for (int n = 0; n < g.nodes(); ++n) {
      const double x = g.position(n).x;
      m += w[n] * f(n, 0);
      s += w[n] * f(n, 0) * x * x;
    }
    return s / m;
  };
  const double v0 = var(c);
  for (int s = 0; s < 100; ++s) c = step_point_defects(c, TensorField(g, 0), cfg).vacancies;
  CHECK((var(c) - v0) / (2 * d * 100 * cfg.dt) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(total_mass(c) == doctest::Approx(m0).epsilon(1e-13));
}

TEST_CASE("pure advection moves the centroid with the flow") {
  const Grid2D g = Grid2D::square(-2.0, 2.0, 161);
  EvolutionConfig cfg;
  cfg.velocity = TensorField(g, 1);
  for (int n = 0; n < g.nodes(); ++n) (*cfg.velocity)(n, 0) = 0.5;
  cfg.dt = 0.4 * g.h / 0.5;
  TensorField c = gaussian_profile({-0.5, 0.0}, 0.25, g);
  const double x0 = centroid_x(c);
  const int steps = 50;
  for (int s = 0; s < steps; ++s) c = step_point_defects(c, TensorField(g, 0), cfg).vacancies;
  CHECK((centroid_x(c) - x0) / (0.5 * steps * cfg.dt) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("recombination clipping logs the added mass") {
  const Grid2D g = Grid2D::square(0.0, 1.0, 9);
  EvolutionConfig cfg;
  cfg.recombination = 10.0;
  cfg.dt = 1.0;
  const PointDefectStep s = step_point_defects(constant(g, 1.0), constant(g, 1.0), cfg);
  CHECK(s.vacancies.max_abs() == 0.0);
  CHECK(s.clipped_vacancies == doctest::Approx(9.0));
  CHECK(s.recombined == doctest::Approx(10.0));
  CHECK_THROWS(step_point_defects(constant(g, -1.0), constant(g, 1.0), cfg));
}

TEST_CASE("Dirichlet boundaries hold their values") {
  const Grid2D g = Grid2D::square(-1.0, 1.0, 33);
  EvolutionConfig cfg;
  cfg.vacancy.diffusivity = iso(1e-2);
  cfg.vacancy.boundary = Boundary::dirichlet;
  cfg.dt = 0.2 * g.h * g.h / 1e-2;
  TensorField c = gaussian_profile({0.3, 0.0}, 0.5, g);
  const TensorField start = c;
  for (int s = 0; s < 20; ++s) c = step_point_defects(c, TensorField(g, 0), cfg).vacancies;
  for (int i = 0; i < g.nx; ++i) {
    CHECK(c(g.node(i, 0), 0) == start(g.node(i, 0), 0));
    CHECK(c(g.node(i, g.ny - 1), 0) == start(g.node(i, g.ny - 1), 0));
  }
  CHECK(max_diff(c, start) > 0.0);
}

TEST_CASE("contortion evolution") {
  const Grid2D g = Grid2D::square(-1.0, 1.0, 49);
  const double d = 1e-3;
  EvolutionConfig cfg;
  for (int a = 0; a < 9; ++a) cfg.kappa_diffusivity[10 * a] = d;
  cfg.vacancy.diffusivity = iso(d);
  cfg.dt = 0.2 * g.h * g.h / d;
  CHECK(step_contortion(TensorField(g, 2), cfg).max_abs() == 0.0);

  // identity map: each component diffuses like a scalar
  TensorField k(g, 2);
  const TensorField a = gaussian_profile({0.1, 0.0}, 0.2, g), b = gaussian_profile({-0.2, 0.1}, 0.3, g);
  for (int n = 0; n < g.nodes(); ++n) {
    k(n, at2(2, 2)) = a(n, 0);
    k(n, at2(0, 1)) = -2.0 * b(n, 0);
  }
  const TensorField k1 = step_contortion(k, cfg);
  const TensorField a1 = step_point_defects(a, TensorField(g, 0), cfg).vacancies;
  const TensorField b1 = step_point_defects(b, TensorField(g, 0), cfg).vacancies;
  double worst = 0.0;
  for (int n = 0; n < g.nodes(); ++n) {
    worst = std::max(worst, std::abs(k1(n, at2(2, 2)) - a1(n, 0)));
    worst = std::max(worst, std::abs(k1(n, at2(0, 1)) + 2.0 * b1(n, 0)));
    CHECK(k1(n, at2(1, 0)) == 0.0);
  }
  CHECK(worst < 1e-15);
}

TEST_CASE("thermodrift translates the contortion") {
  const Grid2D g = Grid2D::square(-2.0, 2.0, 161);
  const double dt_coef = 0.5;
  const std::array<double, 2> grad{0.4, 0.0};
  EvolutionConfig cfg;
  for (int a = 0; a < 9; ++a) cfg.kappa_thermodiffusivity[10 * a] = dt_coef;
  cfg.temperature = temperature_field({1.0, grad}, g);
  cfg.dt = 0.4 * g.h / (dt_coef * grad[0]);
  TensorField k(g, 2);
  const TensorField a = gaussian_profile({0.5, 0.0}, 0.25, g);
  for (int n = 0; n < g.nodes(); ++n) k(n, at2(2, 0)) = a(n, 0);
  const double x0 = centroid_x(k, at2(2, 0));
  const int steps = 50;
  for (int s = 0; s < steps; ++s) k = step_contortion(k, cfg);
  // flux D~ kappa grad T moves kappa with velocity -D~ grad T
  const double expect = -dt_coef * grad[0] * steps * cfg.dt;
  CHECK((centroid_x(k, at2(2, 0)) - x0) / expect == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("conservation residual and projection") {
  const Grid2D g = Grid2D::square(-1.0, 1.0, 65);
  TensorField c(g, 2);
  for (int n = 0; n < g.nodes(); ++n)
    for (int a = 0; a < 9; ++a) c(n, a) = 0.1 * a - 0.3;
  CHECK(conservation_residual(c).max_abs() < 1e-13);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TensorField r(g, 2);
  for (double& v : r.data()) v = u(rng);
  CHECK(conservation_residual(r).max_abs() > 1.0);

  const TensorField phi = gaussian_profile({0.1, 0.0}, 0.3, g);
  TensorField k(g, 2);
  for (int n = 0; n < g.nodes(); ++n) {
    k(n, at2(2, 2)) = 0.5 * phi(n, 0);
    k(n, at2(0, 0)) = k(n, at2(1, 1)) = -0.5 * phi(n, 0);
  }
  CHECK(conservation_residual(k).max_abs() < 1e-12 * testsupport::gradient_scale(k));

  // a smooth field with every component populated
  TensorField s(g, 2);
  for (int n = 0; n < g.nodes(); ++n) {
    const Point2 p = g.position(n);
    for (int a = 0; a < 9; ++a) s(n, a) = std::sin(0.7 * a + p.x) * std::cos(0.3 * a - 2 * p.y);
  }
  const TensorField proj = project_contortion(s);
  CHECK(conservation_residual(proj).max_abs() < 1e-12);
  CHECK(max_diff(project_contortion(proj), proj) < 1e-15);
  for (int n = 0; n < g.nodes(); ++n) {
    CHECK(proj(n, at2(0, 1)) == 0.0);
    CHECK(proj(n, at2(0, 0)) == proj(n, at2(1, 1)));
    CHECK(proj(n, at2(2, 2)) == -proj(n, at2(0, 0)));
  }
}
