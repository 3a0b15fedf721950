#include <cmath>
#include <memory>
#include <stdexcept>

#include "doctest.h"
#include "defectgeom/defect_fields.hpp"
#include "defectgeom/transport.hpp"
#include "support.hpp"

using namespace defectgeom;

namespace {

Connection bravais_of(const TensorField& e) {
  return christoffel_bravais(std::make_shared<Metric>(bravais_metric(e)));
}

double vmax(const Vec3& v) { return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])}); }

Connection airy_scene(int n) {
  const Grid2D g = Grid2D::square(-1.0, 1.0, n);
  DefectScene sc;
  sc.airy_bumps.push_back({1e-3, {0.0, 0.0}, 0.6});
  return bravais_of(scene_strain(sc, g));
}

}  // namespace

TEST_CASE("transport with a vanishing connection") {
  const Grid2D g = Grid2D::square(-1.0, 1.0, 9);
  Connection c;
  c.gamma = TensorField(g, 3);
  const Polyline p({{-0.5, -0.5}, {0.5, -0.2}, {0.3, 0.6}}, false);
  const TransportResult r = parallel_transport(c, {1.0, 2.0, 3.0}, p);
  CHECK(r.final_vector == Vec3{1.0, 2.0, 3.0});
  CHECK(r.trace.size() == p.vertices.size());
  CHECK_FALSE(r.gap.has_value());
  CHECK_THROWS_AS(parallel_transport(c, {1, 0, 0}, Polyline::segment({0, 0}, {2, 0})), std::domain_error);
}

TEST_CASE("compatible strain is flat: loops close under refinement") {
  auto gap = [](int n) {
    const Grid2D g = Grid2D::square(-1.0, 1.0, n);
    const DisplacementWave w{{1e-3, 2e-3, -1e-3}, {1.5, -1.0}, 0.2};
    const Connection c = bravais_of(displacement_wave_strain(w, g));
    const TransportResult r = parallel_transport(c, {0.3, -0.7, 0.5}, Polyline::square({0.1, 0.0}, 0.8));
    REQUIRE(r.gap.has_value());
    return vmax(*r.gap);
  };
  const double a = gap(65), b = gap(257);
  CHECK(b < 2e-8);
  CHECK(testsupport::observed_order(a, b, 4.0, 1.0) > 1.5);
}

TEST_CASE("transport preserves the metric norm") {
  // drift comes from bilinear sampling of Gamma and g between nodes
  auto drift = [](int n) {
    const Grid2D g = Grid2D::square(-1.0, 1.0, n);
    DefectScene sc;
    sc.airy_bumps.push_back({1e-2, {0.1, 0.0}, 0.5});
    sc.displacement_waves.push_back({{1e-2, 2e-2, -1e-2}, {1.5, -1.0}, 0.2});
    const Connection c = bravais_of(scene_strain(sc, g));
    const Vec3 v0{0.3, -0.7, 0.5};
    const Polyline p =
        Polyline::segment({-0.8, -0.6}, {0.7, 0.4}).then(Polyline::segment({0.7, 0.4}, {-0.2, 0.8}));
    const TransportResult r = parallel_transport(c, v0, p);
    const double n0 = metric_inner(*c.metric, p.vertices.front(), v0, v0);
    const double n1 = metric_inner(*c.metric, p.vertices.back(), r.final_vector, r.final_vector);
    return std::abs(n1 - n0) / n0;
  };
  const double d1 = drift(65), d2 = drift(129);
  CHECK(d2 < 2e-6);
  CHECK(d1 / d2 > 3.0);
}

TEST_CASE("holonomy: reversal, flat scenes and small-loop scaling") {
  const Connection c = airy_scene(161);
  const Vec3 v0{1.0, 0.0, 0.0};
  const HolonomyResult fw = holonomy_gap(c, *c.metric, Polyline::square({0.0, 0.0}, 0.2), v0);
  const HolonomyResult bw = holonomy_gap(c, *c.metric, Polyline::square({0.0, 0.0}, 0.2).reversed(), v0);
  // reversal flips the gap at leading order; the rotation's cos - 1 part does not flip
  for (int i = 0; i < 3; ++i) CHECK(std::abs(bw.gap[i] + fw.gap[i]) <= 2.0 * vmax(fw.gap) * vmax(fw.gap));
  CHECK(fw.area == doctest::Approx(0.04));
  CHECK(vmax(fw.gap) > 0.0);
  CHECK(std::abs(vmax(fw.gap) - vmax(fw.predicted)) < 0.05 * vmax(fw.predicted));

  // near-constant curvature: gap grows like the area
  const HolonomyResult small = holonomy_gap(c, *c.metric, Polyline::square({0.0, 0.0}, 0.1), v0);
  const double ratio = vmax(fw.gap) / vmax(small.gap);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));

  const Grid2D g = Grid2D::square(-1.0, 1.0, 33);
  const Connection flat = bravais_of(TensorField(g, 2));
  const HolonomyResult z = holonomy_gap(flat, *flat.metric, Polyline::square({0.0, 0.0}, 0.5), v0);
  CHECK(vmax(z.gap) == 0.0);
  CHECK(vmax(z.predicted) < 1e-25);
}

TEST_CASE("geodesics") {
  const Grid2D g = Grid2D::square(-1.0, 1.0, 33);
  const Connection flat = bravais_of(TensorField(g, 2));
  const GeodesicResult s = geodesic_trace(flat, {-0.5, -0.5}, {1.0, 1.0, 0.0}, 1.0);
  CHECK_FALSE(s.exited);
  CHECK(s.arc_length == doctest::Approx(1.0));
  const Point2 end = s.points.back();
  CHECK(end.x == doctest::Approx(-0.5 + std::sqrt(0.5)));
  CHECK(end.y == doctest::Approx(-0.5 + std::sqrt(0.5)));
  CHECK(geodesic_trace(flat, {0.5, 0.0}, {1.0, 0.0, 0.0}, 2.0).exited);

  auto drift = [](int n) {
    const Grid2D gg = Grid2D::square(-1.0, 1.0, n);
    DefectScene sc;
    sc.airy_bumps.push_back({1e-2, {0.1, 0.0}, 0.5});
    const Connection c = bravais_of(scene_strain(sc, gg));
    const GeodesicResult r = geodesic_trace(c, {-0.7, -0.3}, {1.0, 0.4, 0.0}, 1.2);
    CHECK(r.points.size() == r.tangents.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < r.points.size(); ++i)
      worst = std::max(worst, std::abs(metric_inner(*c.metric, r.points[i], r.tangents[i], r.tangents[i]) - 1.0));
    return worst;
  };
  const double d1 = drift(81), d2 = drift(161);
  CHECK(d2 < 2e-5);
  CHECK(d1 / d2 > 3.0);
}

TEST_CASE("metric length") {
  const Grid2D g = Grid2D::square(-2.0, 2.0, 17);
  const Metric flat = bravais_metric(TensorField(g, 2));
  CHECK(metric_length(flat, Polyline::segment({-1.0, 0.0}, {1.0, 0.0})) == doctest::Approx(2.0).epsilon(1e-12));

  const double eps = 0.01;
  TensorField iso(g, 2);
  for (int k = 0; k < g.nodes(); ++k)
    for (int i = 0; i < 3; ++i) iso(k, at2(i, i)) = eps;
  const Metric m = bravais_metric(iso);
  const Polyline p = Polyline::segment({-1.0, -0.5}, {1.0, 1.0});
  CHECK(metric_length(m, p) == doctest::Approx(p.length() * std::sqrt(1 - 2 * eps)).epsilon(1e-12));

  // midpoint rule on a curved metric: order two in the sampling step
  const Grid2D gg = Grid2D::square(-2.0, 2.0, 257);
  DefectScene sc;
  sc.airy_bumps.push_back({1e-2, {0.0, 0.0}, 0.5});
  const Metric mc = bravais_metric(scene_strain(sc, gg));
  const Polyline q = Polyline::segment({-1.0, -0.3}, {1.0, 0.2});
  const double l1 = metric_length(mc, q, 0.2), l2 = metric_length(mc, q, 0.1), l3 = metric_length(mc, q, 0.05);
  const double ord = std::log(std::abs(l1 - l2) / std::abs(l2 - l3)) / std::log(2.0);
  CHECK(ord > 1.8);
}
