#include "defectgeom/geometry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace defectgeom {

void check_positive_definite(const TensorField& g, const char* what) {
  require_symmetric(g, what);
  for (int n = 0; n < g.nodes(); ++n) {
    const auto a = g.at_node(n);
    const double m1 = a[0];
    const double m2 = a[0] * a[4] - a[1] * a[3];
    const double m3 = a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
                      a[2] * (a[3] * a[7] - a[4] * a[6]);
    if (!(m1 > 0.0 && m2 > 0.0 && m3 > 0.0)) {
      const Point2 p = g.grid().position(n);
      std::ostringstream os;
      os << what << ": metric is not positive definite at (" << p.x << ", " << p.y << ")";
      throw std::domain_error(os.str());
    }
  }
}

Metric bravais_metric(const TensorField& e, const MetricOptions& opt) {
  require_symmetric(e, "bravais_metric");
  Metric m{TensorField(e.grid(), 2), TensorField(e.grid(), 2), {}};
  for (int n = 0; n < e.nodes(); ++n)
    for (int c = 0; c < 9; ++c) {
      const double d = (c % 4 == 0) ? 1.0 : 0.0;
      m.g(n, c) = d - 2.0 * e(n, c);
      m.inverse(n, c) = d + 2.0 * e(n, c);
    }
  check_positive_definite(m.g, "bravais_metric");
  const double emax = e.max_abs();
  if (emax >= opt.strain_guard) {
    std::ostringstream os;
    os << "max|E| = " << emax << " exceeds the small-strain guard " << opt.strain_guard;
    m.warnings.push_back(os.str());
  }
  return m;
}

SmallTensor inverse3(const SmallTensor& g) {
  const double a = g[0], b = g[1], c = g[2], d = g[3], e = g[4], f = g[5], gg = g[6], h = g[7], i = g[8];
  const double A = e * i - f * h, B = -(d * i - f * gg), C = d * h - e * gg;
  const double det = a * A + b * B + c * C;
  if (det == 0.0 || !std::isfinite(det)) throw std::domain_error("inverse3: singular tensor");
  SmallTensor inv(2);
  inv[0] = A / det;
  inv[1] = -(b * i - c * h) / det;
  inv[2] = (b * f - c * e) / det;
  inv[3] = B / det;
  inv[4] = (a * i - c * gg) / det;
  inv[5] = -(a * f - c * d) / det;
  inv[6] = C / det;
  inv[7] = -(a * h - b * gg) / det;
  inv[8] = (a * e - b * d) / det;
  return inv;
}

TensorField christoffel_first_kind(const TensorField& g) {
  require_symmetric(g, "christoffel_first_kind");
  const auto d = gradient(g);
  TensorField out(g.grid(), 3);
  for (int n = 0; n < g.nodes(); ++n)
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          out(n, at3(k, i, j)) = 0.5 * (d[i](n, at2(k, j)) + d[j](n, at2(k, i)) - d[k](n, at2(i, j)));
  return out;
}

Connection christoffel_bravais(const std::shared_ptr<const Metric>& m) {
  if (!m) throw std::invalid_argument("christoffel_bravais: null metric");
  return {christoffel_first_kind(m->g), true, m};
}

TensorField dislocation_torsion(const TensorField& lam) {
  if (lam.rank() != 2) throw std::invalid_argument("dislocation_torsion: density must be rank 2");
  TensorField t(lam.grid(), 3);
  for (int n = 0; n < lam.nodes(); ++n)
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double s = 0.0;
          for (int p = 0; p < 3; ++p) {
            const int eps = eps3(i, j, p);
            if (eps) s += eps * lam(n, at2(p, k));
          }
          t(n, at3(k, i, j)) = -0.5 * s;
        }
  return t;
}

TensorField connection_contortion(const TensorField& t) {
  if (t.rank() != 3) throw std::invalid_argument("connection_contortion: torsion must be rank 3");
  TensorField dg(t.grid(), 3);
  for (int n = 0; n < t.nodes(); ++n) {
    const auto tv = t.at_node(n);
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          dg(n, at3(k, i, j)) = tv[at3(j, i, k)] + tv[at3(i, j, k)] - tv[at3(k, j, i)];
  }
  return dg;
}

SmallTensor contortion_closed_form(const SmallTensor& kap) {
  if (kap.rank() != 2) throw std::invalid_argument("contortion_closed_form: kappa must be rank 2");
  auto e2 = [](int a, int b) { return eps3(Z, a, b); };
  SmallTensor dg(3);
  for (int k = 0; k < 2; ++k) {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) dg[at3(k, a, b)] = e2(k, a) * kap[at2(Z, b)];
    for (int a = 0; a < 2; ++a) {
      double s = 0.0;
      for (int t = 0; t < 2; ++t) s += e2(a, t) * kap[at2(t, k)];
      dg[at3(k, a, Z)] = s;
      dg[at3(k, Z, a)] = s;
    }
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) dg[at3(Z, a, b)] = -e2(a, b) * kap[at2(Z, Z)];
  return dg;
}

TensorField contortion_closed_form(const TensorField& kappa) {
  TensorField out(kappa.grid(), 3);
  for (int n = 0; n < kappa.nodes(); ++n) out.set(n, contortion_closed_form(kappa.value(n)));
  return out;
}

Connection full_connection(const Connection& bravais, const TensorField& contortion) {
  Connection c{bravais.gamma - contortion, false, bravais.metric};
  return c;
}

TensorField torsion_of(const TensorField& gamma) {
  if (gamma.rank() != 3) throw std::invalid_argument("torsion_of: connection must be rank 3");
  TensorField t(gamma.grid(), 3);
  for (int n = 0; n < gamma.nodes(); ++n)
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) t(n, at3(k, i, j)) = 0.5 * (gamma(n, at3(k, j, i)) - gamma(n, at3(k, i, j)));
  return t;
}

TensorField metric_compatibility_residual(const TensorField& gamma, const Metric& m) {
  require_same_grid(gamma.grid(), m.g.grid(), "metric_compatibility_residual");
  const auto d = gradient(m.g);
  TensorField out(gamma.grid(), 3);
  for (int n = 0; n < gamma.nodes(); ++n) {
    const auto gm = gamma.at_node(n);
    const auto g = m.g.at_node(n);
    const auto gi = m.inverse.at_node(n);
    // raised[l][i][k] = ginv_lm Gamma_{m;ik}
    double raised[27];
    for (int l = 0; l < 3; ++l)
      for (int ik = 0; ik < 9; ++ik) {
        double s = 0.0;
        for (int mm = 0; mm < 3; ++mm) s += gi[at2(l, mm)] * gm[9 * mm + ik];
        raised[9 * l + ik] = s;
      }
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double s = d[k](n, at2(i, j));
          for (int l = 0; l < 3; ++l)
            s -= raised[at3(l, i, k)] * g[at2(l, j)] + raised[at3(l, j, k)] * g[at2(l, i)];
          out(n, at3(k, i, j)) = s;
        }
  }
  return out;
}

Curvature contract_curvature(TensorField r) {
  const Grid2D& grid = r.grid();
  Curvature c{std::move(r), TensorField(grid, 2), TensorField(grid, 0), TensorField(grid, 2)};
  for (int n = 0; n < grid.nodes(); ++n) {
    const auto rv = c.riemann.at_node(n);
    double trace = 0.0;
    for (int k = 0; k < 3; ++k)
      for (int q = 0; q < 3; ++q) {
        double s = 0.0;
        for (int p = 0; p < 3; ++p) s += rv[at4(p, k, p, q)];
        c.ricci(n, at2(k, q)) = s;
        if (k == q) trace += s;
      }
    c.gauss(n, 0) = 0.5 * trace;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l)
          for (int k = 0; k < 3; ++k) {
            const int a = eps3(l, k, i);
            if (!a) continue;
            for (int m = 0; m < 3; ++m)
              for (int q = 0; q < 3; ++q) {
                const int b = eps3(m, q, j);
                if (b) s += a * b * rv[at4(l, k, m, q)];
              }
          }
        c.einstein(n, at2(i, j)) = -0.25 * s;
      }
  }
  return c;
}

Curvature riemann_curvature(const TensorField& gamma, const Metric& m) {
  if (gamma.rank() != 3) throw std::invalid_argument("riemann_curvature: connection must be rank 3");
  require_same_grid(gamma.grid(), m.g.grid(), "riemann_curvature");
  const auto d = gradient(gamma);
  TensorField r(gamma.grid(), 4);
  for (int n = 0; n < gamma.nodes(); ++n) {
    const auto gm = gamma.at_node(n);
    const auto gi = m.inverse.at_node(n);
    // raised[p][k][m] = ginv_np Gamma_{n;km}
    double raised[27];
    for (int p = 0; p < 3; ++p)
      for (int ab = 0; ab < 9; ++ab) {
        double s = 0.0;
        for (int nn = 0; nn < 3; ++nn) s += gi[at2(nn, p)] * gm[9 * nn + ab];
        raised[9 * p + ab] = s;
      }
    for (int l = 0; l < 3; ++l)
      for (int k = 0; k < 3; ++k)
        for (int mm = 0; mm < 3; ++mm)
          for (int q = 0; q < 3; ++q) {
            double s = d[q](n, at3(l, k, mm)) - d[mm](n, at3(l, k, q));
            for (int p = 0; p < 3; ++p)
              s += raised[at3(p, k, mm)] * gm[at3(p, l, q)] - raised[at3(p, k, q)] * gm[at3(p, l, mm)];
            r(n, at4(l, k, mm, q)) = s;
          }
  }
  return contract_curvature(std::move(r));
}

TensorField gauss_trace_check(const TensorField& trace, const TensorField& gauss) {
  require_same_grid(trace.grid(), gauss.grid(), "gauss_trace_check");
  if (trace.rank() != 0 || gauss.rank() != 0) throw std::invalid_argument("gauss_trace_check: scalar fields expected");
  TensorField r = laplacian(trace);
  r *= -1.0;
  r -= gauss;
  return r;
}

}  // namespace defectgeom
