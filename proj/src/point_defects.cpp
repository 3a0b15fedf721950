#include "defectgeom/point_defects.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace defectgeom {

namespace {

TensorField exact_inverse(const TensorField& g) {
  TensorField out(g.grid(), 2);
  for (int n = 0; n < g.nodes(); ++n) out.set(n, inverse3(g.value(n)));
  return out;
}

// s^2 = tr g' / tr g_B
TensorField conformal_factor(const Metric& primed, const Metric& bravais) {
  TensorField s2(primed.g.grid(), 0);
  for (int n = 0; n < s2.nodes(); ++n) {
    const double a = primed.g(n, 0) + primed.g(n, 4) + primed.g(n, 8);
    const double b = bravais.g(n, 0) + bravais.g(n, 4) + bravais.g(n, 8);
    s2(n, 0) = a / b;
  }
  return s2;
}

double max_diff(const TensorField& a, const TensorField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace

Metric point_defect_metric(const TensorField& cv, const TensorField& ci, const Metric& bravais,
                           const PointDefectMetricOptions& opt) {
  require_same_grid(cv.grid(), ci.grid(), "point_defect_metric");
  require_same_grid(cv.grid(), bravais.g.grid(), "point_defect_metric");
  if (cv.rank() != 0 || ci.rank() != 0) throw std::invalid_argument("point_defect_metric: concentrations must be scalar");
  Metric m{TensorField(cv.grid(), 2), TensorField(cv.grid(), 2), bravais.warnings};
  double worst = 0.0;
  for (int n = 0; n < cv.nodes(); ++n) {
    if (cv(n, 0) < 0.0 || ci(n, 0) < 0.0) {
      const Point2 p = cv.grid().position(n);
      std::ostringstream os;
      os << "point_defect_metric: negative concentration at (" << p.x << ", " << p.y << ")";
      throw std::invalid_argument(os.str());
    }
    const double dc = ci(n, 0) - cv(n, 0);
    worst = std::max(worst, std::abs(dc));
    const double s = 1.0 + dc;
    for (int c = 0; c < 9; ++c) {
      m.g(n, c) = s * s * bravais.g(n, c);
      m.inverse(n, c) = bravais.inverse(n, c) / (s * s);
    }
  }
  check_positive_definite(m.g, "point_defect_metric");
  if (worst >= opt.excess_guard) {
    std::ostringstream os;
    os << "max|C_I - C_V| = " << worst << " exceeds " << opt.excess_guard;
    m.warnings.push_back(os.str());
  }
  return m;
}

TensorField nonmetric_contortion(const TensorField& q) {
  if (q.rank() != 3) throw std::invalid_argument("nonmetric_contortion: Q must be rank 3");
  TensorField out(q.grid(), 3);
  for (int n = 0; n < q.nodes(); ++n) {
    const auto v = q.at_node(n);
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out(n, at3(k, i, j)) = v[at3(j, i, k)] + v[at3(i, j, k)] - v[at3(k, j, i)];
  }
  return out;
}

TensorField covariant_metric_derivative(const TensorField& gamma, const TensorField& g) {
  require_same_grid(gamma.grid(), g.grid(), "covariant_metric_derivative");
  const auto d = gradient(g);
  TensorField out(g.grid(), 3);
  for (int n = 0; n < g.nodes(); ++n) {
    const auto gv = g.at_node(n);
    const auto gm = gamma.at_node(n);
    const SmallTensor inv = inverse3(g.value(n));
    double raised[27];
    for (int l = 0; l < 3; ++l)
      for (int ab = 0; ab < 9; ++ab) {
        double s = 0.0;
        for (int r = 0; r < 3; ++r) s += inv[at2(l, r)] * gm[9 * r + ab];
        raised[9 * l + ab] = s;
      }
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
          double s = d[j](n, at2(i, k));
          for (int l = 0; l < 3; ++l) s -= raised[at3(l, i, j)] * gv[at2(l, k)] + raised[at3(l, k, j)] * gv[at2(l, i)];
          out(n, at3(j, i, k)) = s;
        }
  }
  return out;
}

HatSolution hat_connection_solve(const Metric& primed, const Metric& bravais, const TensorField& contortion,
                                 const HatSolveOptions& opt) {
  require_same_grid(primed.g.grid(), bravais.g.grid(), "hat_connection_solve");
  require_same_grid(primed.g.grid(), contortion.grid(), "hat_connection_solve");
  const Grid2D& grid = primed.g.grid();
  const TensorField primed_gamma = christoffel_first_kind(primed.g);

  const TensorField s2 = conformal_factor(primed, bravais);
  const auto ds2 = gradient(s2);
  TensorField seed(grid, 3);
  for (int n = 0; n < grid.nodes(); ++n)
    for (int j = 0; j < 3; ++j)
      for (int ik = 0; ik < 9; ++ik) seed(n, 9 * j + ik) = ds2[j](n, 0) * bravais.g(n, ik);

  auto hat_of = [&](const TensorField& q) {
    TensorField h = primed_gamma - contortion;
    TensorField dg = nonmetric_contortion(q);
    dg *= 0.5;
    h -= dg;
    return h;
  };

  const double dampings[2] = {opt.damping, opt.fallback_damping};
  double last = 0.0;
  for (double theta : dampings) {
    HatSolution sol;
    sol.damping = theta;
    sol.primed = primed_gamma;
    TensorField q = seed;
    bool diverged = false;
    for (int it = 1; it <= opt.max_iterations; ++it) {
      const TensorField next = covariant_metric_derivative(hat_of(q), primed.g);
      const double diff = max_diff(next, q);
      if (!std::isfinite(diff)) {
        diverged = true;
        last = diff;
        break;
      }
      sol.history.push_back(diff);
      last = diff;
      TensorField upd = next;
      upd *= theta;
      q *= 1.0 - theta;
      q += upd;
      if (diff < opt.tolerance) {
        sol.iterations = it;
        sol.nonmetricity = q;
        sol.delta_gamma = nonmetric_contortion(q);
        sol.hat = hat_of(q);
        sol.residual = max_diff(covariant_metric_derivative(sol.hat, primed.g), q);
        return sol;
      }
      if (sol.history.size() >= 2 && diff > sol.history[sol.history.size() - 2]) {
        diverged = true;
        break;
      }
    }
    (void)diverged;
  }
  std::ostringstream os;
  os << "hat_connection_solve: no convergence, last |dQ| = " << last;
  throw ConvergenceError(os.str(), last);
}

TensorField teleparallel_residual(const Curvature& delta_r, const Curvature& primed_r, const Curvature& contortion_r) {
  TensorField r = delta_r.riemann + primed_r.riemann;
  r += contortion_r.riemann;
  return r;
}

TotalCurvature total_curvature(const HatSolution& s, const TensorField& contortion, const Metric& primed) {
  TensorField half = s.delta_gamma;
  half *= -0.5;
  TensorField neg = contortion;
  neg *= -1.0;
  TotalCurvature t{riemann_curvature(s.hat, primed), riemann_curvature(half, primed),
                   riemann_curvature(s.primed, primed), riemann_curvature(neg, primed), TensorField(primed.g.grid(), 4)};
  t.mismatch = t.hat.riemann - teleparallel_residual(t.from_nonmetricity, t.primed, t.from_contortion);
  return t;
}

TensorField curvature_identity_residual(const Curvature& hat_r, const TensorField& q, const TensorField& hat_gamma,
                                        const Metric& primed) {
  require_same_grid(q.grid(), hat_gamma.grid(), "curvature_identity_residual");
  require_same_grid(q.grid(), primed.g.grid(), "curvature_identity_residual");
  const Grid2D& grid = q.grid();
  const auto dq = gradient(q);
  const TensorField inv = exact_inverse(primed.g);
  TensorField out(grid, 4);
  for (int n = 0; n < grid.nodes(); ++n) {
    const auto qv = q.at_node(n);
    const auto gm = hat_gamma.at_node(n);
    const auto iv = inv.at_node(n);
    const auto rv = hat_r.riemann.at_node(n);
    double up[27], tors[27];
    for (int p = 0; p < 3; ++p)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          double s = 0.0, t = 0.0;
          for (int r = 0; r < 3; ++r) {
            s += iv[at2(p, r)] * gm[at3(r, a, b)];
            t += iv[at2(p, r)] * 0.5 * (gm[at3(r, b, a)] - gm[at3(r, a, b)]);
          }
          up[at3(p, a, b)] = s;
          tors[at3(p, a, b)] = t;
        }
    // nabla-hat_m Q_{q;lk}
    auto nabla = [&](int m, int qq, int l, int k) {
      double s = dq[m](n, at3(qq, l, k));
      for (int p = 0; p < 3; ++p)
        s -= up[at3(p, qq, m)] * qv[at3(p, l, k)] + up[at3(p, l, m)] * qv[at3(qq, p, k)] +
             up[at3(p, k, m)] * qv[at3(qq, l, p)];
      return s;
    };
    for (int l = 0; l < 3; ++l)
      for (int k = 0; k < 3; ++k)
        for (int m = 0; m < 3; ++m)
          for (int qq = 0; qq < 3; ++qq) {
            double s = rv[at4(l, k, m, qq)] + rv[at4(k, l, m, qq)];
            s -= nabla(m, qq, l, k) - nabla(qq, m, l, k);
            for (int p = 0; p < 3; ++p) {
              s -= 2.0 * tors[at3(p, m, qq)] * qv[at3(p, l, k)];
              s -= up[at3(p, l, m)] * qv[at3(qq, p, k)] - up[at3(p, l, qq)] * qv[at3(m, p, k)] +
                   up[at3(p, k, m)] * qv[at3(qq, l, p)] - up[at3(p, k, qq)] * qv[at3(m, l, p)];
            }
            out(n, at4(l, k, m, qq)) = s;
          }
  }
  return out;
}

}  // namespace defectgeom
