#include "defectgeom/evolution.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace defectgeom {

namespace {

struct Drift {
  std::vector<double> bx, by;
};

// y-derivative at node (i, j): central inside, one-sided on the edge rows.
double dy_at(const std::vector<double>& u, const Grid2D& g, int i, int j) {
  if (g.ny < 2) return 0.0;
  if (j == 0) return (u[g.node(i, 1)] - u[g.node(i, 0)]) / g.h;
  if (j == g.ny - 1) return (u[g.node(i, j)] - u[g.node(i, j - 1)]) / g.h;
  return (u[g.node(i, j + 1)] - u[g.node(i, j - 1)]) / (2.0 * g.h);
}

double dx_at(const std::vector<double>& u, const Grid2D& g, int i, int j) {
  if (g.nx < 2) return 0.0;
  if (i == 0) return (u[g.node(1, j)] - u[g.node(0, j)]) / g.h;
  if (i == g.nx - 1) return (u[g.node(i, j)] - u[g.node(i - 1, j)]) / g.h;
  return (u[g.node(i + 1, j)] - u[g.node(i - 1, j)]) / (2.0 * g.h);
}

// Accumulates dt-free rate of du/dt = div(D grad u + u b) into rate, using
// face fluxes on the dual cells. D is the in-plane block of d; b may be null.
void flux_rate(const std::vector<double>& u, const Grid2D& g, const std::vector<double>& vol, const SmallTensor* d,
               const Drift* b, double scale, std::vector<double>& rate) {
  const double h = g.h;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      const int a = g.node(i, j), c = g.node(i + 1, j);
      const double len = (j == 0 || j == g.ny - 1) && g.ny > 1 ? 0.5 * h : h;
      double jx = 0.0;
      if (d) {
        const double gx = (u[c] - u[a]) / h;
        const double gy = 0.5 * (dy_at(u, g, i, j) + dy_at(u, g, i + 1, j));
        jx += (*d)[at2(X, X)] * gx + (*d)[at2(X, Y)] * gy;
      }
      if (b) {
        const double bf = 0.5 * (b->bx[a] + b->bx[c]);
        jx += bf * (bf < 0.0 ? u[a] : u[c]);
      }
      jx *= scale * len;
      rate[a] += jx / vol[a];
      rate[c] -= jx / vol[c];
    }
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int a = g.node(i, j), c = g.node(i, j + 1);
      const double len = (i == 0 || i == g.nx - 1) && g.nx > 1 ? 0.5 * h : h;
      double jy = 0.0;
      if (d) {
        const double gy = (u[c] - u[a]) / h;
        const double gx = 0.5 * (dx_at(u, g, i, j) + dx_at(u, g, i, j + 1));
        jy += (*d)[at2(Y, X)] * gx + (*d)[at2(Y, Y)] * gy;
      }
      if (b) {
        const double bf = 0.5 * (b->by[a] + b->by[c]);
        jy += bf * (bf < 0.0 ? u[a] : u[c]);
      }
      jy *= scale * len;
      rate[a] += jy / vol[a];
      rate[c] -= jy / vol[c];
    }
}

// -v.grad u, first-order upwind.
void advect_rate(const std::vector<double>& u, const TensorField& v, std::vector<double>& rate) {
  const Grid2D& g = v.grid();
  const double h = g.h;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int n = g.node(i, j);
      const double vx = v(n, X), vy = v(n, Y);
      double ux = 0.0, uy = 0.0;
      if (g.nx > 1) {
        const bool back = (vx > 0.0 && i > 0) || i == g.nx - 1;
        ux = back ? (u[n] - u[g.node(i - 1, j)]) / h : (u[g.node(i + 1, j)] - u[n]) / h;
      }
      if (g.ny > 1) {
        const bool back = (vy > 0.0 && j > 0) || j == g.ny - 1;
        uy = back ? (u[n] - u[g.node(i, j - 1)]) / h : (u[g.node(i, j + 1)] - u[n]) / h;
      }
      rate[n] -= vx * ux + vy * uy;
    }
}

std::array<std::vector<double>, 2> temperature_gradient(const EvolutionConfig& cfg, const Grid2D& g) {
  std::array<std::vector<double>, 2> out{std::vector<double>(g.nodes(), 0.0), std::vector<double>(g.nodes(), 0.0)};
  if (!cfg.temperature) return out;
  require_same_grid(cfg.temperature->grid(), g, "evolution temperature");
  const auto d = gradient(*cfg.temperature);
  for (int n = 0; n < g.nodes(); ++n) {
    out[0][n] = d[X](n, 0);
    out[1][n] = d[Y](n, 0);
  }
  return out;
}

double max_speed(const std::optional<TensorField>& v) {
  if (!v) return 0.0;
  double m = 0.0;
  for (int n = 0; n < v->nodes(); ++n) m = std::max(m, std::hypot((*v)(n, X), (*v)(n, Y)));
  return m;
}

void check_advective(const Grid2D& g, const EvolutionConfig& cfg, double speed, const char* what) {
  if (cfg.dt * speed / g.h > cfg.advective_cfl) {
    std::ostringstream os;
    os << what << ": dt = " << cfg.dt << " exceeds the advective bound " << cfg.advective_cfl * g.h / speed;
    throw std::invalid_argument(os.str());
  }
}

void check_diffusive(const Grid2D& g, const EvolutionConfig& cfg, double lambda, const char* what) {
  if (lambda > 0.0 && cfg.dt > cfg.diffusive_cfl * g.h * g.h / lambda) {
    std::ostringstream os;
    os << what << ": dt = " << cfg.dt << " exceeds " << cfg.diffusive_cfl << " h^2 / lambda_max = "
       << cfg.diffusive_cfl * g.h * g.h / lambda;
    throw std::invalid_argument(os.str());
  }
}

void require_dt(const EvolutionConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("evolution: dt must be positive");
}

Drift species_drift(const SpeciesParams& p, const std::array<std::vector<double>, 2>& gt) {
  Drift b{std::vector<double>(gt[0].size()), std::vector<double>(gt[0].size())};
  for (std::size_t n = 0; n < gt[0].size(); ++n) {
    b.bx[n] = p.thermodiffusivity[at2(X, X)] * gt[0][n] + p.thermodiffusivity[at2(X, Y)] * gt[1][n];
    b.by[n] = p.thermodiffusivity[at2(Y, X)] * gt[0][n] + p.thermodiffusivity[at2(Y, Y)] * gt[1][n];
  }
  return b;
}

double drift_speed(const Drift& b) {
  double m = 0.0;
  for (std::size_t n = 0; n < b.bx.size(); ++n) m = std::max(m, std::hypot(b.bx[n], b.by[n]));
  return m;
}

std::vector<double> scalar_values(const TensorField& f, int comp) {
  std::vector<double> u(f.nodes());
  for (int n = 0; n < f.nodes(); ++n) u[n] = f(n, comp);
  return u;
}

bool on_boundary(const Grid2D& g, int n) {
  const int i = n % g.nx, j = n / g.nx;
  return i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1;
}

}  // namespace

double max_symmetric_eigenvalue(const double* a, int n) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = 0.5 * (a[i * n + j] + a[j * n + i]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

std::vector<double> cell_volumes(const Grid2D& g) {
  std::vector<double> v(g.nodes());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double w = g.h * g.h;
      if (g.nx > 1 && (i == 0 || i == g.nx - 1)) w *= 0.5;
      if (g.ny > 1 && (j == 0 || j == g.ny - 1)) w *= 0.5;
      v[g.node(i, j)] = w;
    }
  return v;
}

double total_mass(const TensorField& c) {
  const auto vol = cell_volumes(c.grid());
  double m = 0.0;
  for (int n = 0; n < c.nodes(); ++n) m += vol[n] * c(n, 0);
  return m;
}

void check_point_defect_cfl(const Grid2D& g, const EvolutionConfig& cfg) {
  require_dt(cfg);
  const auto gt = temperature_gradient(cfg, g);
  for (const SpeciesParams* p : {&cfg.vacancy, &cfg.interstitial}) {
    check_diffusive(g, cfg, max_symmetric_eigenvalue(p->diffusivity.components().data(), 3), "step_point_defects");
    check_advective(g, cfg, max_speed(cfg.velocity) + drift_speed(species_drift(*p, gt)), "step_point_defects");
  }
}

void check_contortion_cfl(const Grid2D& g, const EvolutionConfig& cfg) {
  require_dt(cfg);
  check_diffusive(g, cfg, max_symmetric_eigenvalue(cfg.kappa_diffusivity.components().data(), 9), "step_contortion");
  const auto gt = temperature_gradient(cfg, g);
  double row = 0.0;
  for (int a = 0; a < 9; ++a) {
    double s = 0.0;
    for (int b = 0; b < 9; ++b) s += std::abs(cfg.kappa_thermodiffusivity[9 * a + b]);
    row = std::max(row, s);
  }
  double gmax = 0.0;
  for (std::size_t n = 0; n < gt[0].size(); ++n) gmax = std::max(gmax, std::hypot(gt[0][n], gt[1][n]));
  check_advective(g, cfg, max_speed(cfg.velocity) + row * gmax, "step_contortion");
}

PointDefectStep step_point_defects(const TensorField& cv, const TensorField& ci, const EvolutionConfig& cfg) {
  require_same_grid(cv.grid(), ci.grid(), "step_point_defects");
  if (cv.rank() != 0 || ci.rank() != 0) throw std::invalid_argument("step_point_defects: concentrations must be scalar");
  const Grid2D& g = cv.grid();
  check_point_defect_cfl(g, cfg);
  for (int n = 0; n < g.nodes(); ++n)
    if (cv(n, 0) < 0.0 || ci(n, 0) < 0.0) throw std::invalid_argument("step_point_defects: negative concentration");
  if (cfg.velocity) require_same_grid(cfg.velocity->grid(), g, "step_point_defects velocity");

  const auto vol = cell_volumes(g);
  const auto gt = temperature_gradient(cfg, g);
  const std::vector<double> uv = scalar_values(cv, 0), ui = scalar_values(ci, 0);
  PointDefectStep out{cv, ci};

  std::vector<double> sink(g.nodes());
  for (int n = 0; n < g.nodes(); ++n) {
    sink[n] = cfg.recombination * uv[n] * ui[n];
    out.recombined += cfg.dt * vol[n] * sink[n];
  }

  auto advance = [&](const std::vector<double>& u, const SpeciesParams& p, TensorField& dst, double& clipped) {
    std::vector<double> rate(g.nodes(), 0.0);
    const Drift b = species_drift(p, gt);
    flux_rate(u, g, vol, &p.diffusivity, cfg.temperature ? &b : nullptr, 1.0, rate);
    if (cfg.velocity) advect_rate(u, *cfg.velocity, rate);
    for (int n = 0; n < g.nodes(); ++n) {
      if (p.boundary == Boundary::dirichlet && on_boundary(g, n)) continue;
      double next = u[n] + cfg.dt * (rate[n] - sink[n]);
      if (next < 0.0) {
        clipped += -next * vol[n];
        next = 0.0;
      }
      dst(n, 0) = next;
    }
  };
  advance(uv, cfg.vacancy, out.vacancies, out.clipped_vacancies);
  advance(ui, cfg.interstitial, out.interstitials, out.clipped_interstitials);
  return out;
}

TensorField step_contortion(const TensorField& kappa, const EvolutionConfig& cfg, const TensorField* cv,
                            const TensorField* ci) {
  if (kappa.rank() != 2) throw std::invalid_argument("step_contortion: kappa must be rank 2");
  const Grid2D& g = kappa.grid();
  check_contortion_cfl(g, cfg);
  if (cfg.velocity) require_same_grid(cfg.velocity->grid(), g, "step_contortion velocity");
  const auto vol = cell_volumes(g);
  const auto gt = temperature_gradient(cfg, g);

  std::array<std::vector<double>, 9> u;
  for (int a = 0; a < 9; ++a) u[a] = scalar_values(kappa, a);

  SmallTensor iso(2);
  iso[at2(X, X)] = 1.0;
  iso[at2(Y, Y)] = 1.0;
  std::array<std::vector<double>, 9> lap;
  for (int b = 0; b < 9; ++b) {
    lap[b].assign(g.nodes(), 0.0);
    bool used = false;
    for (int a = 0; a < 9; ++a) used = used || cfg.kappa_diffusivity[9 * a + b] != 0.0;
    if (used) flux_rate(u[b], g, vol, &iso, nullptr, 1.0, lap[b]);
  }

  std::array<std::vector<double>, 9> rate;
  for (int a = 0; a < 9; ++a) {
    rate[a].assign(g.nodes(), 0.0);
    for (int b = 0; b < 9; ++b) {
      const double m = cfg.kappa_diffusivity[9 * a + b];
      if (m != 0.0)
        for (int n = 0; n < g.nodes(); ++n) rate[a][n] += m * lap[b][n];
      const double mt = cfg.kappa_thermodiffusivity[9 * a + b];
      if (mt != 0.0 && cfg.temperature) {
        Drift d{gt[0], gt[1]};
        for (std::size_t n = 0; n < d.bx.size(); ++n) {
          d.bx[n] *= mt;
          d.by[n] *= mt;
        }
        flux_rate(u[b], g, vol, nullptr, &d, 1.0, rate[a]);
      }
    }
    if (cfg.velocity) advect_rate(u[a], *cfg.velocity, rate[a]);
  }

  TensorField out = kappa;
  for (int n = 0; n < g.nodes(); ++n) {
    if (cfg.kappa_boundary == Boundary::dirichlet && on_boundary(g, n)) continue;
    SmallTensor src(2);
    if (cfg.kappa_source) {
      const double v = cv ? (*cv)(n, 0) : 0.0;
      const double i = ci ? (*ci)(n, 0) : 0.0;
      src = cfg.kappa_source(kappa.value(n), v, i, Vec3{gt[0][n], gt[1][n], 0.0});
    }
    for (int a = 0; a < 9; ++a) out(n, a) = u[a][n] + cfg.dt * (rate[a][n] - src[a]);
  }
  return out;
}

TensorField conservation_residual(const TensorField& kappa) {
  if (kappa.rank() != 2) throw std::invalid_argument("conservation_residual: kappa must be rank 2");
  const auto d = gradient(kappa);
  TensorField out(kappa.grid(), 1);
  for (int n = 0; n < kappa.nodes(); ++n)
    for (int k = 0; k < 3; ++k) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) s += d[i](n, at2(i, k)) - d[k](n, at2(i, i));
      out(n, k) = s;
    }
  return out;
}

TensorField project_contortion(const TensorField& kappa) {
  if (kappa.rank() != 2) throw std::invalid_argument("project_contortion: kappa must be rank 2");
  TensorField out(kappa.grid(), 2);
  for (int n = 0; n < kappa.nodes(); ++n) {
    const double half = (kappa(n, at2(Z, Z)) - kappa(n, at2(X, X)) - kappa(n, at2(Y, Y))) / 3.0;
    out(n, at2(Z, X)) = kappa(n, at2(Z, X));
    out(n, at2(Z, Y)) = kappa(n, at2(Z, Y));
    out(n, at2(Z, Z)) = half;
    out(n, at2(X, X)) = -half;
    out(n, at2(Y, Y)) = -half;
  }
  return out;
}

}  // namespace defectgeom
