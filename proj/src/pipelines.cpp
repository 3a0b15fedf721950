#include "defectgeom/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>

#include "defectgeom/evolution.hpp"
#include "defectgeom/field_io.hpp"
#include "defectgeom/geometry.hpp"
#include "defectgeom/kinematics.hpp"
#include "defectgeom/point_defects.hpp"
#include "defectgeom/transport.hpp"

namespace defectgeom {

namespace {

double second_derivative_scale(const TensorField& e) {
  const TensorField ex = partial(e, Axis::x), ey = partial(e, Axis::y);
  return std::max({partial(ex, Axis::x).max_abs(), partial(ex, Axis::y).max_abs(), partial(ey, Axis::y).max_abs()});
}

double gradient_scale(const TensorField& f) {
  return std::max(partial(f, Axis::x).max_abs(), partial(f, Axis::y).max_abs());
}

double ratio(double num, double den) { return den > 0.0 ? num / den : num; }

double vmax(const Vec3& v) { return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])}); }

Vec3 vdiff(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Point2 snap(const Grid2D& g, Point2 p) {
  const double i = std::clamp(std::round((p.x - g.x0) / g.h), 0.0, double(g.nx - 1));
  const double j = std::clamp(std::round((p.y - g.y0) / g.h), 0.0, double(g.ny - 1));
  return {g.x(static_cast<int>(i)), g.y(static_cast<int>(j))};
}

SurfaceRegion stokes_region(const RunConfig& cfg, const Grid2D& g) {
  if (cfg.verify.stokes_region) {
    const auto& r = *cfg.verify.stokes_region;
    return SurfaceRegion::rectangle(g, r[0], r[1], r[2], r[3]);
  }
  const double mx = 0.1 * (g.x_max() - g.x0), my = 0.1 * (g.y_max() - g.y0);
  return SurfaceRegion::rectangle(g, g.x0 + mx, g.y0 + my, g.x_max() - mx, g.y_max() - my);
}

bool has_point_defects(const DefectScene& s) { return s.vacancies.has_value() || s.interstitials.has_value(); }

TensorField concentration_or_zero(const std::optional<ConcentrationSpec>& c, const Grid2D& g) {
  return c ? concentration_field(*c, g) : TensorField(g, 0);
}

void add(std::vector<ReportRow>& rows, const RunConfig& cfg, const std::string& name, const std::string& formula,
         double residual, std::optional<double> tol_override = std::nullopt) {
  ReportRow r;
  r.name = name;
  r.formula = formula;
  r.residual = residual;
  r.tolerance = tol_override ? *tol_override : tolerance_of(cfg, name);
  r.pass = std::isfinite(residual) && residual <= r.tolerance;
  rows.push_back(r);
}

struct Level {
  std::vector<ReportRow> rows;
  std::vector<std::string> warnings;
};

Level evaluate(const RunConfig& cfg, const Grid2D& g, double holonomy_side) {
  Level out;
  auto& rows = out.rows;
  out.warnings = scene_warnings(cfg.scene, g);
  KinematicState st = make_state(cfg.scene, g);
  st.contortion *= cfg.verify.corrupt_contortion;
  const TensorField& e = st.strain;
  const double e2 = second_derivative_scale(e);

  {
    const TensorField r = kroener_residual(e, st.disclination, st.contortion);
    const double scale = std::max({e2, st.disclination.max_abs(), gradient_scale(st.contortion)});
    add(rows, cfg, "kroener", "eta_zk - Theta_zk - eps_ab d_a kappa_kb", ratio(r.max_abs(), scale));
  }

  const TensorField torsion = dislocation_torsion(st.dislocation);
  const TensorField dgamma = connection_contortion(torsion);
  auto metric = std::make_shared<Metric>(bravais_metric(e));
  for (const auto& w : metric->warnings) out.warnings.push_back(w);
  const Connection cb = christoffel_bravais(metric);
  const Connection cf = full_connection(cb, dgamma);
  {
    const TensorField t = torsion_of(cf.gamma);
    add(rows, cfg, "torsion", "T(Gamma_B - DGamma) - T", ratio((t - torsion).max_abs(), torsion.max_abs()));
  }
  {
    const TensorField kd =
        contortion_from_densities(st.dislocation, TensorField(g, 2), st.reference);
    const TensorField closed = contortion_closed_form(kd);
    add(rows, cfg, "contortion_identity", "DGamma(kappa) - DGamma(T)",
        ratio((closed - dgamma).max_abs(), dgamma.max_abs()));
  }
  {
    const TensorField r = metric_compatibility_residual(cf.gamma, *metric);
    const double em = e.max_abs();
    const double bound = tolerance_of(cfg, "metric") * g.h * g.h + 10.0 * em * st.dislocation.max_abs() +
                         8.0 * em * em * cb.gamma.max_abs();
    add(rows, cfg, "metric", "nabla g_B under Gamma_B - DGamma", r.max_abs(), bound);
  }
  const Curvature rb = riemann_curvature(cb.gamma, *metric);
  {
    const TensorField eta = incompatibility(e);
    add(rows, cfg, "einstein", "G(R_B) - eta", ratio((rb.einstein - eta).max_abs(), e2));
    const TensorField gt = gauss_trace_check(scene_solenoidal_trace(cfg.scene, g), rb.gauss);
    add(rows, cfg, "gauss", "-Lap tr E^s - R_B", ratio(gt.max_abs(), e2));
  }
  {
    const SurfaceRegion s = stokes_region(cfg, g);
    const Polyline loop = s.boundary();
    const Vec3 bs = burgers_vector(st.dislocation, s);
    const Vec3 bl = line_integral(completed_burgers(e, st.contortion, st.reference), loop);
    add(rows, cfg, "stokes_burgers", "int Lambda dS - loop int of completed Burgers",
        vmax(vdiff(bs, bl)) / std::max(1.0, vmax(bs)), tolerance_of(cfg, "stokes"));
    const Vec3 fs = frank_vector(st.disclination, s);
    const Vec3 fl = line_integral(completed_frank(e, st.contortion), loop);
    add(rows, cfg, "stokes_frank", "int Theta dS - loop int of completed Frank",
        vmax(vdiff(fs, fl)) / std::max(1.0, vmax(fs)), tolerance_of(cfg, "stokes"));
  }
  {
    const Point2 c = snap(g, cfg.verify.holonomy_center.value_or(st.reference));
    const Polyline loop = Polyline::square(c, holonomy_side);
    double res = NAN;
    try {
      // Bravais connection: the full one is nearly flat in dislocation scenes, so its
      // flux is rounding noise. All three basis vectors, one can sit in the kernel.
      double err = 0.0, scale = 0.0;
      for (int a = 0; a < 3; ++a) {
        Vec3 v0{0.0, 0.0, 0.0};
        v0[a] = 1.0;
        const HolonomyResult hr = holonomy_gap(cb, rb, loop, v0);
        err = std::max(err, vmax(vdiff(hr.gap, hr.predicted)));
        scale = std::max(scale, vmax(hr.predicted));
      }
      // The flux is a difference of two derivative terms; in flat regions they cancel and
      // the prediction carries no scale, so normalize by area * max|dGamma| on the loop too.
      const auto dg = gradient(cb.gamma);
      const double half = 0.5 * holonomy_side + g.h;
      double dmax = 0.0;
      for (int n = 0; n < g.nodes(); ++n) {
        const Point2 p = g.position(n);
        if (std::abs(p.x - c.x) > half || std::abs(p.y - c.y) > half) continue;
        for (int k = 0; k < 27; ++k) dmax = std::max({dmax, std::abs(dg[0](n, k)), std::abs(dg[1](n, k))});
      }
      scale = std::max(scale, holonomy_side * holonomy_side * dmax);
      res = err / (scale + 1e-300);
    } catch (const std::domain_error& ex) {
      out.warnings.push_back(std::string("holonomy: ") + ex.what());
    }
    add(rows, cfg, "holonomy", "Bravais holonomy gap - curvature flux", res);
  }
  {
    const TensorField r = conservation_residual(st.contortion);
    add(rows, cfg, "conservation", "div kappa - grad tr kappa", ratio(r.max_abs(), gradient_scale(st.contortion)));
  }
  if (has_point_defects(cfg.scene)) {
    const TensorField cv = concentration_or_zero(cfg.scene.vacancies, g);
    const TensorField ci = concentration_or_zero(cfg.scene.interstitials, g);
    const Metric gp = point_defect_metric(cv, ci, *metric);
    for (const auto& w : gp.warnings)
      if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end()) out.warnings.push_back(w);
    try {
      const HatSolution s = hat_connection_solve(gp, *metric, dgamma);
      add(rows, cfg, "hat_fixed_point", "Q - nabla-hat g'", s.residual);
      const TotalCurvature tc = total_curvature(s, dgamma, gp);
      const TensorField ci_res = curvature_identity_residual(tc.hat, s.nonmetricity, s.hat, gp);
      const double scale = std::max(tc.hat.riemann.max_abs(), gradient_scale(s.nonmetricity));
      add(rows, cfg, "curvature_identity", "R-hat_(lk)mq - nabla-hat_[m Q_q];lk - 2 T Q - Gamma-hat Q",
          ratio(ci_res.max_abs(), scale));
      ReportRow info;
      info.name = "teleparallel_split";
      info.formula = "R-hat - (dR + R' + DR)";
      info.residual = ratio(tc.mismatch.max_abs(), tc.hat.riemann.max_abs());
      info.informational = true;
      rows.push_back(info);
    } catch (const ConvergenceError& ex) {
      out.warnings.push_back(ex.what());
      add(rows, cfg, "hat_fixed_point", "Q - nabla-hat g'", ex.residual());
    }
  }
  return out;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void prepare_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

void dump(const RunConfig& cfg, const TensorField& f, const std::string& name) {
  if (cfg.output.csv) write_field(f, join_path(cfg.output.dir, name + ".csv"), FieldFormat::csv);
  if (cfg.output.vtk) write_field(f, join_path(cfg.output.dir, name + ".vtk"), FieldFormat::vtk);
}

std::shared_ptr<Metric> scene_metric(const KinematicState& st) {
  return std::make_shared<Metric>(bravais_metric(st.strain));
}

Connection scene_connection(const KinematicState& st, const std::shared_ptr<Metric>& m, ConnectionKind kind) {
  const Connection cb = christoffel_bravais(m);
  if (kind == ConnectionKind::bravais) return cb;
  return full_connection(cb, connection_contortion(dislocation_torsion(st.dislocation)));
}

void log_warnings(std::ostream& log, const std::vector<std::string>& w) {
  for (const auto& s : w) log << "warning: " << s << '\n';
}

}  // namespace

bool VerificationReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.informational || r.pass; });
}

const ReportRow* VerificationReport::find(const std::string& name) const {
  for (const auto& r : rows)
    if (r.name == name) return &r;
  return nullptr;
}

std::string VerificationReport::to_csv() const {
  std::string s = "check,formula,residual,tolerance,status,order\n";
  for (const auto& r : rows) {
    s += r.name + ",\"" + r.formula + "\"," + format_value(r.residual) + ",";
    s += r.informational ? "-" : format_value(r.tolerance);
    s += std::string(",") + (r.informational ? "INFO" : (r.pass ? "PASS" : "FAIL")) + ",";
    s += r.order ? format_value(*r.order) : "-";
    s += '\n';
  }
  return s;
}

std::string VerificationReport::to_table() const {
  std::string s;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-20s %-12s %-12s %-6s %s\n", "check", "residual", "tolerance", "status", "order");
  s += buf;
  for (const auto& r : rows) {
    char ord[32] = "-";
    if (r.order) std::snprintf(ord, sizeof ord, "%.2f", *r.order);
    char tol[32] = "-";
    if (!r.informational) std::snprintf(tol, sizeof tol, "%.3e", r.tolerance);
    std::snprintf(buf, sizeof buf, "%-20s %-12.3e %-12s %-6s %s\n", r.name.c_str(), r.residual, tol,
                  r.informational ? "INFO" : (r.pass ? "PASS" : "FAIL"), ord);
    s += buf;
  }
  for (const auto& w : warnings) s += "warning: " + w + "\n";
  return s;
}

double tolerance_of(const RunConfig& cfg, const std::string& name) {
  const auto it = cfg.verify.tolerances.find(name);
  if (it != cfg.verify.tolerances.end()) return it->second;
  return default_tolerances().at(name);
}

// Residuals below this are rounding noise and carry no convergence order.
constexpr double kRoundingFloor = 1e-13;

VerificationReport build_report(const RunConfig& cfg) {
  const double side = cfg.verify.holonomy_side > 0.0 ? cfg.verify.holonomy_side : 8.0 * cfg.grid.h;
  Level base = evaluate(cfg, cfg.grid, side);
  VerificationReport rep{base.rows, base.warnings};
  if (cfg.refine > 0) {
    std::vector<ReportRow> coarse = base.rows;
    std::vector<ReportRow> fine;
    for (int l = 1; l <= cfg.refine; ++l) {
      if (l > 1) coarse = fine;
      fine = evaluate(cfg, cfg.grid.refined(l), side).rows;
    }
    for (auto& r : rep.rows)
      for (std::size_t i = 0; i < coarse.size() && i < fine.size(); ++i)
        if (coarse[i].name == r.name && fine[i].name == r.name && coarse[i].residual > kRoundingFloor &&
            fine[i].residual > kRoundingFloor)
          r.order = std::log2(coarse[i].residual / fine[i].residual);
  }
  return rep;
}

int run_verify(const RunConfig& cfg, std::ostream& log) {
  const VerificationReport rep = build_report(cfg);
  prepare_dir(cfg.output.dir);
  write_text(join_path(cfg.output.dir, "verify_report.csv"), rep.to_csv());
  log << rep.to_table();
  return rep.all_pass() ? 0 : 1;
}

int run_analyze(const RunConfig& cfg, std::ostream& log) {
  const Grid2D& g = cfg.grid;
  prepare_dir(cfg.output.dir);
  log_warnings(log, scene_warnings(cfg.scene, g));
  const KinematicState st = make_state(cfg.scene, g);
  dump(cfg, st.strain, "strain");
  dump(cfg, frank_tensor(st.strain), "frank");
  dump(cfg, incompatibility(st.strain), "incompatibility");
  dump(cfg, st.disclination, "disclination_density");
  dump(cfg, st.dislocation, "dislocation_density");
  dump(cfg, st.contortion, "contortion");
  dump(cfg, completed_frank(st.strain, st.contortion), "completed_frank");
  dump(cfg, completed_burgers(st.strain, st.contortion, st.reference), "completed_burgers");
  dump(cfg, kroener_residual(st.strain, st.disclination, st.contortion), "kroener_residual");
  const TensorField rot = bravais_rotation_field(st.strain, st.contortion, st.reference);
  dump(cfg, rot, "bravais_rotation");
  dump(cfg, bravais_distortion_field(st.strain, rot), "bravais_distortion");
  auto m = scene_metric(st);
  log_warnings(log, m->warnings);
  dump(cfg, m->g, "bravais_metric");
  const Connection cb = christoffel_bravais(m);
  const TensorField torsion = dislocation_torsion(st.dislocation);
  const TensorField dg = connection_contortion(torsion);
  dump(cfg, cb.gamma, "christoffel_bravais");
  dump(cfg, torsion, "torsion");
  dump(cfg, dg, "connection_contortion");
  const Curvature rb = riemann_curvature(cb.gamma, *m);
  dump(cfg, rb.riemann, "riemann_bravais");
  dump(cfg, rb.ricci, "ricci_bravais");
  dump(cfg, rb.gauss, "gauss_bravais");
  dump(cfg, rb.einstein, "einstein_bravais");
  dump(cfg, conservation_residual(st.contortion), "conservation_residual");
  if (has_point_defects(cfg.scene)) {
    const TensorField cv = concentration_or_zero(cfg.scene.vacancies, g);
    const TensorField ci = concentration_or_zero(cfg.scene.interstitials, g);
    const Metric gp = point_defect_metric(cv, ci, *m);
    dump(cfg, cv, "vacancies");
    dump(cfg, ci, "interstitials");
    dump(cfg, gp.g, "point_defect_metric");
    const HatSolution s = hat_connection_solve(gp, *m, dg);
    log << "hat connection: " << s.iterations << " iterations, residual " << s.residual << '\n';
    dump(cfg, s.nonmetricity, "nonmetricity");
    dump(cfg, s.hat, "hat_connection");
    const TotalCurvature tc = total_curvature(s, dg, gp);
    dump(cfg, tc.hat.riemann, "riemann_hat");
    dump(cfg, tc.mismatch, "teleparallel_mismatch");
    dump(cfg, curvature_identity_residual(tc.hat, s.nonmetricity, s.hat, gp), "curvature_identity_residual");
  }
  log << "wrote fields to " << cfg.output.dir << '\n';
  return 0;
}

int run_transport(const RunConfig& cfg, std::ostream& log) {
  const Grid2D& g = cfg.grid;
  prepare_dir(cfg.output.dir);
  const KinematicState st = make_state(cfg.scene, g);
  auto m = scene_metric(st);
  log_warnings(log, m->warnings);
  const Connection c = scene_connection(st, m, cfg.transport.connection);
  const Curvature r = riemann_curvature(c.gamma, *m);
  TransportOptions opt;
  opt.substep = cfg.transport.substep;
  std::string trace = "path,vertex,x,y,v1,v2,v3\n";
  std::string summary = "path,closed,metric_length,gap1,gap2,gap3,predicted1,predicted2,predicted3\n";
  int code = 0;
  for (const auto& p : cfg.transport.paths) {
    try {
      const TransportResult res = parallel_transport(c, cfg.transport.vector, p.path, opt);
      for (std::size_t i = 0; i < res.trace.size(); ++i) {
        const Point2 q = p.path.vertices[i];
        trace += p.name + "," + std::to_string(i) + "," + format_value(q.x) + "," + format_value(q.y);
        for (double v : res.trace[i]) trace += "," + format_value(v);
        trace += '\n';
      }
      summary += p.name + "," + (p.path.closed ? "1" : "0") + "," + format_value(res.metric_length);
      if (p.path.closed) {
        const HolonomyResult h = holonomy_gap(c, r, p.path, cfg.transport.vector, opt);
        for (double v : h.gap) summary += "," + format_value(v);
        for (double v : h.predicted) summary += "," + format_value(v);
      } else {
        summary += ",-,-,-,-,-,-";
      }
      summary += '\n';
    } catch (const std::domain_error& ex) {
      log << p.name << ": " << ex.what() << '\n';
      code = 2;
    }
  }
  write_text(join_path(cfg.output.dir, "transport_trace.csv"), trace);
  write_text(join_path(cfg.output.dir, "transport_summary.csv"), summary);
  log << summary;
  return code;
}

int run_geodesic(const RunConfig& cfg, std::ostream& log) {
  prepare_dir(cfg.output.dir);
  const KinematicState st = make_state(cfg.scene, cfg.grid);
  auto m = scene_metric(st);
  log_warnings(log, m->warnings);
  const Connection c = scene_connection(st, m, cfg.geodesic.connection);
  GeodesicOptions opt;
  opt.step = cfg.geodesic.step;
  const GeodesicResult res = geodesic_trace(c, cfg.geodesic.start, cfg.geodesic.tangent, cfg.geodesic.length, opt);
  std::string out = "index,x,y,t1,t2,t3\n";
  for (std::size_t i = 0; i < res.points.size(); ++i) {
    out += std::to_string(i) + "," + format_value(res.points[i].x) + "," + format_value(res.points[i].y);
    for (double v : res.tangents[i]) out += "," + format_value(v);
    out += '\n';
  }
  write_text(join_path(cfg.output.dir, "geodesic.csv"), out);
  log << "geodesic: " << res.points.size() << " points, arc length " << res.arc_length
      << (res.exited ? ", left the grid" : "") << '\n';
  return 0;
}

int run_evolve(const RunConfig& cfg, std::ostream& log) {
  const Grid2D& g = cfg.grid;
  prepare_dir(cfg.output.dir);
  const EvolveSpec& ev = cfg.evolve;
  EvolutionConfig ec;
  ec.vacancy.diffusivity = ev.vacancy_diffusivity;
  ec.interstitial.diffusivity = ev.interstitial_diffusivity;
  ec.vacancy.thermodiffusivity = ev.vacancy_thermodiffusivity;
  ec.interstitial.thermodiffusivity = ev.interstitial_thermodiffusivity;
  ec.recombination = ev.recombination;
  for (int a = 0; a < 9; ++a) {
    ec.kappa_diffusivity[10 * a] = ev.kappa_diffusivity;
    ec.kappa_thermodiffusivity[10 * a] = ev.kappa_thermodiffusivity;
  }
  if (cfg.scene.temperature) ec.temperature = temperature_field(*cfg.scene.temperature, g);
  if (ev.velocity[0] != 0.0 || ev.velocity[1] != 0.0) {
    TensorField v(g, 1);
    for (int n = 0; n < g.nodes(); ++n) {
      v(n, X) = ev.velocity[0];
      v(n, Y) = ev.velocity[1];
    }
    ec.velocity = v;
  }
  ec.dt = ev.dt;
  if (ec.dt == 0.0) {
    double lam = std::max({max_symmetric_eigenvalue(ev.vacancy_diffusivity.components().data(), 3),
                           max_symmetric_eigenvalue(ev.interstitial_diffusivity.components().data(), 3),
                           ev.kappa_diffusivity});
    if (!(lam > 0.0)) throw std::invalid_argument("evolve: dt is required when nothing diffuses");
    ec.dt = ec.diffusive_cfl * g.h * g.h / lam;
  }
  ec.t_end = ec.dt * ev.steps;

  TensorField cv = concentration_or_zero(cfg.scene.vacancies, g);
  TensorField ci = concentration_or_zero(cfg.scene.interstitials, g);
  TensorField kappa = make_state(cfg.scene, g).contortion;
  const bool move_kappa = ev.kappa_diffusivity != 0.0 || ev.kappa_thermodiffusivity != 0.0 || ec.velocity;

  std::string series =
      "step,t,mass_vacancies,mass_interstitials,clipped_vacancies,clipped_interstitials,recombined,conservation\n";
  auto record = [&](int step, const PointDefectStep* s) {
    series += std::to_string(step) + "," + format_value(step * ec.dt) + "," + format_value(total_mass(cv)) + "," +
              format_value(total_mass(ci)) + "," + format_value(s ? s->clipped_vacancies : 0.0) + "," +
              format_value(s ? s->clipped_interstitials : 0.0) + "," + format_value(s ? s->recombined : 0.0) + "," +
              format_value(conservation_residual(kappa).max_abs()) + "\n";
  };
  record(0, nullptr);
  for (int step = 1; step <= ev.steps; ++step) {
    const PointDefectStep s = step_point_defects(cv, ci, ec);
    if (move_kappa) {
      kappa = step_contortion(kappa, ec, &cv, &ci);
      if (ev.project) kappa = project_contortion(kappa);
    }
    cv = s.vacancies;
    ci = s.interstitials;
    if (step % ev.record_every == 0 || step == ev.steps) record(step, &s);
  }
  write_text(join_path(cfg.output.dir, "evolve_series.csv"), series);
  dump(cfg, cv, "vacancies_final");
  dump(cfg, ci, "interstitials_final");
  dump(cfg, kappa, "contortion_final");
  log << "evolved " << ev.steps << " steps of dt = " << ec.dt << '\n';
  return 0;
}

}  // namespace defectgeom
