#include "defectgeom/defect_fields.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace defectgeom {

namespace {

constexpr double kPi = std::numbers::pi;

double gauss(double dx, double dy, double w) { return std::exp(-(dx * dx + dy * dy) / (2.0 * w * w)); }

// (1 - exp(-r^2 / 2 w^2)) / r^2, finite at r = 0.
double mollifier_ratio(double r2, double w) {
  const double u = r2 / (2.0 * w * w);
  if (u < 1e-8) return (1.0 - 0.5 * u) / (2.0 * w * w);
  return -std::expm1(-u) / r2;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

}  // namespace

TensorField screw_strain(const ScrewSource& src, const Grid2D& g) {
  require_positive(src.core_radius, "screw core radius");
  const double rc2 = src.core_radius * src.core_radius;
  const double a = src.burgers / (4.0 * kPi);
  return TensorField::from_function(g, 2, [&](Point2 p) {
    const double dx = p.x - src.center.x, dy = p.y - src.center.y;
    const double r2 = std::max(dx * dx + dy * dy, rc2);
    SmallTensor e(2);
    e[at2(X, Z)] = e[at2(Z, X)] = -a * dy / r2;
    e[at2(Y, Z)] = e[at2(Z, Y)] = a * dx / r2;
    return e;
  });
}

TensorField screw_frank_regular(const ScrewSource& src, const Grid2D& g) {
  require_positive(src.core_radius, "screw core radius");
  const double rc2 = src.core_radius * src.core_radius;
  const double a = src.burgers / (4.0 * kPi);
  return TensorField::from_function(g, 2, [&](Point2 p) {
    const double dx = p.x - src.center.x, dy = p.y - src.center.y;
    const double r2 = dx * dx + dy * dy;
    SmallTensor f(2);
    if (r2 == 0.0) return f;
    // cos 2t = (dx^2 - dy^2) / r^2, sin 2t = 2 dx dy / r^2
    const double c2 = (dx * dx - dy * dy) / r2, s2 = 2.0 * dx * dy / r2;
    const double s = -a / std::max(r2, rc2);
    f[at2(X, X)] = s * c2;
    f[at2(X, Y)] = f[at2(Y, X)] = s * s2;
    f[at2(Y, Y)] = -s * c2;
    return f;
  });
}

TensorField gaussian_profile(Point2 c, double width, const Grid2D& g) {
  require_positive(width, "blob width");
  const double norm = 1.0 / (2.0 * kPi * width * width);
  TensorField out(g, 0);
  for (int n = 0; n < g.nodes(); ++n) {
    const Point2 p = g.position(n);
    out(n, 0) = norm * gauss(p.x - c.x, p.y - c.y, width);
  }
  return out;
}

TensorField blob_density(const DensityBlob& b, const Grid2D& g) {
  const TensorField prof = gaussian_profile(b.center, b.width, g);
  const double total = surface_integral(prof, SurfaceRegion::whole(g))[0];
  if (!(total > 0.0)) throw std::domain_error("blob_density: blob has no support on the grid");
  TensorField out(g, 2);
  for (int n = 0; n < g.nodes(); ++n)
    for (int k = 0; k < 3; ++k) out(n, at2(Z, k)) = b.charge[k] * prof(n, 0) / total;
  return out;
}

TensorField compatible_strain(const std::function<SmallTensor(Point2)>& grad_u, const Grid2D& g) {
  return TensorField::from_function(g, 2, [&](Point2 p) { return sym_part(grad_u(p)); });
}

TensorField mollified_screw_strain(const MollifiedScrew& s, const Grid2D& g) {
  require_positive(s.width, "mollified screw width");
  const double a = s.burgers / (4.0 * kPi);
  return TensorField::from_function(g, 2, [&](Point2 p) {
    const double dx = p.x - s.center.x, dy = p.y - s.center.y;
    const double f = mollifier_ratio(dx * dx + dy * dy, s.width);
    SmallTensor e(2);
    e[at2(X, Z)] = e[at2(Z, X)] = -a * dy * f;
    e[at2(Y, Z)] = e[at2(Z, Y)] = a * dx * f;
    return e;
  });
}

TensorField mollified_screw_density(const MollifiedScrew& s, const Grid2D& g) {
  const TensorField prof = gaussian_profile(s.center, s.width, g);
  TensorField out(g, 2);
  for (int n = 0; n < g.nodes(); ++n) out(n, at2(Z, Z)) = s.burgers * prof(n, 0);
  return out;
}

TensorField axial_strain(const AxialBump& b, const Grid2D& g) {
  require_positive(b.width, "axial bump width");
  return TensorField::from_function(g, 2, [&](Point2 p) {
    SmallTensor e(2);
    e[at2(Z, Z)] = b.amplitude * gauss(p.x - b.center.x, p.y - b.center.y, b.width);
    return e;
  });
}

TensorField airy_strain(const AiryBump& b, const Grid2D& g) {
  require_positive(b.width, "Airy bump width");
  const double w2 = b.width * b.width;
  return TensorField::from_function(g, 2, [&](Point2 p) {
    const double dx = p.x - b.center.x, dy = p.y - b.center.y;
    const double chi = b.amplitude * gauss(dx, dy, b.width);
    const double cxx = (dx * dx / w2 - 1.0) / w2 * chi;
    const double cyy = (dy * dy / w2 - 1.0) / w2 * chi;
    const double cxy = dx * dy / (w2 * w2) * chi;
    SmallTensor e(2);
    e[at2(X, X)] = cyy;
    e[at2(Y, Y)] = cxx;
    e[at2(X, Y)] = e[at2(Y, X)] = -cxy;
    return e;
  });
}

TensorField displacement_wave_strain(const DisplacementWave& w, const Grid2D& g) {
  return compatible_strain(
      [&](Point2 p) {
        const double c = std::cos(w.wavevector[0] * p.x + w.wavevector[1] * p.y + w.phase);
        SmallTensor du(2);
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 2; ++l) du[at2(k, l)] = w.amplitude[k] * w.wavevector[l] * c;
        return du;
      },
      g);
}

TensorField scene_strain(const DefectScene& s, const Grid2D& g) {
  TensorField e(g, 2);
  for (const auto& src : s.screws) e += screw_strain(src, g);
  for (const auto& m : s.mollified_screws) e += mollified_screw_strain(m, g);
  for (const auto& b : s.axial_bumps) e += axial_strain(b, g);
  for (const auto& b : s.airy_bumps) e += airy_strain(b, g);
  for (const auto& w : s.displacement_waves) e += displacement_wave_strain(w, g);
  return e;
}

TensorField scene_solenoidal_trace(const DefectScene& s, const Grid2D& g) {
  TensorField tr(g, 0);
  for (const auto& b : s.axial_bumps) {
    const TensorField e = axial_strain(b, g);
    for (int n = 0; n < g.nodes(); ++n) tr(n, 0) += e(n, at2(Z, Z));
  }
  for (const auto& b : s.airy_bumps) {
    const TensorField e = airy_strain(b, g);
    for (int n = 0; n < g.nodes(); ++n) tr(n, 0) += e(n, at2(X, X)) + e(n, at2(Y, Y));
  }
  return tr;
}

TensorField scene_dislocation_density(const DefectScene& s, const Grid2D& g) {
  TensorField lam(g, 2);
  for (const auto& b : s.blobs)
    if (b.kind == BlobKind::dislocation) lam += blob_density(b, g);
  for (const auto& m : s.mollified_screws) lam += mollified_screw_density(m, g);
  return lam;
}

TensorField scene_disclination_density(const DefectScene& s, const Grid2D& g) {
  TensorField th(g, 2);
  for (const auto& b : s.blobs)
    if (b.kind == BlobKind::disclination) th += blob_density(b, g);
  return th;
}

TensorField concentration_field(const ConcentrationSpec& c, const Grid2D& g) {
  TensorField out(g, 0);
  for (int n = 0; n < g.nodes(); ++n) {
    const Point2 p = g.position(n);
    double v = c.background;
    for (const auto& b : c.bumps) v += b.amplitude * gauss(p.x - b.center.x, p.y - b.center.y, b.width);
    out(n, 0) = v;
  }
  return out;
}

TensorField temperature_field(const TemperatureSpec& t, const Grid2D& g) {
  TensorField out(g, 0);
  for (int n = 0; n < g.nodes(); ++n) {
    const Point2 p = g.position(n);
    out(n, 0) = t.base + t.gradient[0] * p.x + t.gradient[1] * p.y;
  }
  return out;
}

std::vector<std::string> scene_warnings(const DefectScene& s, const Grid2D& g) {
  std::vector<std::string> w;
  auto note = [&](const std::string& what, std::size_t idx, double value) {
    std::ostringstream os;
    os << what << " #" << idx << ": size " << value << " is below 2h = " << 2.0 * g.h;
    w.push_back(os.str());
  };
  for (std::size_t i = 0; i < s.screws.size(); ++i)
    if (s.screws[i].core_radius < 2.0 * g.h) note("screw core radius", i, s.screws[i].core_radius);
  for (std::size_t i = 0; i < s.blobs.size(); ++i)
    if (s.blobs[i].width < 2.0 * g.h) note("blob width", i, s.blobs[i].width);
  for (std::size_t i = 0; i < s.mollified_screws.size(); ++i)
    if (s.mollified_screws[i].width < 2.0 * g.h) note("mollified screw width", i, s.mollified_screws[i].width);
  if (!g.contains(s.reference)) w.push_back("reference point lies outside the grid");
  return w;
}

}  // namespace defectgeom
