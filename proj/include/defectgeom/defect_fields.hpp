#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "defectgeom/grid.hpp"

namespace defectgeom {

// Straight screw dislocation along z with a capped core.
struct ScrewSource {
  double burgers = 0.0;
  Point2 center;
  double core_radius = 0.05;
};

enum class BlobKind { dislocation, disclination };

// Gaussian density whose surface integral is `charge` (row z only).
struct DensityBlob {
  BlobKind kind = BlobKind::dislocation;
  Vec3 charge{0.0, 0.0, 0.0};
  Point2 center;
  double width = 0.1;
};

// Smooth screw strain whose incompatibility is carried by a Gaussian
// z-dislocation density of the same width and total Burgers vector.
struct MollifiedScrew {
  double burgers = 0.0;
  Point2 center;
  double width = 0.1;
};

// E_zz = A exp(-r^2 / 2 w^2).
struct AxialBump {
  double amplitude = 0.0;
  Point2 center;
  double width = 0.1;
};

// In-plane strain from a stress function chi = A exp(-r^2 / 2 w^2):
// E_xx = chi_yy, E_yy = chi_xx, E_xy = -chi_xy.
struct AiryBump {
  double amplitude = 0.0;
  Point2 center;
  double width = 0.1;
};

// Displacement u = a sin(k . x + phase).
struct DisplacementWave {
  Vec3 amplitude{0.0, 0.0, 0.0};
  std::array<double, 2> wavevector{0.0, 0.0};
  double phase = 0.0;
};

struct ConcentrationBump {
  double amplitude = 0.0;
  Point2 center;
  double width = 0.1;
};

struct ConcentrationSpec {
  double background = 0.0;
  std::vector<ConcentrationBump> bumps;
};

struct TemperatureSpec {
  double base = 0.0;
  std::array<double, 2> gradient{0.0, 0.0};
};

struct DefectScene {
  std::vector<ScrewSource> screws;
  std::vector<DensityBlob> blobs;
  std::vector<MollifiedScrew> mollified_screws;
  std::vector<AxialBump> axial_bumps;
  std::vector<AiryBump> airy_bumps;
  std::vector<DisplacementWave> displacement_waves;
  std::optional<ConcentrationSpec> vacancies;
  std::optional<ConcentrationSpec> interstitials;
  std::optional<TemperatureSpec> temperature;
  Point2 reference;
};

TensorField screw_strain(const ScrewSource& src, const Grid2D& g);
// Regular part of the screw Frank tensor, layout [m][k].
TensorField screw_frank_regular(const ScrewSource& src, const Grid2D& g);

// exp(-r^2 / 2 w^2) / (2 pi w^2), no renormalization.
TensorField gaussian_profile(Point2 center, double width, const Grid2D& g);
// Row z = charge * profile, renormalized so the full-grid trapezoid integral equals the charge.
TensorField blob_density(const DensityBlob& b, const Grid2D& g);

// grad_u(p) returns d_l u_k in slot [k][l].
TensorField compatible_strain(const std::function<SmallTensor(Point2)>& grad_u, const Grid2D& g);

TensorField mollified_screw_strain(const MollifiedScrew& s, const Grid2D& g);
// Analytic Lambda_zz = B exp(-r^2 / 2 w^2) / (2 pi w^2).
TensorField mollified_screw_density(const MollifiedScrew& s, const Grid2D& g);
TensorField axial_strain(const AxialBump& b, const Grid2D& g);
TensorField airy_strain(const AiryBump& b, const Grid2D& g);
TensorField displacement_wave_strain(const DisplacementWave& w, const Grid2D& g);

TensorField scene_strain(const DefectScene& s, const Grid2D& g);
// Trace of the divergence-free strain part carried by the scene (axial and Airy terms).
TensorField scene_solenoidal_trace(const DefectScene& s, const Grid2D& g);
TensorField scene_dislocation_density(const DefectScene& s, const Grid2D& g);
TensorField scene_disclination_density(const DefectScene& s, const Grid2D& g);
TensorField concentration_field(const ConcentrationSpec& c, const Grid2D& g);
TensorField temperature_field(const TemperatureSpec& t, const Grid2D& g);

std::vector<std::string> scene_warnings(const DefectScene& s, const Grid2D& g);

}  // namespace defectgeom
