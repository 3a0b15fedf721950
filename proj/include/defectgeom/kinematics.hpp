#pragma once

#include <string>
#include <vector>

#include "defectgeom/defect_fields.hpp"
#include "defectgeom/grid.hpp"

namespace defectgeom {

struct KinematicState {
  TensorField strain;
  TensorField disclination;  // Theta_ij, row z populated
  TensorField dislocation;   // Lambda_ij, row z populated
  TensorField contortion;    // kappa_ij
  Point2 reference;
};

KinematicState make_state(const DefectScene& scene, const Grid2D& g);

// [m][k] = eps_kpq d_p E_qm
TensorField frank_tensor(const TensorField& e);
// [l][k] = E_kl + eps_kpq (x_p - x0_p) F[l][q]
TensorField burgers_tensor(const TensorField& e, Point2 x0);
TensorField incompatibility(const TensorField& e);

// kappa_ij = delta_iz alpha_j - alpha_z delta_ij / 2 with
// alpha = (L_zx - Th_zz (y - y0), L_zy + Th_zz (x - x0), L_zz).
TensorField contortion_from_densities(const TensorField& dislocation, const TensorField& disclination, Point2 x0);

// [j][k] = F[j][k] - kappa[k][j]
TensorField completed_frank(const TensorField& e, const TensorField& kappa);
// [j][k] = E_kj + eps_kpq (x_p - x0_p) W[j][q], W = completed_frank
TensorField completed_burgers(const TensorField& e, const TensorField& kappa, Point2 x0);

// Row curl of a Burgers-type tensor U_jk = ... + eps_kpq (x_p - x0_p) W_jq.
// The moment term depends on z through x_z, which adds eps_izj eps_kzq W_jq.
TensorField burgers_curl(const TensorField& u, const TensorField& w);

struct Densities {
  TensorField disclination;
  TensorField dislocation;
};
Densities densities_from_completed(const TensorField& completed_rot, const TensorField& completed_disp);

// r_k = eta_zk - Theta_zk - eps_ab d_a kappa_kb
TensorField kroener_residual(const TensorField& e, const TensorField& disclination, const TensorField& kappa);

Vec3 frank_vector(const TensorField& disclination, const SurfaceRegion& s);
Vec3 burgers_vector(const TensorField& dislocation, const SurfaceRegion& s);

struct BravaisOptions {
  // Path independence is assumed when max|Theta| * bbox area < tol * max(|omega0|, 1).
  double theta_tolerance = 1e-8;
};

struct BravaisRotation {
  Vec3 omega{0.0, 0.0, 0.0};
  double theta_measure = 0.0;
  std::vector<std::string> warnings;
};

struct BravaisDistortion {
  SmallTensor beta{2};
  Vec3 omega{0.0, 0.0, 0.0};
  std::vector<std::string> warnings;
};

// omega at the end of `path` (which starts at the reference point).
BravaisRotation bravais_rotation(const TensorField& e, const TensorField& kappa, const Polyline& path,
                                 const Vec3& omega0 = {0.0, 0.0, 0.0}, const BravaisOptions& opt = {});
// beta_kl = E_kl - eps_klj omega_j at the end of `path`.
BravaisDistortion bravais_distortion(const TensorField& e, const TensorField& kappa, const Vec3& omega0,
                                     const Polyline& path, const BravaisOptions& opt = {});

// Rotation on every node, integrated along grid lines from the node nearest x0
// (first along the row of x0, then along columns). Trapezoid rule.
TensorField bravais_rotation_field(const TensorField& e, const TensorField& kappa, Point2 x0,
                                   const Vec3& omega0 = {0.0, 0.0, 0.0});
TensorField bravais_distortion_field(const TensorField& e, const TensorField& rotation);

}  // namespace defectgeom
