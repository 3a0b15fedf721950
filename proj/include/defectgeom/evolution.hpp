#pragma once

#include <functional>
#include <optional>

#include "defectgeom/grid.hpp"

namespace defectgeom {

enum class Boundary { zero_flux, dirichlet };

struct SpeciesParams {
  SmallTensor diffusivity{2};
  SmallTensor thermodiffusivity{2};
  Boundary boundary = Boundary::zero_flux;
};

// Nodewise P~(kappa, C_V, C_I, grad T_temp).
using ContortionSource = std::function<SmallTensor(const SmallTensor&, double, double, const Vec3&)>;

struct EvolutionConfig {
  double dt = 0.0;
  double t_end = 0.0;
  std::optional<TensorField> velocity;     // rank 1, default zero
  std::optional<TensorField> temperature;  // T_temp, rank 0
  SpeciesParams vacancy;
  SpeciesParams interstitial;
  double recombination = 0.0;
  // D[i][j][k][l] maps kappa_kl onto the flux of kappa_ij.
  SmallTensor kappa_diffusivity{4};
  SmallTensor kappa_thermodiffusivity{4};
  Boundary kappa_boundary = Boundary::zero_flux;
  ContortionSource kappa_source;
  double diffusive_cfl = 0.2;
  double advective_cfl = 0.5;
};

struct PointDefectStep {
  TensorField vacancies;
  TensorField interstitials;
  double clipped_vacancies = 0.0;     // mass added by clipping at 0
  double clipped_interstitials = 0.0;
  double recombined = 0.0;            // dt * int P dS, per species
};

// Largest eigenvalue of the symmetric part of an n x n matrix.
double max_symmetric_eigenvalue(const double* a, int n);

// Throws std::invalid_argument when dt violates the diffusive or advective bound.
void check_point_defect_cfl(const Grid2D& g, const EvolutionConfig& cfg);
void check_contortion_cfl(const Grid2D& g, const EvolutionConfig& cfg);

// dC_K/dt + v.grad C_K = div(D_K grad C_K + D~_K C_K grad T) - k C_I C_V
PointDefectStep step_point_defects(const TensorField& vacancies, const TensorField& interstitials,
                                   const EvolutionConfig& cfg);

// dkappa/dt + v.grad kappa = div(D grad kappa + D~ kappa grad T) - P~
TensorField step_contortion(const TensorField& kappa, const EvolutionConfig& cfg,
                            const TensorField* vacancies = nullptr, const TensorField* interstitials = nullptr);

// Dual-cell weights: h^2 in the interior, halved per boundary direction.
double total_mass(const TensorField& c);
std::vector<double> cell_volumes(const Grid2D& g);

// (div kappa)_k - d_k tr kappa, (div kappa)_k = d_i kappa_ik
TensorField conservation_residual(const TensorField& kappa);

// Nodewise orthogonal projection onto kappa_zj = a_j, kappa_zz = a_z / 2,
// kappa_xx = kappa_yy = -a_z / 2, other components zero; the residual of
// such fields vanishes identically.
TensorField project_contortion(const TensorField& kappa);

}  // namespace defectgeom
