#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "defectgeom/geometry.hpp"

namespace defectgeom {

struct PointDefectMetricOptions {
  double excess_guard = 0.5;
};

// g' = (1 + C_I - C_V)^2 g_B, inverse = g_B inverse / (1 + C_I - C_V)^2.
Metric point_defect_metric(const TensorField& vacancies, const TensorField& interstitials, const Metric& bravais,
                           const PointDefectMetricOptions& opt = {});

struct HatSolveOptions {
  double tolerance = 1e-10;
  int max_iterations = 50;
  double damping = 1.0;
  double fallback_damping = 0.5;
};

struct HatSolution {
  TensorField hat;            // Gamma-hat [k][i][j]
  TensorField nonmetricity;   // Q [j][i][k]
  TensorField delta_gamma;    // dGamma [k][i][j]
  TensorField primed;         // Gamma' of g'
  int iterations = 0;
  double residual = 0.0;      // max |Q - nabla-hat g'|
  double damping = 1.0;
  std::vector<double> history;  // max |Q_{n+1} - Q_n| per iteration
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : std::runtime_error(what), residual_(last_residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// dGamma_{k;ij} = Q_{j;ik} + Q_{i;jk} - Q_{k;ji}
TensorField nonmetric_contortion(const TensorField& q);

// nabla_j g_ik = d_j g_ik - G^l_ij g_lk - G^l_kj g_li, G = exact inverse of g times gamma. Stored [j][i][k].
TensorField covariant_metric_derivative(const TensorField& gamma, const TensorField& g);

// Fixed point Gamma-hat = Gamma' - DGamma - dGamma(Q) / 2 with Q = nabla-hat g'.
// The iteration starts from the nonmetricity of g' under the lattice transport,
// Q_{j;ik} = d_j(s^2) g_B,ik with s^2 = g'/g_B. Throws ConvergenceError.
HatSolution hat_connection_solve(const Metric& primed_metric, const Metric& bravais, const TensorField& contortion,
                                 const HatSolveOptions& opt = {});

TensorField teleparallel_residual(const Curvature& delta_r, const Curvature& primed_r, const Curvature& contortion_r);

struct TotalCurvature {
  Curvature hat;
  Curvature from_nonmetricity;  // curvature of -dGamma / 2
  Curvature primed;             // curvature of Gamma'
  Curvature from_contortion;    // curvature of -DGamma
  TensorField mismatch;         // hat - (sum of the three)
};

TotalCurvature total_curvature(const HatSolution& s, const TensorField& contortion, const Metric& primed_metric);

// R_(l;k)mq - nabla_[m Q_q];lk - 2 T^p_mq Q_{p;lk} - C_lkmq, where the symmetrizer and
// commutator carry no 1/2, T is the torsion of Gamma-hat and C collects the
// Gamma-hat.Q products of the lk slots. Stored [l][k][m][q].
TensorField curvature_identity_residual(const Curvature& hat_r, const TensorField& q, const TensorField& hat_gamma,
                                        const Metric& primed_metric);

}  // namespace defectgeom
