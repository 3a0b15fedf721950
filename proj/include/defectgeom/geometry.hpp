#pragma once

#include <memory>
#include <string>
#include <vector>

#include "defectgeom/grid.hpp"

namespace defectgeom {

struct Metric {
  TensorField g;
  TensorField inverse;  // small-strain inverse
  std::vector<std::string> warnings;
};

struct MetricOptions {
  double strain_guard = 0.1;
};

// g = delta - 2E, inverse = delta + 2E. Throws std::domain_error if g is not
// positive definite at some node.
Metric bravais_metric(const TensorField& e, const MetricOptions& opt = {});

// Checks symmetry and leading minors of g; throws std::domain_error on failure.
void check_positive_definite(const TensorField& g, const char* what);

// Exact 3x3 inverse of a symmetric positive definite tensor.
SmallTensor inverse3(const SmallTensor& g);

// Gamma_{k;ij} stored as [k][i][j].
struct Connection {
  TensorField gamma;
  bool symmetric = false;
  std::shared_ptr<const Metric> metric;  // metric the connection is paired with, may be null
};

// Gamma_{k;ij} = (d_i g_kj + d_j g_ki - d_k g_ij) / 2 for any symmetric rank-2 field.
TensorField christoffel_first_kind(const TensorField& g);
Connection christoffel_bravais(const std::shared_ptr<const Metric>& m);

// T_{k;ij} = -eps_ijp Lambda_pk / 2
TensorField dislocation_torsion(const TensorField& dislocation);
// DGamma_{k;ij} = T_{j;ik} + T_{i;jk} - T_{k;ji}
TensorField connection_contortion(const TensorField& torsion);
// Explicit 2D form of the connection contortion in terms of kappa.
TensorField contortion_closed_form(const TensorField& kappa);
SmallTensor contortion_closed_form(const SmallTensor& kappa);

// Gamma = Gamma_B - DGamma
Connection full_connection(const Connection& bravais, const TensorField& contortion);

// (Gamma_{k;ji} - Gamma_{k;ij}) / 2; returns T for Gamma = Gamma_B - DGamma(T).
TensorField torsion_of(const TensorField& gamma);

// nabla_k g_ij = d_k g_ij - G^l_ik g_lj - G^l_jk g_li with G^l_ik = ginv_lm Gamma_{m;ik}.
// Stored as [k][i][j].
TensorField metric_compatibility_residual(const TensorField& gamma, const Metric& m);

struct Curvature {
  TensorField riemann;   // [l][k][m][q]
  TensorField ricci;     // R_kq = R_{p;kpq}
  TensorField gauss;     // R_pp / 2
  TensorField einstein;  // -eps_lki eps_mqj R_{l;kmq} / 4
};

// R_{l;kmq} = d_q G_{l;km} - d_m G_{l;kq} + ginv_np (G_{n;km} G_{p;lq} - G_{n;kq} G_{p;lm})
Curvature riemann_curvature(const TensorField& gamma, const Metric& m);
inline Curvature riemann_curvature(const Connection& c, const Metric& m) { return riemann_curvature(c.gamma, m); }
Curvature contract_curvature(TensorField riemann);

// -Laplacian(tr E^s) - R
TensorField gauss_trace_check(const TensorField& solenoidal_trace, const TensorField& gauss);

}  // namespace defectgeom
