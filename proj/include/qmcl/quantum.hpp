#pragma once

// Operator representation of the closure: observables and effects are
// multiplication operators compressed onto a spectral basis, and the
// unresolved state of every coarse cell is a pure quantum state stored as a
// unit coefficient vector.

#include "qmcl/coarsening.hpp"
#include "qmcl/kernel.hpp"
#include "qmcl/spectral.hpp"

#include <string>
#include <vector>

namespace qmcl {

class DegenerateDensity : public std::runtime_error {
 public:
  DegenerateDensity(int cell, const std::string& what);
  int cell() const { return cell_; }

 private:
  int cell_;
};

struct QuantumObservable {
  Mat matrix;
  std::string label;
};

struct Observables {
  QuantumObservable h;
  QuantumObservable q;
};

/// One coefficient vector per coarse cell, stored as the columns of an L x M matrix.
struct DensityField {
  Mat rho;

  int num_cells() const { return static_cast<int>(rho.cols()); }
  int dimension() const { return static_cast<int>(rho.rows()); }
};

struct TransferMatrix {
  Mat matrix;
  double operator_norm = 0.0;
};

/// M_ik = sum_s weights_s phi_i(s) values_s phi_k(s), exactly symmetric.
Mat project_multiplication(const Vec& values, const SpectralBasis& basis);

/// `flux_h` and `flux_q` are indexed like the basis samples.
Observables build_observables(const Vec& flux_h, const Vec& flux_q, const SpectralBasis& basis);

/// Compression of the within-trajectory shift (P f)(n, m) = f(n-1, m), with
/// the first time of every trajectory mapped to zero. Warns if the operator
/// norm exceeds 1 + 1e-6.
TransferMatrix build_transfer(const SpectralBasis& basis);

/// Every cell starts in the state along the unit function.
DensityField init_density_uniform(const SpectralBasis& basis, int num_cells);

/// rho <- P rho / |P rho| per cell; throws DegenerateDensity when |P rho| < 1e-12.
DensityField evolve_density(const DensityField& field, const TransferMatrix& transfer);

/// Training stencils and variable-bandwidth data for the conditioning kernel.
struct ConditioningKernel {
  Mat stencils;  // 2J x NM, one column per basis sample
  int stencil_width = 5;
  double epsilon = 1.0;
  VariableBandwidth bandwidth;  // empty scales: fixed bandwidth

  bool variable() const { return bandwidth.scales.size() > 0; }
};

/// f_m(s) = k_c(W_J(state, m), stencil_s) for all training samples s.
Vec feature_vector(const SweState& resolved, int cell, const ConditioningKernel& kernel);

/// NM x M matrix whose column m is feature_vector(resolved, m, kernel).
Mat feature_vectors(const SweState& resolved, const ConditioningKernel& kernel);

/// Matrix of the effect built from sqrt(feature).
Mat effect_matrix(const Vec& feature, const SpectralBasis& basis);

/// rho_m <- e_m rho_m / |e_m rho_m| with e_m the effect of sqrt(features.col(m)).
/// The effect is applied matrix-free, Phi^T W (sqrt(f) .* (Phi rho)). Cells
/// where |e_m rho_m| < 1e-12 keep their prior; their indices are appended to
/// `skipped` when given and a warning is issued.
DensityField condition_density(const DensityField& field, const Mat& features,
                               const SpectralBasis& basis, std::vector<int>* skipped = nullptr);

/// rho_m^T A rho_m for both observables.
SubgridFluxField surrogate_flux(const DensityField& field, const Observables& observables);

}  // namespace qmcl
