#include "qmcl/quantum.hpp"

#include "qmcl/log.hpp"

#include <cmath>
#include <sstream>

namespace qmcl {

namespace {

constexpr double kMinNorm = 1e-12;

// Power iteration on A^T A. The Rayleigh quotient converges quickly in value
// even when the top singular values cluster.
double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Vec x = Vec::Ones(a.cols()).normalized();
  double estimate = 0.0;
  for (int it = 0; it < 500; ++it) {
    Vec y = a.transpose() * (a * x);
    const double next = std::sqrt(x.dot(y));
    const double ny = y.norm();
    if (!(ny > 0.0)) return 0.0;
    x = y / ny;
    if (std::abs(next - estimate) <= 1e-14 * next) return next;
    estimate = next;
  }
  return estimate;
}

}  // namespace

DegenerateDensity::DegenerateDensity(int cell, const std::string& what)
    : std::runtime_error(what), cell_(cell) {}

Mat project_multiplication(const Vec& values, const SpectralBasis& basis) {
  if (values.size() != basis.num_samples()) {
    throw DomainError("project_multiplication: values length does not match basis samples");
  }
  if (!values.allFinite()) throw DomainError("project_multiplication: non-finite values");
  const Vec w = basis.weights.cwiseProduct(values);
  Mat out = basis.phi.transpose() * (w.asDiagonal() * basis.phi);
  return 0.5 * (out + out.transpose());
}

Observables build_observables(const Vec& flux_h, const Vec& flux_q, const SpectralBasis& basis) {
  if (flux_h.size() != basis.num_samples() || flux_q.size() != basis.num_samples()) {
    throw DomainError("build_observables: flux samples misaligned with basis samples");
  }
  return Observables{{project_multiplication(flux_h, basis), "h"},
                     {project_multiplication(flux_q, basis), "q"}};
}

TransferMatrix build_transfer(const SpectralBasis& basis) {
  if (basis.blocks.empty()) throw DomainError("build_transfer: basis has no block metadata");
  Mat shifted = Mat::Zero(basis.num_samples(), basis.size());
  for (const auto& b : basis.blocks) {
    if (b.num_cells < 1 || b.num_times * b.num_cells != b.sample_count) {
      throw DomainError("build_transfer: inconsistent block metadata");
    }
    const int moved = b.sample_count - b.num_cells;
    if (moved <= 0) continue;
    shifted.middleRows(b.sample_begin + b.num_cells, moved) =
        basis.phi.middleRows(b.sample_begin, moved);
  }
  TransferMatrix out;
  out.matrix = basis.phi.transpose() * (basis.weights.asDiagonal() * shifted);
  out.operator_norm = spectral_norm(out.matrix);
  if (out.operator_norm > 1.0 + 1e-6) {
    std::ostringstream os;
    os << "build_transfer: operator norm " << out.operator_norm << " exceeds 1";
    warn(os.str());
  }
  return out;
}

DensityField init_density_uniform(const SpectralBasis& basis, int num_cells) {
  if (num_cells < 1) throw DomainError("init_density_uniform: need at least one cell");
  Vec coeffs = basis.phi.transpose() * basis.weights;
  const double norm = coeffs.norm();
  if (norm < 1e-8) {
    std::ostringstream os;
    os << "init_density_uniform: unit function nearly orthogonal to the basis (norm " << norm
       << ")";
    warn(os.str());
  }
  if (!(norm > 0.0)) throw DegenerateDensity(0, "init_density_uniform: zero projection");
  coeffs /= norm;
  return DensityField{coeffs.replicate(1, num_cells)};
}

DensityField evolve_density(const DensityField& field, const TransferMatrix& transfer) {
  if (transfer.matrix.cols() != field.dimension()) {
    throw DomainError("evolve_density: dimension mismatch");
  }
  DensityField out{transfer.matrix * field.rho};
  for (int m = 0; m < out.num_cells(); ++m) {
    const double norm = out.rho.col(m).norm();
    if (norm < kMinNorm) {
      std::ostringstream os;
      os << "evolve_density: degenerate density in cell " << m << " (norm " << norm << ")";
      throw DegenerateDensity(m, os.str());
    }
    out.rho.col(m) /= norm;
  }
  return out;
}

Vec feature_vector(const SweState& resolved, int cell, const ConditioningKernel& kernel) {
  if (cell < 0 || cell >= resolved.size()) throw DomainError("feature_vector: cell out of range");
  const Mat query = stencil_embed(resolved, kernel.stencil_width);
  if (query.rows() != kernel.stencils.rows()) {
    throw DomainError("feature_vector: stencil dimension mismatch");
  }
  const Vec x = query.col(cell);
  const Vec d2 = squared_distances_to(kernel.stencils, x);
  const double base = kernel.epsilon * kernel.stencil_width;
  if (!kernel.variable()) return (-d2 / base).array().exp().matrix();
  const double query_scale =
      kernel.bandwidth.query_scale(kernel.stencils, x, kernel.stencil_width);
  return (-d2.array() / (base * query_scale * kernel.bandwidth.scales.array())).exp().matrix();
}

Mat feature_vectors(const SweState& resolved, const ConditioningKernel& kernel) {
  Mat out(kernel.stencils.cols(), resolved.size());
  for (int m = 0; m < resolved.size(); ++m) out.col(m) = feature_vector(resolved, m, kernel);
  return out;
}

Mat effect_matrix(const Vec& feature, const SpectralBasis& basis) {
  if ((feature.array() < 0.0).any()) throw DomainError("effect_matrix: negative feature values");
  return project_multiplication(feature.cwiseSqrt(), basis);
}

DensityField condition_density(const DensityField& field, const Mat& features,
                               const SpectralBasis& basis, std::vector<int>* skipped) {
  if (features.rows() != basis.num_samples() || features.cols() != field.num_cells()) {
    throw DomainError("condition_density: feature matrix shape mismatch");
  }
  if ((features.array() < 0.0).any()) {
    throw DomainError("condition_density: feature values must be nonnegative");
  }
  Mat scale = features.cwiseSqrt();
  scale.array().colwise() *= basis.weights.array();
  Mat values = basis.phi * field.rho;
  values.array() *= scale.array();
  DensityField out{basis.phi.transpose() * values};
  for (int m = 0; m < out.num_cells(); ++m) {
    const double norm = out.rho.col(m).norm();
    if (norm < kMinNorm) {
      out.rho.col(m) = field.rho.col(m);
      if (skipped) skipped->push_back(m);
      std::ostringstream os;
      os << "condition_density: uninformative conditioning in cell " << m << " (norm " << norm
         << "), keeping prior";
      warn(os.str());
      continue;
    }
    out.rho.col(m) /= norm;
  }
  return out;
}

SubgridFluxField surrogate_flux(const DensityField& field, const Observables& observables) {
  const Mat ah = observables.h.matrix * field.rho;
  const Mat aq = observables.q.matrix * field.rho;
  SubgridFluxField out = SubgridFluxField::zero(field.num_cells());
  for (int m = 0; m < field.num_cells(); ++m) {
    out.g_h[m] = field.rho.col(m).dot(ah.col(m));
    out.g_q[m] = field.rho.col(m).dot(aq.col(m));
  }
  return out;
}

}  // namespace qmcl
