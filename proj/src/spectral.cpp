#include "qmcl/spectral.hpp"

#include "qmcl/log.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace qmcl {

namespace {

constexpr double kNegativeResidualTol = -1e-12;
constexpr double kExhaustedTol = 1e-13;
constexpr double kMinEigenvalue = 1e-12;

int choose_pivot(const Vec& residual, PivotRule rule, std::mt19937_64& rng) {
  if (rule == PivotRule::Greedy) {
    Eigen::Index p = 0;
    residual.maxCoeff(&p);
    return static_cast<int>(p);
  }
  const double total = residual.sum();
  std::uniform_real_distribution<double> uniform(0.0, total);
  const double target = uniform(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (Eigen::Index i = 0; i < residual.size(); ++i) {
    if (residual[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += residual[i];
    if (acc >= target) return static_cast<int>(i);
  }
  return last_positive;
}

void fix_sign(Eigen::Ref<Vec> column) {
  const double scale = column.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < column.size(); ++i) {
    if (std::abs(column[i]) > 1e-10 * scale) {
      if (column[i] < 0.0) column = -column;
      return;
    }
  }
}

}  // namespace

LowRankFactor pivoted_cholesky(const KernelColumnFn& column, const Vec& diagonal, int rank,
                               PivotRule rule, std::uint64_t seed) {
  const auto n = diagonal.size();
  if (rank < 1) throw DomainError("pivoted_cholesky: rank must be >= 1");
  if (n == 0 || diagonal.minCoeff() <= 0.0) {
    throw DomainError("pivoted_cholesky: diagonal entries must be positive");
  }
  const int target = static_cast<int>(std::min<Eigen::Index>(rank, n));
  const double scale = diagonal.maxCoeff();

  LowRankFactor out;
  out.factor.resize(n, target);
  Vec residual = diagonal;
  std::mt19937_64 rng(seed);
  int k = 0;
  for (; k < target; ++k) {
    if (residual.maxCoeff() <= kExhaustedTol * scale) break;
    const int p = choose_pivot(residual, rule, rng);
    Vec g = column(p);
    if (g.size() != n) throw DomainError("pivoted_cholesky: kernel column has wrong length");
    if (k > 0) g.noalias() -= out.factor.leftCols(k) * out.factor.row(p).head(k).transpose();
    const double pivot = g[p];
    if (!(pivot > 0.0)) {
      std::ostringstream os;
      os << "pivoted_cholesky: nonpositive pivot " << pivot << " at step " << k;
      throw NumericalBreakdown(os.str());
    }
    out.factor.col(k) = g / std::sqrt(pivot);
    residual -= out.factor.col(k).cwiseAbs2();
    if (residual.minCoeff() < kNegativeResidualTol) {
      std::ostringstream os;
      os << "pivoted_cholesky: residual diagonal " << residual.minCoeff() << " at step " << k;
      throw NumericalBreakdown(os.str());
    }
    residual = residual.cwiseMax(0.0);
    residual[p] = 0.0;
    out.pivots.push_back(p);
    out.residual_history.push_back(residual.sum());
  }
  out.factor.conservativeResize(n, k);
  out.trace_residual = residual.sum();
  return out;
}

SpectralBasis eigenbasis(const Mat& kernel_factor, int num_eigenfunctions, const Vec& weights,
                         int num_cells) {
  const auto n = kernel_factor.rows();
  const auto r = kernel_factor.cols();
  if (weights.size() != n) throw DomainError("eigenbasis: weights length mismatch");
  if (num_eigenfunctions < 1 || num_eigenfunctions > r) {
    throw DomainError("eigenbasis: number of eigenfunctions must lie in [1, rank]");
  }
  if (num_cells < 1 || n % num_cells != 0) {
    throw DomainError("eigenbasis: sample count not divisible by cell count");
  }
  if (weights.minCoeff() <= 0.0) throw DomainError("eigenbasis: weights must be positive");

  const Mat weighted = weights.asDiagonal() * kernel_factor;
  Mat reduced = kernel_factor.transpose() * weighted;
  reduced = 0.5 * (reduced + reduced.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> solver(reduced);
  if (solver.info() != Eigen::Success) throw NumericalBreakdown("eigenbasis: eigensolver failed");

  // Eigen returns ascending order.
  const Vec& values = solver.eigenvalues();
  int kept = 0;
  while (kept < num_eigenfunctions && values[r - 1 - kept] > kMinEigenvalue) ++kept;
  if (kept == 0) throw NumericalBreakdown("eigenbasis: kernel operator is numerically zero");
  if (kept < num_eigenfunctions) {
    std::ostringstream os;
    os << "eigenbasis: requested " << num_eigenfunctions << " eigenfunctions but numerical rank is "
       << kept << "; truncating";
    warn(os.str());
  }

  SpectralBasis out;
  out.eigvals.resize(kept);
  Mat coeffs(r, kept);
  for (int l = 0; l < kept; ++l) {
    out.eigvals[l] = values[r - 1 - l];
    coeffs.col(l) = solver.eigenvectors().col(r - 1 - l) / std::sqrt(out.eigvals[l]);
  }
  out.phi = kernel_factor * coeffs;

  // Weighted Cholesky re-orthonormalization: removes the 1/lambda
  // amplification of eigensolver roundoff in the lifted vectors while leaving
  // leading columns untouched to first order.
  Mat gram = out.phi.transpose() * (weights.asDiagonal() * out.phi);
  gram = 0.5 * (gram + gram.transpose()).eval();
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() == Eigen::Success) {
    out.phi = llt.matrixL().solve(out.phi.transpose()).transpose();
  }
  for (int l = 0; l < kept; ++l) fix_sign(out.phi.col(l));

  out.weights = weights;
  const int samples = static_cast<int>(n);
  out.blocks.push_back(BasisBlock{0, samples, 0, kept, samples / num_cells, num_cells});
  return out;
}

SpectralBasis assemble_multi_trajectory(std::span<const SpectralBasis> bases,
                                        std::span<const int> per_traj_size) {
  if (bases.empty()) throw DomainError("assemble_multi_trajectory: no bases");
  if (!per_traj_size.empty() && per_traj_size.size() != bases.size()) {
    throw DomainError("assemble_multi_trajectory: per-trajectory size list has wrong length");
  }
  const auto count = static_cast<int>(bases.size());
  int total_samples = 0;
  int total_cols = 0;
  std::vector<int> cols(bases.size());
  for (int i = 0; i < count; ++i) {
    const auto& b = bases[static_cast<std::size_t>(i)];
    if (b.blocks.size() != 1 || b.blocks[0].sample_count != b.num_samples()) {
      throw DomainError("assemble_multi_trajectory: inputs must be single-block bases");
    }
    cols[static_cast<std::size_t>(i)] =
        per_traj_size.empty() ? b.size() : per_traj_size[static_cast<std::size_t>(i)];
    if (cols[static_cast<std::size_t>(i)] < 1 || cols[static_cast<std::size_t>(i)] > b.size()) {
      throw DomainError("assemble_multi_trajectory: per-trajectory size out of range");
    }
    total_samples += b.num_samples();
    total_cols += cols[static_cast<std::size_t>(i)];
  }

  SpectralBasis out;
  out.phi = Mat::Zero(total_samples, total_cols);
  out.eigvals.resize(total_cols);
  out.weights.resize(total_samples);
  const double rescale = std::sqrt(static_cast<double>(count));
  int row = 0;
  int col = 0;
  for (int i = 0; i < count; ++i) {
    const auto& b = bases[static_cast<std::size_t>(i)];
    const int c = cols[static_cast<std::size_t>(i)];
    out.phi.block(row, col, b.num_samples(), c) = rescale * b.phi.leftCols(c);
    out.eigvals.segment(col, c) = b.eigvals.head(c);
    out.weights.segment(row, b.num_samples()) = b.weights / count;
    out.blocks.push_back(
        BasisBlock{row, b.num_samples(), col, c, b.blocks[0].num_times, b.blocks[0].num_cells});
    row += b.num_samples();
    col += c;
  }
  return out;
}

double orthonormality_error(const SpectralBasis& basis) {
  const Mat gram = basis.phi.transpose() * (basis.weights.asDiagonal() * basis.phi);
  return (gram - Mat::Identity(basis.size(), basis.size())).cwiseAbs().maxCoeff();
}

}  // namespace qmcl
