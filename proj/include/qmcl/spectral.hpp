#pragma once

// Low-rank kernel factorization and eigenfunction bases over product samples.

#include "qmcl/swe_fv.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace qmcl {

class NumericalBreakdown : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PivotRule { Greedy, Randomized };

/// K ~= F F^T from `rank` pivots. The factor may have fewer columns than
/// requested when the residual diagonal is exhausted (numerical rank reached).
struct LowRankFactor {
  Mat factor;
  std::vector<int> pivots;
  double trace_residual = 0.0;
  std::vector<double> residual_history;  // trace residual after each pivot
};

/// Column oracle: returns column p of the kernel matrix.
using KernelColumnFn = std::function<Vec(int)>;

/// Partial Cholesky factorization with pivots chosen greedily (largest
/// residual diagonal) or at random with probability proportional to the
/// residual diagonal (seeded).
LowRankFactor pivoted_cholesky(const KernelColumnFn& column, const Vec& diagonal, int rank,
                               PivotRule rule = PivotRule::Greedy, std::uint64_t seed = 0);

/// Contiguous sample range of one trajectory and the basis columns supported on it.
struct BasisBlock {
  int sample_begin = 0;
  int sample_count = 0;
  int col_begin = 0;
  int col_count = 0;
  int num_times = 0;
  int num_cells = 0;
};

/// Eigenfunctions sampled on product points; columns orthonormal under
/// <f, g> = sum_s weights_s f_s g_s.
struct SpectralBasis {
  Mat phi;
  Vec eigvals;
  Vec weights;
  std::vector<BasisBlock> blocks;

  int num_samples() const { return static_cast<int>(phi.rows()); }
  int size() const { return static_cast<int>(phi.cols()); }
};

/// Leading eigenfunctions of the integral operator
///   (K f)_i = sum_s weights_s k(i, s) f_s,   k = G G^T,
/// obtained from the r x r problem G^T diag(weights) G. Eigenvalues are
/// nonincreasing, eigenvectors carry a positive first nonzero entry, and
/// directions with eigenvalue below 1e-12 are dropped with a warning.
/// Samples are laid out time-major with `num_cells` cells per time.
SpectralBasis eigenbasis(const Mat& kernel_factor, int num_eigenfunctions, const Vec& weights,
                         int num_cells = 1);

/// Direct sum of single-trajectory bases. Each input keeps its first
/// per_traj_size[i] columns (all when the list is empty). Combined weights are
/// the input weights divided by the number of trajectories and columns are
/// rescaled so the result is orthonormal under them.
SpectralBasis assemble_multi_trajectory(std::span<const SpectralBasis> bases,
                                        std::span<const int> per_traj_size = {});

/// Orthonormality defect max |Phi^T W Phi - I|.
double orthonormality_error(const SpectralBasis& basis);

}  // namespace qmcl
