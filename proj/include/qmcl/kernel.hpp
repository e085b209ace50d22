#pragma once

// Feature maps over product samples (time index n, coarse cell m) and the
// Gaussian kernels built on them.
//
// Sample ordering inside one trajectory is time-major: sample s = n * M + m.
// Feature matrices store one sample per column.

#include "qmcl/swe_fv.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace qmcl {

struct ProductSampleIndex {
  int traj = 0;
  int n = 0;
  int m = 0;
};

/// Delay-embedded samples of one trajectory. Column s = n * num_cells + m holds
/// (h_t(m), q_t(m), h_{t-1}(m), q_{t-1}(m), ..., h_{t-Q+1}(m), q_{t-Q+1}(m))
/// with t = n + Q - 1 the source trajectory time.
struct DelayEmbedding {
  Mat vectors;
  int traj = 0;
  int delays = 1;
  int num_times = 0;
  int num_cells = 0;

  int num_samples() const { return num_times * num_cells; }
  ProductSampleIndex index(int s) const { return {traj, s / num_cells, s % num_cells}; }
  /// Trajectory time index paired with embedded time n.
  int source_time(int n) const { return n + delays - 1; }
};

DelayEmbedding delay_embed(std::span<const SweState> trajectory, int delays, int traj_id);

/// Column m holds the (h, q) pairs of cells m-(J-1)/2 .. m+(J-1)/2 (periodic),
/// left to right. Result is 2J x M.
Mat stencil_embed(const SweState& state, int stencil_width);

/// exp(-|a-b|^2 / (eps * delays))
double gaussian_kernel(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b,
                       double eps, int delays);

/// exp(-|a-b|^2 / (eps * J * scale_a * scale_b))
double conditioning_kernel(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b,
                           double eps, int stencil_width, double scale_a = 1.0,
                           double scale_b = 1.0);

/// Squared distances from x to every column of `points`.
Vec squared_distances_to(const Mat& points, const Eigen::Ref<const Vec>& x);

/// Column p of the Gaussian kernel matrix exp(-d^2 / (eps * denominator)).
Vec gaussian_kernel_column(const Mat& points, int p, double eps, double denominator);

/// Pairs of sample columns with their squared distances.
struct PairSample {
  std::vector<Eigen::Index> first;
  std::vector<Eigen::Index> second;
  std::vector<double> squared_distances;
};

/// All pairs i <= j when there are at most `max_pairs` of them, otherwise
/// `max_pairs` ordered pairs drawn uniformly with the given seed.
PairSample sample_pairs(const Mat& points, std::size_t max_pairs, std::uint64_t seed);

std::vector<double> sample_squared_distances(const Mat& points, std::size_t max_pairs,
                                             std::uint64_t seed);

struct BandwidthTuning {
  double epsilon = 0.0;
  std::vector<double> grid;    // candidate epsilons
  std::vector<double> slopes;  // d log T / d log eps at each grid point
};

/// Steepest-growth bandwidth: sweeps eps over 48 log-spaced points spanning
/// [1e-6, 1e6] x median(nonzero d^2), evaluates T(eps) = sum exp(-d^2/(eps D))
/// and returns the grid point maximizing the centered-difference slope of
/// log T against log eps. Throws DomainError if no distance is positive.
BandwidthTuning tune_bandwidth(std::span<const double> squared_distances, double denominator);

/// Per-sample scales b_i = (p_i / geomean(p))^exponent from the Gaussian pilot
/// density p_i = mean_j exp(-|w_i - w_j|^2 / (eps_pilot J)).
struct VariableBandwidth {
  double pilot_epsilon = 0.0;
  double exponent = -0.5;
  double density_geomean = 1.0;
  Vec scales;

  /// Scale for an out-of-sample point, using the same pilot density estimate.
  double query_scale(const Mat& training_points, const Eigen::Ref<const Vec>& x,
                     int stencil_width) const;
};

VariableBandwidth variable_scales(const Mat& points, double eps_pilot, int stencil_width,
                                  double exponent = -0.5);

class BistochasticError : public std::runtime_error {
 public:
  BistochasticError(int iterations, double residual, const std::string& what);
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

struct BistochasticFactor {
  Mat factor;  // G = diag(v) F
  Vec scaling;  // v
  int iterations = 0;
  double residual = 0.0;  // max |row sum - 1|
};

/// Symmetric Sinkhorn scaling of K = F F^T: finds v > 0 with
/// v .* (K v) = 1 by the damped update v <- v .* sqrt(1 ./ (v .* K v)).
/// K itself is never formed.
BistochasticFactor bistochastic_normalize(const Mat& factor, double tol = 1e-10,
                                          int max_iterations = 500);

}  // namespace qmcl
