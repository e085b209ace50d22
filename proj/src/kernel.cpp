#include "qmcl/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace qmcl {

DelayEmbedding delay_embed(std::span<const SweState> trajectory, int delays, int traj_id) {
  if (delays < 1) throw DomainError("delay_embed: number of delays must be >= 1");
  const int length = static_cast<int>(trajectory.size());
  if (length < delays) throw DomainError("delay_embed: trajectory shorter than the delay window");
  const int cells = trajectory.front().size();
  for (const auto& s : trajectory) {
    if (s.size() != cells) throw DomainError("delay_embed: inconsistent state sizes");
  }

  DelayEmbedding out;
  out.traj = traj_id;
  out.delays = delays;
  out.num_times = length - delays + 1;
  out.num_cells = cells;
  out.vectors.resize(2 * delays, static_cast<Eigen::Index>(out.num_times) * cells);
  for (int n = 0; n < out.num_times; ++n) {
    const int t = out.source_time(n);
    for (int m = 0; m < cells; ++m) {
      auto col = out.vectors.col(static_cast<Eigen::Index>(n) * cells + m);
      for (int j = 0; j < delays; ++j) {
        col[2 * j] = trajectory[t - j].h[m];
        col[2 * j + 1] = trajectory[t - j].q[m];
      }
    }
  }
  return out;
}

Mat stencil_embed(const SweState& state, int stencil_width) {
  if (stencil_width < 1 || stencil_width % 2 == 0) {
    throw DomainError("stencil_embed: stencil width must be odd and positive");
  }
  const int cells = state.size();
  const int half = (stencil_width - 1) / 2;
  Mat out(2 * stencil_width, cells);
  for (int m = 0; m < cells; ++m) {
    for (int k = 0; k < stencil_width; ++k) {
      const int src = ((m - half + k) % cells + cells) % cells;
      out(2 * k, m) = state.h[src];
      out(2 * k + 1, m) = state.q[src];
    }
  }
  return out;
}

double gaussian_kernel(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b,
                       double eps, int delays) {
  if (a.size() != b.size()) throw DomainError("gaussian_kernel: length mismatch");
  if (!(eps > 0.0)) throw DomainError("gaussian_kernel: bandwidth must be positive");
  return std::exp(-(a - b).squaredNorm() / (eps * delays));
}

double conditioning_kernel(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b,
                           double eps, int stencil_width, double scale_a, double scale_b) {
  if (a.size() != b.size()) throw DomainError("conditioning_kernel: length mismatch");
  if (!(eps > 0.0) || !(scale_a > 0.0) || !(scale_b > 0.0)) {
    throw DomainError("conditioning_kernel: bandwidth and scales must be positive");
  }
  return std::exp(-(a - b).squaredNorm() / (eps * stencil_width * scale_a * scale_b));
}

Vec squared_distances_to(const Mat& points, const Eigen::Ref<const Vec>& x) {
  if (points.rows() != x.size()) throw DomainError("squared_distances_to: dimension mismatch");
  return (points.colwise() - x).colwise().squaredNorm().transpose();
}

Vec gaussian_kernel_column(const Mat& points, int p, double eps, double denominator) {
  const Vec d2 = squared_distances_to(points, points.col(p));
  return (-d2 / (eps * denominator)).array().exp().matrix();
}

PairSample sample_pairs(const Mat& points, std::size_t max_pairs, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(points.cols());
  if (n == 0) throw DomainError("sample_pairs: no points");
  PairSample out;
  auto add = [&](Eigen::Index i, Eigen::Index j) {
    out.first.push_back(i);
    out.second.push_back(j);
    out.squared_distances.push_back((points.col(i) - points.col(j)).squaredNorm());
  };
  const std::size_t all_pairs = n * (n + 1) / 2;
  if (all_pairs <= max_pairs) {
    out.first.reserve(all_pairs);
    out.second.reserve(all_pairs);
    out.squared_distances.reserve(all_pairs);
    for (Eigen::Index i = 0; i < points.cols(); ++i) {
      for (Eigen::Index j = i; j < points.cols(); ++j) add(i, j);
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, points.cols() - 1);
  out.first.reserve(max_pairs);
  out.second.reserve(max_pairs);
  out.squared_distances.reserve(max_pairs);
  for (std::size_t k = 0; k < max_pairs; ++k) {
    const Eigen::Index i = pick(rng);
    const Eigen::Index j = pick(rng);
    add(i, j);
  }
  return out;
}

std::vector<double> sample_squared_distances(const Mat& points, std::size_t max_pairs,
                                             std::uint64_t seed) {
  return sample_pairs(points, max_pairs, seed).squared_distances;
}

namespace {

double log_sum_exp(std::span<const double> exponents) {
  double top = -std::numeric_limits<double>::infinity();
  for (double e : exponents) top = std::max(top, e);
  double sum = 0.0;
  for (double e : exponents) sum += std::exp(e - top);
  return top + std::log(sum);
}

}  // namespace

BandwidthTuning tune_bandwidth(std::span<const double> squared_distances, double denominator) {
  if (squared_distances.empty()) throw DomainError("tune_bandwidth: empty distance sample");
  if (!(denominator > 0.0)) throw DomainError("tune_bandwidth: denominator must be positive");
  std::vector<double> positive;
  for (double d : squared_distances) {
    if (d > 0.0) positive.push_back(d);
  }
  if (positive.empty()) throw DomainError("tune_bandwidth: all distances are zero (degenerate data)");
  const auto mid = positive.begin() + static_cast<std::ptrdiff_t>(positive.size() / 2);
  std::nth_element(positive.begin(), mid, positive.end());
  const double median = *mid;

  constexpr int kGrid = 48;
  const double lo = std::log(1e-6 * median);
  const double hi = std::log(1e6 * median);
  BandwidthTuning out;
  std::vector<double> log_eps(kGrid), log_t(kGrid);
  std::vector<double> exponents(squared_distances.size());
  for (int k = 0; k < kGrid; ++k) {
    log_eps[k] = lo + (hi - lo) * k / (kGrid - 1);
    const double eps = std::exp(log_eps[k]);
    for (std::size_t i = 0; i < squared_distances.size(); ++i) {
      exponents[i] = -squared_distances[i] / (eps * denominator);
    }
    log_t[k] = log_sum_exp(exponents);
    out.grid.push_back(eps);
  }
  out.slopes.resize(kGrid);
  for (int k = 0; k < kGrid; ++k) {
    const int a = std::max(k - 1, 0);
    const int b = std::min(k + 1, kGrid - 1);
    out.slopes[k] = (log_t[b] - log_t[a]) / (log_eps[b] - log_eps[a]);
  }
  const auto best = std::max_element(out.slopes.begin(), out.slopes.end());
  out.epsilon = out.grid[static_cast<std::size_t>(best - out.slopes.begin())];
  return out;
}

namespace {

double pilot_density(const Mat& points, const Eigen::Ref<const Vec>& x, double eps,
                     int stencil_width) {
  const Vec d2 = squared_distances_to(points, x);
  return (-d2 / (eps * stencil_width)).array().exp().mean();
}

}  // namespace

double VariableBandwidth::query_scale(const Mat& training_points, const Eigen::Ref<const Vec>& x,
                                      int stencil_width) const {
  const double p = pilot_density(training_points, x, pilot_epsilon, stencil_width);
  if (!(p > 0.0)) return std::pow(std::numeric_limits<double>::min() / density_geomean, exponent);
  return std::pow(p / density_geomean, exponent);
}

VariableBandwidth variable_scales(const Mat& points, double eps_pilot, int stencil_width,
                                  double exponent) {
  const auto n = points.cols();
  if (n == 0) throw DomainError("variable_scales: no points");
  if (!(eps_pilot > 0.0)) throw DomainError("variable_scales: pilot bandwidth must be positive");
  Vec density(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    density[i] = pilot_density(points, points.col(i), eps_pilot, stencil_width);
    if (!(density[i] > 0.0)) throw DomainError("variable_scales: zero pilot density");
  }
  VariableBandwidth out;
  out.pilot_epsilon = eps_pilot;
  out.exponent = exponent;
  out.density_geomean = std::exp(density.array().log().mean());
  out.scales = (density.array() / out.density_geomean).pow(exponent).matrix();
  return out;
}

BistochasticError::BistochasticError(int iterations, double residual, const std::string& what)
    : std::runtime_error(what), iterations_(iterations), residual_(residual) {}

BistochasticFactor bistochastic_normalize(const Mat& factor, double tol, int max_iterations) {
  const auto n = factor.rows();
  if (n == 0) throw DomainError("bistochastic_normalize: empty factor");
  Vec v = Vec::Ones(n);
  for (int it = 0;; ++it) {
    const Vec row_sums = v.cwiseProduct(factor * (factor.transpose() * v));
    if (row_sums.minCoeff() <= 0.0 || !row_sums.allFinite()) {
      std::ostringstream os;
      os << "bistochastic_normalize: nonpositive row sum at iteration " << it
         << " (low-rank factor too crude?)";
      throw BistochasticError(it, std::numeric_limits<double>::infinity(), os.str());
    }
    const double residual = (row_sums.array() - 1.0).abs().maxCoeff();
    if (residual < tol) {
      return BistochasticFactor{v.asDiagonal() * factor, v, it, residual};
    }
    if (it == max_iterations) {
      std::ostringstream os;
      os << "bistochastic_normalize: no convergence after " << it
         << " iterations, residual " << residual;
      throw BistochasticError(it, residual, os.str());
    }
    v = v.cwiseProduct(row_sums.cwiseInverse().cwiseSqrt());
  }
}

}  // namespace qmcl
