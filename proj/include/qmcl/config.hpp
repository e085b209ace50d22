#pragma once

#include "qmcl/coarsening.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace qmcl {

/// Every tunable of a run. Defaults reproduce the published 1920-cell setup;
/// `desk` and `toy` are scaled-down presets for laptops and smoke tests.
struct RunConfig {
  // Fine model.
  int fine_cells = 1920;
  int coarse_ratio = 20;
  double domain_min = -25.0;
  double domain_max = 25.0;
  double gravity = 9.81;
  double froude = 0.0;  // 0: derive from gravity as 1/sqrt(2g)
  double dt_factor = 0.1;  // dt = dt_factor * dx

  // Data generation.
  long spinup_steps = 12200;
  long sample_steps = 3260;
  int sample_stride = 0;  // 0: keep every coarse_ratio-th fine step
  std::vector<double> train_deltas{0.0, 0.5, 1.0};
  std::vector<double> test_deltas{0.25, 0.75};

  // Training.
  int delays = 64;
  int stencil_width = 5;
  int basis_size = 6144;
  std::vector<int> per_traj_basis;  // empty: equal split of basis_size
  int rank = 6144;  // pivoted Cholesky rank, split equally over trajectories
  std::string pivot_rule = "greedy";  // or "randomized"
  std::uint64_t seed = 0;
  std::size_t max_pairs = 4'000'000;
  double bandwidth_exponent = -0.5;
  bool observables_float32 = false;

  // Prediction.
  int conditioning_period = 10;
  int horizon = 120;

  static RunConfig preset(const std::string& name);

  /// Throws DomainError naming the first offending field.
  void validate() const;

  double froude_number() const { return froude > 0.0 ? froude : froude_from_gravity(gravity); }
  Grid1D fine_grid() const { return Grid1D::make(fine_cells, domain_min, domain_max); }
  double fine_dt() const { return dt_factor * fine_grid().dx(); }
  CoarsePair coarse_pair() const { return CoarsePair::make(fine_grid(), coarse_ratio, fine_dt()); }
  SweParams fine_params() const { return SweParams::make(froude_number(), fine_dt()); }
  int stride() const { return sample_stride > 0 ? sample_stride : coarse_ratio; }
  int coarse_cells() const { return fine_cells / coarse_ratio; }
  int num_trajectories() const { return static_cast<int>(train_deltas.size()); }
  std::vector<int> basis_split() const;
  std::vector<int> rank_split() const;

  nlohmann::json to_json() const;
  /// Overlays the keys present in `j` onto `base`; unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& j, RunConfig base);
  static RunConfig from_json(const nlohmann::json& j);
};

}  // namespace qmcl
