#pragma once

// Offline (data generation, training) and online (prediction) stages, their
// on-disk formats, and report export.
//
// Run directory layout:
//   <run>/config.json
//   <run>/data/      resolved states and subgrid fluxes per training trajectory
//   <run>/model/     basis, transfer, observables, conditioning data
//   <run>/report/<tag>/  prediction arrays; tables/ holds exported CSV

#include "qmcl/array_io.hpp"
#include "qmcl/config.hpp"
#include "qmcl/quantum.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmcl {

/// A pipeline failure tagged with the stage that raised it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& detail);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct TrajectoryData {
  double delta = 0.0;
  std::vector<SweState> resolved;
  std::vector<SubgridFluxField> fluxes;
};

struct TrainingSet {
  std::vector<TrajectoryData> trajectories;

  int num_cells() const;
};

/// Fine state after the spin-up phase for one member of the initial condition family.
SweState spun_up_fine_state(const RunConfig& config, double delta);

/// For each training delta: spin up, run the sampling window, keep every
/// stride-th fine step, and store coarsened states with the exact subgrid
/// fluxes at the same instants.
TrainingSet generate_training_data(const RunConfig& config);

void save_training_set(const TrainingSet& data, const RunConfig& config, const fs::path& dir);
TrainingSet load_training_set(const fs::path& dir);

struct TrajectoryDiagnostics {
  int samples = 0;
  int rank = 0;
  double cholesky_trace_residual = 0.0;
  int sinkhorn_iterations = 0;
  double sinkhorn_residual = 0.0;
  int basis_size = 0;
};

struct ModelBundle {
  RunConfig config;
  SpectralBasis basis;
  TransferMatrix transfer;
  Observables observables;
  ConditioningKernel conditioning;
  double basis_epsilon = 0.0;
  std::vector<double> train_deltas;
  std::vector<TrajectoryDiagnostics> diagnostics;
};

/// Offline stage: bandwidth tuning, per-trajectory pivoted Cholesky,
/// bistochastic scaling and eigenbasis, block assembly, transfer operator,
/// observables, and conditioning-kernel calibration.
ModelBundle train(const RunConfig& config, const TrainingSet& data);

void save_model(const ModelBundle& model, const fs::path& dir);
ModelBundle load_model(const fs::path& dir);

struct PredictOptions {
  int horizon = 0;
  int conditioning_period = 10;
  /// When set, the fine model is integrated from this state alongside the
  /// surrogate and supplies the truth and the exact subgrid fluxes.
  std::optional<SweState> fine_initial;
};

struct FieldSeries {
  std::vector<SweState> states;  // horizon + 1 entries
  std::vector<SubgridFluxField> fluxes;  // flux in effect after each state
};

struct PredictionReport {
  double delta = -1.0;  // negative when the initial state is not a family member
  int conditioning_period = 0;
  Vec cell_centers;
  FieldSeries qmcl;
  FieldSeries zero_closure;
  std::optional<FieldSeries> truth;
  /// Per-step RMSE against truth; empty when no truth was integrated.
  std::vector<double> rmse_qmcl_h, rmse_qmcl_q, rmse_zero_h, rmse_zero_q;
  int skipped_conditionings = 0;
  int density_resets = 0;
  double seconds_conditioning = 0.0;
  double seconds_total = 0.0;

  int horizon() const { return static_cast<int>(qmcl.states.size()) - 1; }
};

/// Online stage. Densities start along the unit function, are conditioned on
/// the initial state, then each step: surrogate fluxes drive one coarse step
/// (fluxes held fixed over both stages), densities advance by the transfer
/// matrix, and every conditioning_period-th step they are conditioned on the
/// new resolved state. The zero-closure baseline runs the same coarse
/// integrator with G = 0.
PredictionReport predict(const ModelBundle& model, const SweState& initial_resolved,
                         const PredictOptions& options);

/// Root mean square over steps 1..horizon of a per-step RMSE series.
double aggregate_rmse(const std::vector<double>& per_step);

/// Aggregate RMSE divided by the standard deviation of the truth field over
/// space-time (steps 1..horizon).
struct NormalizedErrors {
  double qmcl_h = 0.0, qmcl_q = 0.0, zero_h = 0.0, zero_q = 0.0;
};
NormalizedErrors normalized_errors(const PredictionReport& report);

void save_report(const PredictionReport& report, const fs::path& dir);
PredictionReport load_report(const fs::path& dir);

/// Delimited-text tables: one (horizon+1) x M grid per field and model,
/// final-snapshot profiles, RMSE series and summary, and a manifest.
void export_report(const PredictionReport& report, const fs::path& dir, char delimiter = ',');

}  // namespace qmcl
