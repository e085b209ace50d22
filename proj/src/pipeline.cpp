#include "qmcl/pipeline.hpp"

#include "qmcl/log.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace qmcl {

StageError::StageError(std::string stage, const std::string& detail)
    : std::runtime_error("[" + stage + "] " + detail), stage_(std::move(stage)) {}

namespace {

template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

SweState advance_fine(SweState state, const RunConfig& config, long steps, long step_offset) {
  const Grid1D grid = config.fine_grid();
  const SweParams params = config.fine_params();
  const RhsFn rhs = [&](const SweState& s) { return fine_rhs(s, grid, params); };
  for (long k = 1; k <= steps; ++k) {
    state = step_modified_euler(state, params.dt, rhs, step_offset + k);
  }
  return state;
}

Mat states_to_rows(const std::vector<SweState>& states) {
  if (states.empty()) return Mat(0, 0);
  const int m = states.front().size();
  Mat out(static_cast<Eigen::Index>(states.size()), 2 * m);
  for (std::size_t t = 0; t < states.size(); ++t) {
    out.row(static_cast<Eigen::Index>(t)) << states[t].h.transpose(), states[t].q.transpose();
  }
  return out;
}

std::vector<SweState> rows_to_states(const Mat& rows) {
  const auto m = rows.cols() / 2;
  std::vector<SweState> out;
  for (Eigen::Index t = 0; t < rows.rows(); ++t) {
    out.emplace_back(rows.row(t).head(m).transpose(), rows.row(t).tail(m).transpose());
  }
  return out;
}

std::vector<SweState> fluxes_as_states(const std::vector<SubgridFluxField>& fluxes) {
  std::vector<SweState> out;
  out.reserve(fluxes.size());
  for (const auto& g : fluxes) out.emplace_back(g.g_h, g.g_q);
  return out;
}

std::vector<SubgridFluxField> states_as_fluxes(const std::vector<SweState>& states) {
  std::vector<SubgridFluxField> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back({s.h, s.q});
  return out;
}

}  // namespace

int TrainingSet::num_cells() const {
  if (trajectories.empty() || trajectories.front().resolved.empty()) return 0;
  return trajectories.front().resolved.front().size();
}

SweState spun_up_fine_state(const RunConfig& config, double delta) {
  config.validate();
  const Grid1D grid = config.fine_grid();
  SweState state = ic_family(delta, grid, grid.length());
  const double cfl = cfl_number(state, grid, config.fine_params());
  if (cfl > 1.0) {
    std::ostringstream os;
    os << "initial CFL number " << cfl << " exceeds 1 for delta=" << delta;
    warn(os.str());
  }
  return advance_fine(std::move(state), config, config.spinup_steps, 0);
}

TrainingSet generate_training_data(const RunConfig& config) {
  config.validate();
  if (config.stride() != config.coarse_ratio) {
    warn("sample stride differs from the coarsening ratio; sampled dt != coarse dt");
  }
  const CoarsePair pair = config.coarse_pair();
  const double froude = config.froude_number();
  TrainingSet out;
  for (double delta : config.train_deltas) {
    std::ostringstream stage;
    stage << "generate delta=" << delta;
    out.trajectories.push_back(run_stage(stage.str(), [&] {
      TrajectoryData traj;
      traj.delta = delta;
      SweState fine = spun_up_fine_state(config, delta);
      for (long k = 0; k < config.sample_steps; k += config.stride()) {
        traj.resolved.push_back(coarsen_state(fine, pair));
        traj.fluxes.push_back(exact_subgrid_flux(fine, pair, froude));
        if (k + config.stride() < config.sample_steps) {
          fine = advance_fine(std::move(fine), config, config.stride(), config.spinup_steps + k);
        }
      }
      return traj;
    }));
  }
  return out;
}

void save_training_set(const TrainingSet& data, const RunConfig& config, const fs::path& dir) {
  nlohmann::json manifest;
  manifest["config"] = config.to_json();
  manifest["gravity"] = config.gravity;
  manifest["froude"] = config.froude_number();
  manifest["subgrid_flux_sampling"] = "coarse step start, same instant as the resolved sample";
  manifest["layout"] = "rows: sample times; columns: h over coarse cells then q over coarse cells";
  manifest["trajectories"] = nlohmann::json::array();
  for (std::size_t i = 0; i < data.trajectories.size(); ++i) {
    const auto& t = data.trajectories[i];
    const std::string tag = "traj" + std::to_string(i);
    manifest["trajectories"].push_back(
        {{"delta", t.delta},
         {"resolved", write_array(dir, tag + "_resolved", states_to_rows(t.resolved))},
         {"flux", write_array(dir, tag + "_flux", states_to_rows(fluxes_as_states(t.fluxes)))}});
  }
  write_json(dir / "manifest.json", manifest);
}

TrainingSet load_training_set(const fs::path& dir) {
  const auto manifest = read_json(dir / "manifest.json");
  TrainingSet out;
  for (const auto& t : manifest.at("trajectories")) {
    TrajectoryData traj;
    traj.delta = t.at("delta").get<double>();
    traj.resolved = rows_to_states(read_array(dir, t.at("resolved")));
    traj.fluxes = states_as_fluxes(rows_to_states(read_array(dir, t.at("flux"))));
    out.trajectories.push_back(std::move(traj));
  }
  return out;
}

ModelBundle train(const RunConfig& config, const TrainingSet& data) {
  run_stage("validate", [&] {
    config.validate();
    if (static_cast<int>(data.trajectories.size()) != config.num_trajectories()) {
      throw DomainError("training set has a different number of trajectories than the config");
    }
    if (data.num_cells() != config.coarse_cells()) {
      throw DomainError("training set cell count differs from the config");
    }
    for (std::size_t i = 0; i < data.trajectories.size(); ++i) {
      const auto& t = data.trajectories[i];
      if (t.resolved.size() != t.fluxes.size()) {
        throw DomainError("trajectory " + std::to_string(i) + " has misaligned flux samples");
      }
    }
  });

  const int traj_count = config.num_trajectories();
  const int cells = config.coarse_cells();
  const int delays = config.delays;
  ModelBundle model;
  model.config = config;
  for (const auto& t : data.trajectories) model.train_deltas.push_back(t.delta);

  std::vector<DelayEmbedding> embeddings = run_stage("embed", [&] {
    std::vector<DelayEmbedding> out;
    for (int i = 0; i < traj_count; ++i) {
      out.push_back(delay_embed(data.trajectories[static_cast<std::size_t>(i)].resolved, delays, i));
    }
    return out;
  });

  model.basis_epsilon = run_stage("basis-bandwidth", [&] {
    Eigen::Index total = 0;
    for (const auto& e : embeddings) total += e.vectors.cols();
    Mat pooled(2 * delays, total);
    Eigen::Index col = 0;
    for (const auto& e : embeddings) {
      pooled.middleCols(col, e.vectors.cols()) = e.vectors;
      col += e.vectors.cols();
    }
    const auto pairs = sample_pairs(pooled, config.max_pairs, config.seed);
    return tune_bandwidth(pairs.squared_distances, delays).epsilon;
  });

  const auto ranks = config.rank_split();
  const auto sizes = config.basis_split();
  const PivotRule rule =
      config.pivot_rule == "randomized" ? PivotRule::Randomized : PivotRule::Greedy;
  std::vector<SpectralBasis> bases;
  for (int i = 0; i < traj_count; ++i) {
    const auto& emb = embeddings[static_cast<std::size_t>(i)];
    const int samples = emb.num_samples();
    TrajectoryDiagnostics diag;
    diag.samples = samples;
    const std::string suffix = " traj=" + std::to_string(i);

    const LowRankFactor low_rank = run_stage("factorize" + suffix, [&] {
      const int rank = std::min(ranks[static_cast<std::size_t>(i)], samples);
      const KernelColumnFn column = [&](int p) {
        return gaussian_kernel_column(emb.vectors, p, model.basis_epsilon, delays);
      };
      return pivoted_cholesky(column, Vec::Ones(samples), rank, rule,
                              config.seed + 100 + static_cast<std::uint64_t>(i));
    });
    diag.rank = static_cast<int>(low_rank.factor.cols());
    diag.cholesky_trace_residual = low_rank.trace_residual;

    const BistochasticFactor normalized =
        run_stage("normalize" + suffix, [&] { return bistochastic_normalize(low_rank.factor); });
    diag.sinkhorn_iterations = normalized.iterations;
    diag.sinkhorn_residual = normalized.residual;

    bases.push_back(run_stage("eigenbasis" + suffix, [&] {
      const int wanted = std::min(sizes[static_cast<std::size_t>(i)], diag.rank);
      // Markov normalization: sum_s w_s k(i, s) = 1 with uniform w = 1/samples.
      const Mat kernel_factor = normalized.factor * std::sqrt(static_cast<double>(samples));
      return eigenbasis(kernel_factor, wanted, Vec::Constant(samples, 1.0 / samples), cells);
    }));
    diag.basis_size = bases.back().size();
    model.diagnostics.push_back(diag);
  }

  model.basis = run_stage("assemble", [&] { return assemble_multi_trajectory(bases); });
  bases.clear();
  model.transfer = run_stage("transfer", [&] { return build_transfer(model.basis); });

  model.observables = run_stage("observables", [&] {
    Vec flux_h(model.basis.num_samples());
    Vec flux_q(model.basis.num_samples());
    for (int i = 0; i < traj_count; ++i) {
      const auto& emb = embeddings[static_cast<std::size_t>(i)];
      const auto& traj = data.trajectories[static_cast<std::size_t>(i)];
      const int begin = model.basis.blocks[static_cast<std::size_t>(i)].sample_begin;
      for (int n = 0; n < emb.num_times; ++n) {
        const auto& g = traj.fluxes[static_cast<std::size_t>(emb.source_time(n))];
        flux_h.segment(begin + n * cells, cells) = g.g_h;
        flux_q.segment(begin + n * cells, cells) = g.g_q;
      }
    }
    return build_observables(flux_h, flux_q, model.basis);
  });

  model.conditioning = run_stage("conditioning", [&] {
    ConditioningKernel kernel;
    kernel.stencil_width = config.stencil_width;
    kernel.stencils.resize(2 * config.stencil_width, model.basis.num_samples());
    for (int i = 0; i < traj_count; ++i) {
      const auto& emb = embeddings[static_cast<std::size_t>(i)];
      const auto& traj = data.trajectories[static_cast<std::size_t>(i)];
      const int begin = model.basis.blocks[static_cast<std::size_t>(i)].sample_begin;
      for (int n = 0; n < emb.num_times; ++n) {
        const auto& state = traj.resolved[static_cast<std::size_t>(emb.source_time(n))];
        kernel.stencils.middleCols(begin + n * cells, cells) =
            stencil_embed(state, config.stencil_width);
      }
    }
    const auto pairs = sample_pairs(kernel.stencils, config.max_pairs, config.seed + 1);
    const double pilot = tune_bandwidth(pairs.squared_distances, config.stencil_width).epsilon;
    kernel.bandwidth =
        variable_scales(kernel.stencils, pilot, config.stencil_width, config.bandwidth_exponent);
    std::vector<double> scaled(pairs.squared_distances.size());
    for (std::size_t k = 0; k < scaled.size(); ++k) {
      scaled[k] = pairs.squared_distances[k] / (kernel.bandwidth.scales[pairs.first[k]] *
                                                kernel.bandwidth.scales[pairs.second[k]]);
    }
    kernel.epsilon = tune_bandwidth(scaled, config.stencil_width).epsilon;
    return kernel;
  });
  return model;
}

void save_model(const ModelBundle& model, const fs::path& dir) {
  const Precision obs = model.config.observables_float32 ? Precision::Float32 : Precision::Float64;
  nlohmann::json manifest;
  manifest["config"] = model.config.to_json();
  manifest["gravity"] = model.config.gravity;
  manifest["froude"] = model.config.froude_number();
  manifest["train_deltas"] = model.train_deltas;
  manifest["dimensions"] = {{"samples", model.basis.num_samples()},
                            {"basis_size", model.basis.size()},
                            {"rank", model.config.rank},
                            {"stencil_width", model.conditioning.stencil_width}};
  manifest["seeds"] = {{"basis_pairs", model.config.seed},
                       {"conditioning_pairs", model.config.seed + 1},
                       {"pivots_base", model.config.seed + 100}};
  manifest["bandwidths"] = {{"basis_epsilon", model.basis_epsilon},
                            {"conditioning_epsilon", model.conditioning.epsilon},
                            {"pilot_epsilon", model.conditioning.bandwidth.pilot_epsilon},
                            {"density_geomean", model.conditioning.bandwidth.density_geomean},
                            {"exponent", model.conditioning.bandwidth.exponent}};
  manifest["operation_order"] =
      "pivoted Cholesky of raw kernel -> symmetric Sinkhorn scaling of factor -> eigensolve";
  manifest["transfer_operator_norm"] = model.transfer.operator_norm;
  manifest["blocks"] = nlohmann::json::array();
  for (const auto& b : model.basis.blocks) {
    manifest["blocks"].push_back({{"sample_begin", b.sample_begin},
                                  {"sample_count", b.sample_count},
                                  {"col_begin", b.col_begin},
                                  {"col_count", b.col_count},
                                  {"num_times", b.num_times},
                                  {"num_cells", b.num_cells}});
  }
  manifest["diagnostics"] = nlohmann::json::array();
  for (const auto& d : model.diagnostics) {
    manifest["diagnostics"].push_back({{"samples", d.samples},
                                       {"rank", d.rank},
                                       {"cholesky_trace_residual", d.cholesky_trace_residual},
                                       {"sinkhorn_iterations", d.sinkhorn_iterations},
                                       {"sinkhorn_residual", d.sinkhorn_residual},
                                       {"basis_size", d.basis_size}});
  }
  manifest["arrays"] = {
      {"phi", write_array(dir, "phi", model.basis.phi)},
      {"eigvals", write_array(dir, "eigvals", model.basis.eigvals)},
      {"weights", write_array(dir, "weights", model.basis.weights)},
      {"transfer", write_array(dir, "transfer", model.transfer.matrix)},
      {"observable_h", write_array(dir, "observable_h", model.observables.h.matrix, obs)},
      {"observable_q", write_array(dir, "observable_q", model.observables.q.matrix, obs)},
      {"stencils", write_array(dir, "stencils", model.conditioning.stencils)},
      {"scales", write_array(dir, "scales", model.conditioning.bandwidth.scales)}};
  write_json(dir / "manifest.json", manifest);
}

ModelBundle load_model(const fs::path& dir) {
  const auto manifest = read_json(dir / "manifest.json");
  ModelBundle model;
  model.config = RunConfig::from_json(manifest.at("config"));
  model.train_deltas = manifest.at("train_deltas").get<std::vector<double>>();
  const auto& arrays = manifest.at("arrays");
  model.basis.phi = read_array(dir, arrays.at("phi"));
  model.basis.eigvals = read_array(dir, arrays.at("eigvals")).col(0);
  model.basis.weights = read_array(dir, arrays.at("weights")).col(0);
  for (const auto& b : manifest.at("blocks")) {
    model.basis.blocks.push_back(BasisBlock{b.at("sample_begin"), b.at("sample_count"),
                                            b.at("col_begin"), b.at("col_count"),
                                            b.at("num_times"), b.at("num_cells")});
  }
  model.transfer.matrix = read_array(dir, arrays.at("transfer"));
  model.transfer.operator_norm = manifest.at("transfer_operator_norm");
  model.observables.h = {read_array(dir, arrays.at("observable_h")), "h"};
  model.observables.q = {read_array(dir, arrays.at("observable_q")), "q"};
  const auto& bw = manifest.at("bandwidths");
  model.basis_epsilon = bw.at("basis_epsilon");
  model.conditioning.stencil_width = manifest.at("dimensions").at("stencil_width");
  model.conditioning.epsilon = bw.at("conditioning_epsilon");
  model.conditioning.stencils = read_array(dir, arrays.at("stencils"));
  model.conditioning.bandwidth.pilot_epsilon = bw.at("pilot_epsilon");
  model.conditioning.bandwidth.density_geomean = bw.at("density_geomean");
  model.conditioning.bandwidth.exponent = bw.at("exponent");
  model.conditioning.bandwidth.scales = read_array(dir, arrays.at("scales")).col(0);
  for (const auto& d : manifest.at("diagnostics")) {
    model.diagnostics.push_back(TrajectoryDiagnostics{
        d.at("samples"), d.at("rank"), d.at("cholesky_trace_residual"),
        d.at("sinkhorn_iterations"), d.at("sinkhorn_residual"), d.at("basis_size")});
  }
  return model;
}

namespace {

double rmse(const Vec& a, const Vec& b) { return std::sqrt((a - b).squaredNorm() / a.size()); }

}  // namespace

PredictionReport predict(const ModelBundle& model, const SweState& initial_resolved,
                         const PredictOptions& options) {
  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();
  const RunConfig& config = model.config;
  if (options.horizon < 0) throw StageError("predict", "horizon must be >= 0");
  if (options.conditioning_period < 1) {
    throw StageError("predict", "conditioning period must be >= 1");
  }
  const CoarsePair pair = config.coarse_pair();
  if (initial_resolved.size() != pair.coarse.num_cells) {
    throw StageError("predict", "initial state does not match the coarse grid");
  }
  if (options.fine_initial && options.fine_initial->size() != pair.fine.num_cells) {
    throw StageError("predict", "fine initial state does not match the fine grid");
  }
  const double froude = config.froude_number();
  const int cells = pair.coarse.num_cells;

  PredictionReport report;
  report.conditioning_period = options.conditioning_period;
  report.cell_centers.resize(cells);
  for (int m = 0; m < cells; ++m) report.cell_centers[m] = pair.coarse.center(m);

  std::vector<int> skipped;
  double seconds_conditioning = 0.0;
  auto condition = [&](const DensityField& field, const SweState& state) {
    const auto t0 = Clock::now();
    DensityField out =
        condition_density(field, feature_vectors(state, model.conditioning), model.basis, &skipped);
    seconds_conditioning += std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
  };
  const Vec uniform = init_density_uniform(model.basis, 1).rho.col(0);
  auto evolve = [&](const DensityField& field) {
    DensityField out{model.transfer.matrix * field.rho};
    for (int m = 0; m < out.num_cells(); ++m) {
      const double norm = out.rho.col(m).norm();
      if (norm < 1e-12) {
        out.rho.col(m) = uniform;
        ++report.density_resets;
        warn("predict: degenerate density in cell " + std::to_string(m) + ", reset to uniform");
      } else {
        out.rho.col(m) /= norm;
      }
    }
    return out;
  };

  SweState state = initial_resolved;
  SweState baseline = initial_resolved;
  const SubgridFluxField no_flux = SubgridFluxField::zero(cells);
  DensityField density = run_stage("predict-init", [&] {
    return condition(init_density_uniform(model.basis, cells), state);
  });
  SubgridFluxField flux = surrogate_flux(density, model.observables);

  std::optional<SweState> fine = options.fine_initial;
  const Grid1D fine_grid = pair.fine;
  const SweParams fine_params = SweParams::make(froude, pair.dt_fine);
  const RhsFn fine_rhs_fn = [&](const SweState& s) { return fine_rhs(s, fine_grid, fine_params); };

  auto record = [&] {
    report.qmcl.states.push_back(state);
    report.qmcl.fluxes.push_back(flux);
    report.zero_closure.states.push_back(baseline);
    report.zero_closure.fluxes.push_back(no_flux);
    if (fine) {
      if (!report.truth) report.truth.emplace();
      const SweState truth = coarsen_state(*fine, pair);
      report.truth->states.push_back(truth);
      report.truth->fluxes.push_back(exact_subgrid_flux(*fine, pair, froude));
      report.rmse_qmcl_h.push_back(rmse(state.h, truth.h));
      report.rmse_qmcl_q.push_back(rmse(state.q, truth.q));
      report.rmse_zero_h.push_back(rmse(baseline.h, truth.h));
      report.rmse_zero_q.push_back(rmse(baseline.q, truth.q));
    }
  };
  record();

  for (int step = 1; step <= options.horizon; ++step) {
    run_stage("predict step " + std::to_string(step), [&] {
      state = step_coarse(state, flux, pair, froude, step);
      baseline = step_coarse(baseline, no_flux, pair, froude, step);
      if (fine) {
        for (int k = 1; k <= pair.ratio; ++k) {
          *fine = step_modified_euler(*fine, pair.dt_fine, fine_rhs_fn,
                                      static_cast<long>(step - 1) * pair.ratio + k);
        }
      }
      density = evolve(density);
      if (step % options.conditioning_period == 0) density = condition(density, state);
      flux = surrogate_flux(density, model.observables);
    });
    record();
  }
  report.skipped_conditionings = static_cast<int>(skipped.size());
  report.seconds_conditioning = seconds_conditioning;
  report.seconds_total = std::chrono::duration<double>(Clock::now() - t_start).count();
  return report;
}

double aggregate_rmse(const std::vector<double>& per_step) {
  if (per_step.size() < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t s = 1; s < per_step.size(); ++s) sum += per_step[s] * per_step[s];
  return std::sqrt(sum / static_cast<double>(per_step.size() - 1));
}

NormalizedErrors normalized_errors(const PredictionReport& report) {
  if (!report.truth) throw StageError("report", "normalized errors need a truth trajectory");
  auto spread = [&](bool height) {
    double sum = 0.0, sum2 = 0.0;
    long count = 0;
    for (std::size_t s = 1; s < report.truth->states.size(); ++s) {
      const Vec& v = height ? report.truth->states[s].h : report.truth->states[s].q;
      sum += v.sum();
      sum2 += v.squaredNorm();
      count += v.size();
    }
    if (count == 0) return 1.0;
    const double mean = sum / count;
    return std::sqrt(std::max(sum2 / count - mean * mean, 0.0));
  };
  const double sh = spread(true);
  const double sq = spread(false);
  return NormalizedErrors{aggregate_rmse(report.rmse_qmcl_h) / sh,
                          aggregate_rmse(report.rmse_qmcl_q) / sq,
                          aggregate_rmse(report.rmse_zero_h) / sh,
                          aggregate_rmse(report.rmse_zero_q) / sq};
}

void save_report(const PredictionReport& report, const fs::path& dir) {
  nlohmann::json manifest;
  manifest["delta"] = report.delta;
  manifest["horizon"] = report.horizon();
  manifest["conditioning_period"] = report.conditioning_period;
  manifest["skipped_conditionings"] = report.skipped_conditionings;
  manifest["density_resets"] = report.density_resets;
  manifest["has_truth"] = report.truth.has_value();
  auto& arrays = manifest["arrays"];
  arrays["cell_centers"] = write_array(dir, "cell_centers", report.cell_centers);
  auto save_series = [&](const std::string& name, const FieldSeries& series) {
    arrays[name + "_states"] = write_array(dir, name + "_states", states_to_rows(series.states));
    arrays[name + "_fluxes"] =
        write_array(dir, name + "_fluxes", states_to_rows(fluxes_as_states(series.fluxes)));
  };
  save_series("qmcl", report.qmcl);
  save_series("zero", report.zero_closure);
  if (report.truth) {
    save_series("truth", *report.truth);
    Mat errors(static_cast<Eigen::Index>(report.rmse_qmcl_h.size()), 4);
    for (Eigen::Index s = 0; s < errors.rows(); ++s) {
      const auto k = static_cast<std::size_t>(s);
      errors.row(s) << report.rmse_qmcl_h[k], report.rmse_qmcl_q[k], report.rmse_zero_h[k],
          report.rmse_zero_q[k];
    }
    arrays["rmse"] = write_array(dir, "rmse", errors);
  }
  write_json(dir / "manifest.json", manifest);
  // Wall-clock figures live apart from the deterministic artifacts.
  write_json(dir / "timings.json", {{"seconds_total", report.seconds_total},
                                    {"seconds_conditioning", report.seconds_conditioning}});
}

PredictionReport load_report(const fs::path& dir) {
  const auto manifest = read_json(dir / "manifest.json");
  PredictionReport report;
  report.delta = manifest.at("delta");
  report.conditioning_period = manifest.at("conditioning_period");
  report.skipped_conditionings = manifest.at("skipped_conditionings");
  report.density_resets = manifest.at("density_resets");
  const auto& arrays = manifest.at("arrays");
  report.cell_centers = read_array(dir, arrays.at("cell_centers")).col(0);
  auto load_series = [&](const std::string& name) {
    FieldSeries s;
    s.states = rows_to_states(read_array(dir, arrays.at(name + "_states")));
    s.fluxes = states_as_fluxes(rows_to_states(read_array(dir, arrays.at(name + "_fluxes"))));
    return s;
  };
  report.qmcl = load_series("qmcl");
  report.zero_closure = load_series("zero");
  if (manifest.at("has_truth").get<bool>()) {
    report.truth = load_series("truth");
    const Mat errors = read_array(dir, arrays.at("rmse"));
    for (Eigen::Index s = 0; s < errors.rows(); ++s) {
      report.rmse_qmcl_h.push_back(errors(s, 0));
      report.rmse_qmcl_q.push_back(errors(s, 1));
      report.rmse_zero_h.push_back(errors(s, 2));
      report.rmse_zero_q.push_back(errors(s, 3));
    }
  }
  if (fs::exists(dir / "timings.json")) {
    const auto timings = read_json(dir / "timings.json");
    report.seconds_total = timings.at("seconds_total");
    report.seconds_conditioning = timings.at("seconds_conditioning");
  }
  return report;
}

}  // namespace qmcl
