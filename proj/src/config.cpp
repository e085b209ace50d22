#include "qmcl/config.hpp"

#include <set>

namespace qmcl {

namespace {

std::vector<int> equal_split(int total, int parts) {
  std::vector<int> out(static_cast<std::size_t>(parts), total / parts);
  for (int i = 0; i < total % parts; ++i) ++out[static_cast<std::size_t>(i)];
  return out;
}

void require(bool ok, const char* field, const char* message) {
  if (!ok) throw DomainError(std::string("config.") + field + ": " + message);
}

}  // namespace

RunConfig RunConfig::preset(const std::string& name) {
  RunConfig c;
  if (name == "full") return c;
  if (name == "desk") {
    // 480/10 cells; spin-up keeps the published physical spin-up time.
    c.fine_cells = 480;
    c.coarse_ratio = 10;
    c.spinup_steps = 3050;
    c.sample_steps = 1630;
    c.train_deltas = {0.0, 1.0};
    c.test_deltas = {0.5};
    c.delays = 16;
    c.basis_size = 256;
    c.rank = 512;
    c.horizon = 60;
    return c;
  }
  if (name == "toy") {
    c.fine_cells = 96;
    c.coarse_ratio = 4;
    c.spinup_steps = 200;
    c.sample_steps = 160;
    c.train_deltas = {0.0, 1.0};
    c.test_deltas = {0.5};
    c.delays = 8;
    c.basis_size = 64;
    c.rank = 128;
    c.horizon = 20;
    c.max_pairs = 200'000;
    return c;
  }
  throw DomainError("unknown preset '" + name + "' (expected full, desk, or toy)");
}

std::vector<int> RunConfig::basis_split() const {
  if (!per_traj_basis.empty()) return per_traj_basis;
  return equal_split(basis_size, num_trajectories());
}

std::vector<int> RunConfig::rank_split() const { return equal_split(rank, num_trajectories()); }

void RunConfig::validate() const {
  require(fine_cells >= 2, "fine_cells", "must be >= 2");
  require(coarse_ratio >= 1, "coarse_ratio", "must be >= 1");
  require(fine_cells % coarse_ratio == 0, "coarse_ratio", "must divide fine_cells");
  require(fine_cells / coarse_ratio >= 2, "coarse_ratio", "coarse grid needs >= 2 cells");
  require(domain_max > domain_min, "domain_max", "must exceed domain_min");
  require(gravity > 0.0, "gravity", "must be positive");
  require(froude >= 0.0, "froude", "must be positive (or 0 to derive from gravity)");
  require(dt_factor > 0.0, "dt_factor", "must be positive");
  require(spinup_steps >= 0, "spinup_steps", "must be >= 0");
  require(sample_steps >= 1, "sample_steps", "must be >= 1");
  require(sample_stride >= 0, "sample_stride", "must be >= 0");
  require(!train_deltas.empty(), "train_deltas", "must be nonempty");
  for (double d : train_deltas) require(d >= 0.0 && d <= 1.0, "train_deltas", "must lie in [0, 1]");
  for (double d : test_deltas) require(d >= 0.0 && d <= 1.0, "test_deltas", "must lie in [0, 1]");
  require(delays >= 1, "delays", "must be >= 1");
  require(stencil_width >= 1 && stencil_width % 2 == 1, "stencil_width", "must be odd and positive");
  require(basis_size >= num_trajectories(), "basis_size", "must be >= number of trajectories");
  require(per_traj_basis.empty() || per_traj_basis.size() == train_deltas.size(), "per_traj_basis",
          "must list one size per training trajectory");
  int sum = 0;
  for (int l : per_traj_basis) {
    require(l >= 1, "per_traj_basis", "entries must be >= 1");
    sum += l;
  }
  require(per_traj_basis.empty() || sum == basis_size, "per_traj_basis", "must sum to basis_size");
  const auto ranks = rank_split();
  const auto sizes = basis_split();
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    require(ranks[i] >= sizes[i], "rank", "per-trajectory rank must be >= per-trajectory basis size");
  }
  require(pivot_rule == "greedy" || pivot_rule == "randomized", "pivot_rule",
          "must be 'greedy' or 'randomized'");
  require(max_pairs >= 1, "max_pairs", "must be >= 1");
  require(bandwidth_exponent < 0.0, "bandwidth_exponent", "must be negative");
  require(conditioning_period >= 1, "conditioning_period", "must be >= 1");
  require(horizon >= 0, "horizon", "must be >= 0");
  const long samples = (sample_steps + stride() - 1) / stride();
  require(samples >= delays, "sample_steps", "too few samples for the delay window");
}

nlohmann::json RunConfig::to_json() const {
  return {{"fine_cells", fine_cells},
          {"coarse_ratio", coarse_ratio},
          {"domain_min", domain_min},
          {"domain_max", domain_max},
          {"gravity", gravity},
          {"froude", froude},
          {"dt_factor", dt_factor},
          {"spinup_steps", spinup_steps},
          {"sample_steps", sample_steps},
          {"sample_stride", sample_stride},
          {"train_deltas", train_deltas},
          {"test_deltas", test_deltas},
          {"delays", delays},
          {"stencil_width", stencil_width},
          {"basis_size", basis_size},
          {"per_traj_basis", per_traj_basis},
          {"rank", rank},
          {"pivot_rule", pivot_rule},
          {"seed", seed},
          {"max_pairs", max_pairs},
          {"bandwidth_exponent", bandwidth_exponent},
          {"observables_float32", observables_float32},
          {"conditioning_period", conditioning_period},
          {"horizon", horizon}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) { return from_json(j, RunConfig{}); }

RunConfig RunConfig::from_json(const nlohmann::json& j, RunConfig c) {
  const std::set<std::string> known = [] {
    std::set<std::string> keys;
    const nlohmann::json defaults = RunConfig{}.to_json();
    for (const auto& item : defaults.items()) keys.insert(item.key());
    return keys;
  }();
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw DomainError("config: unknown key '" + k + "'");
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("fine_cells", c.fine_cells);
  get("coarse_ratio", c.coarse_ratio);
  get("domain_min", c.domain_min);
  get("domain_max", c.domain_max);
  get("gravity", c.gravity);
  get("froude", c.froude);
  get("dt_factor", c.dt_factor);
  get("spinup_steps", c.spinup_steps);
  get("sample_steps", c.sample_steps);
  get("sample_stride", c.sample_stride);
  get("train_deltas", c.train_deltas);
  get("test_deltas", c.test_deltas);
  get("delays", c.delays);
  get("stencil_width", c.stencil_width);
  get("basis_size", c.basis_size);
  get("per_traj_basis", c.per_traj_basis);
  get("rank", c.rank);
  get("pivot_rule", c.pivot_rule);
  get("seed", c.seed);
  get("max_pairs", c.max_pairs);
  get("bandwidth_exponent", c.bandwidth_exponent);
  get("observables_float32", c.observables_float32);
  get("conditioning_period", c.conditioning_period);
  get("horizon", c.horizon);
  return c;
}

}  // namespace qmcl
