#include "qmcl/swe_fv.hpp"

#include "qmcl/log.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qmcl {

SolverBlowup::SolverBlowup(long step, const std::string& what)
    : std::runtime_error(what), step_(step) {}

Grid1D Grid1D::make(int num_cells, double domain_min, double domain_max) {
  if (num_cells < 2) throw DomainError("Grid1D: num_cells must be >= 2");
  if (!(domain_max > domain_min)) throw DomainError("Grid1D: domain_max must exceed domain_min");
  return Grid1D{num_cells, domain_min, domain_max};
}

SweState::SweState(Vec h_, Vec q_) : h(std::move(h_)), q(std::move(q_)) {
  if (h.size() != q.size()) throw DomainError("SweState: h and q lengths differ");
}

SweState SweState::shifted(int k) const {
  const int n = size();
  SweState out(n);
  for (int m = 0; m < n; ++m) {
    const int src = ((m - k) % n + n) % n;
    out.h[m] = h[src];
    out.q[m] = q[src];
  }
  return out;
}

SweParams SweParams::make(double froude, double dt) {
  if (!(froude > 0.0)) throw DomainError("SweParams: froude must be positive");
  if (!(dt > 0.0)) throw DomainError("SweParams: dt must be positive");
  return SweParams{froude, dt};
}

double froude_from_gravity(double g) {
  if (!(g > 0.0)) throw DomainError("gravity must be positive");
  return 1.0 / std::sqrt(2.0 * g);
}

Conserved physical_flux(Conserved u, double froude) {
  if (!(u.h > 0.0)) throw DomainError("physical_flux: height must be positive");
  const double inv_fr2 = 1.0 / (froude * froude);
  return {u.q, u.q * u.q / u.h + 0.5 * inv_fr2 * u.h * u.h};
}

double llf_wavespeed(Conserved left, Conserved right, double froude) {
  if (!(left.h > 0.0) || !(right.h > 0.0)) {
    throw DomainError("llf_wavespeed: height must be positive");
  }
  const double inv_fr = 1.0 / froude;
  const double sl = std::abs(left.q / left.h) + inv_fr * std::sqrt(left.h);
  const double sr = std::abs(right.q / right.h) + inv_fr * std::sqrt(right.h);
  return std::max(sl, sr);
}

Conserved llf_flux(Conserved left, Conserved right, double froude) {
  const Conserved fl = physical_flux(left, froude);
  const Conserved fr = physical_flux(right, froude);
  const double lambda = llf_wavespeed(left, right, froude);
  return {0.5 * (fl.h + fr.h) - 0.5 * lambda * (right.h - left.h),
          0.5 * (fl.q + fr.q) - 0.5 * lambda * (right.q - left.q)};
}

FaceFluxes face_fluxes(const SweState& state, double froude) {
  const int n = state.size();
  FaceFluxes out{Vec(n), Vec(n)};
  for (int m = 0; m < n; ++m) {
    const int left = (m == 0) ? n - 1 : m - 1;
    const Conserved f = llf_flux(state.cell(left), state.cell(m), froude);
    out.h[m] = f.h;
    out.q[m] = f.q;
  }
  return out;
}

SweState flux_divergence(const Vec& flux_h, const Vec& flux_q, double dx) {
  const int n = static_cast<int>(flux_h.size());
  if (flux_q.size() != n) throw DomainError("flux_divergence: length mismatch");
  SweState out(n);
  const double inv_dx = 1.0 / dx;
  for (int m = 0; m < n; ++m) {
    const int right = (m + 1 == n) ? 0 : m + 1;
    out.h[m] = (flux_h[m] - flux_h[right]) * inv_dx;
    out.q[m] = (flux_q[m] - flux_q[right]) * inv_dx;
  }
  return out;
}

SweState fine_rhs(const SweState& state, const Grid1D& grid, const SweParams& params) {
  if (state.size() != grid.num_cells) throw DomainError("fine_rhs: state/grid size mismatch");
  const FaceFluxes f = face_fluxes(state, params.froude);
  return flux_divergence(f.h, f.q, grid.dx());
}

void check_state(const SweState& state, long step) {
  for (int m = 0; m < state.size(); ++m) {
    if (!(state.h[m] > 0.0) || !std::isfinite(state.h[m]) || !std::isfinite(state.q[m])) {
      std::ostringstream os;
      os << "solver blowup at step " << step << ": cell " << m << " has h=" << state.h[m]
         << " q=" << state.q[m];
      throw SolverBlowup(step, os.str());
    }
  }
}

SweState step_modified_euler(const SweState& state, double dt, const RhsFn& rhs, long step) {
  const SweState k1 = rhs(state);
  SweState predictor(state.h + dt * k1.h, state.q + dt * k1.q);
  check_state(predictor, step);
  const SweState k2 = rhs(predictor);
  SweState next(state.h + (0.5 * dt) * (k1.h + k2.h), state.q + (0.5 * dt) * (k1.q + k2.q));
  check_state(next, step);
  return next;
}

double cfl_number(const SweState& state, const Grid1D& grid, const SweParams& params) {
  double lambda_max = 0.0;
  const int n = state.size();
  for (int m = 0; m < n; ++m) {
    const int left = (m == 0) ? n - 1 : m - 1;
    lambda_max = std::max(lambda_max, llf_wavespeed(state.cell(left), state.cell(m), params.froude));
  }
  return lambda_max * params.dt / grid.dx();
}

std::vector<SweState> simulate(const SweState& initial, const Grid1D& grid,
                               const SweParams& params, long n_steps, long sample_every) {
  if (n_steps < 0) throw DomainError("simulate: n_steps must be >= 0");
  if (sample_every < 1) throw DomainError("simulate: sample_every must be >= 1");
  if (initial.size() != grid.num_cells) throw DomainError("simulate: state/grid size mismatch");
  check_state(initial, 0);

  const double cfl = cfl_number(initial, grid, params);
  if (cfl > 1.0) {
    std::ostringstream os;
    os << "CFL number " << cfl << " exceeds 1 (dt=" << params.dt << ", dx=" << grid.dx() << ")";
    warn(os.str());
  }

  const RhsFn rhs = [&](const SweState& s) { return fine_rhs(s, grid, params); };
  std::vector<SweState> samples;
  samples.reserve(static_cast<std::size_t>(n_steps / sample_every + 1));
  samples.push_back(initial);
  SweState state = initial;
  for (long step = 1; step <= n_steps; ++step) {
    state = step_modified_euler(state, params.dt, rhs, step);
    if (step % sample_every == 0) samples.push_back(state);
  }
  return samples;
}

}  // namespace qmcl
