#pragma once

// Finite-volume solver for the 1-D periodic shallow water equations
//
//   h_t + q_x = 0
//   q_t + (q^2/h + 1/2 Fr^-2 h^2)_x = 0
//
// discretized with the local Lax-Friedrichs (LLF) flux and integrated in time
// with the modified Euler (two-stage Runge-Kutta) method.

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmcl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown on inputs outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown when a time integrator produces a nonpositive or non-finite height.
class SolverBlowup : public std::runtime_error {
 public:
  SolverBlowup(long step, const std::string& what);
  long step() const { return step_; }

 private:
  long step_;
};

/// Uniform periodic grid on [domain_min, domain_max).
struct Grid1D {
  int num_cells = 0;
  double domain_min = 0.0;
  double domain_max = 1.0;

  /// Validating constructor; throws DomainError unless num_cells >= 2 and max > min.
  static Grid1D make(int num_cells, double domain_min, double domain_max);

  double length() const { return domain_max - domain_min; }
  double dx() const { return length() / num_cells; }
  double center(int m) const { return domain_min + (m + 0.5) * dx(); }
};

/// A conserved pair (h, q): a cell value or a flux through a face.
struct Conserved {
  double h = 0.0;
  double q = 0.0;
};

/// Cell-averaged height and momentum on a grid at one instant.
struct SweState {
  Vec h;
  Vec q;

  SweState() = default;
  explicit SweState(int n) : h(Vec::Zero(n)), q(Vec::Zero(n)) {}
  SweState(Vec h_, Vec q_);

  int size() const { return static_cast<int>(h.size()); }
  Conserved cell(int m) const { return {h[m], q[m]}; }
  /// Circular shift: result(m) = this(m - k).
  SweState shifted(int k) const;
};

struct SweParams {
  double froude = 0.0;
  double dt = 0.0;

  static SweParams make(double froude, double dt);
};

/// Fr = 1/sqrt(2 g).
double froude_from_gravity(double g);

Conserved physical_flux(Conserved u, double froude);

double llf_wavespeed(Conserved left, Conserved right, double froude);

Conserved llf_flux(Conserved left, Conserved right, double froude);

/// Numerical fluxes on every face. Entry m is the flux through the LEFT face of
/// cell m, i.e. llf_flux(u[m-1], u[m]) with periodic wrap.
struct FaceFluxes {
  Vec h;
  Vec q;
};

FaceFluxes face_fluxes(const SweState& state, double froude);

/// (F_m - F_{m+1}) / dx with periodic wrap.
SweState flux_divergence(const Vec& flux_h, const Vec& flux_q, double dx);

SweState fine_rhs(const SweState& state, const Grid1D& grid, const SweParams& params);

using RhsFn = std::function<SweState(const SweState&)>;

/// One modified Euler step. `step` only labels a SolverBlowup.
SweState step_modified_euler(const SweState& state, double dt, const RhsFn& rhs,
                             long step = 0);

/// Largest lambda * dt / dx over all faces.
double cfl_number(const SweState& state, const Grid1D& grid, const SweParams& params);

/// Integrates n_steps fine steps and returns the states at steps
/// 0, sample_every, 2*sample_every, ... (<= n_steps). A CFL number above one
/// at the start of the run is reported through the warning sink, not thrown.
std::vector<SweState> simulate(const SweState& initial, const Grid1D& grid,
                               const SweParams& params, long n_steps,
                               long sample_every = 1);

/// Validates positivity and finiteness of a state; throws SolverBlowup.
void check_state(const SweState& state, long step);

}  // namespace qmcl
