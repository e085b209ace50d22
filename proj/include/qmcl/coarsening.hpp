#pragma once

// Coarse grid obtained by merging every `ratio` fine cells, and the coarse
// dynamics driven by LLF fluxes on the coarse grid plus subgrid fluxes
//
//   G_m = F_{ratio*m}(fine) - Fhat_m(coarsened state).

#include "qmcl/swe_fv.hpp"

namespace qmcl {

struct CoarsePair {
  Grid1D fine;
  Grid1D coarse;
  int ratio = 1;
  double dt_fine = 0.0;

  /// Throws DomainError unless ratio >= 1 divides fine.num_cells and the
  /// coarse grid still has at least two cells.
  static CoarsePair make(const Grid1D& fine, int ratio, double dt_fine);

  double dt_coarse() const { return ratio * dt_fine; }
};

/// Subgrid fluxes at the left face of every coarse cell.
struct SubgridFluxField {
  Vec g_h;
  Vec g_q;

  static SubgridFluxField zero(int num_cells);
  int size() const { return static_cast<int>(g_h.size()); }
};

SweState coarsen_state(const SweState& fine_state, const CoarsePair& pair);

FaceFluxes coarse_flux(const SweState& coarse_state, double froude);

SubgridFluxField exact_subgrid_flux(const SweState& fine_state, const CoarsePair& pair,
                                    double froude);

SweState coarse_rhs(const SweState& coarse_state, const SubgridFluxField& subgrid,
                    const CoarsePair& pair, double froude);

/// One coarse modified-Euler step; `subgrid` is held fixed across both stages.
SweState step_coarse(const SweState& coarse_state, const SubgridFluxField& subgrid,
                     const CoarsePair& pair, double froude, long step = 0);

/// The one-parameter initial condition family evaluated at fine cell centers:
///   h0 = 1 + 0.3(1-d/2) sin(2pi/Ls * 3.5(1-d/2) x + pi/6)
///   v0 = 1 + 0.2(1-d)   sin(2pi/Ls * 3(1-d) x),   q0 = h0 v0.
SweState ic_family(double delta, const Grid1D& grid, double domain_length);

}  // namespace qmcl
