#include "qmcl/coarsening.hpp"

#include <cmath>
#include <numbers>

namespace qmcl {

CoarsePair CoarsePair::make(const Grid1D& fine, int ratio, double dt_fine) {
  if (ratio < 1) throw DomainError("CoarsePair: ratio must be >= 1");
  if (fine.num_cells % ratio != 0) {
    throw DomainError("CoarsePair: fine cell count not divisible by ratio");
  }
  if (!(dt_fine > 0.0)) throw DomainError("CoarsePair: dt must be positive");
  const Grid1D coarse = Grid1D::make(fine.num_cells / ratio, fine.domain_min, fine.domain_max);
  return CoarsePair{fine, coarse, ratio, dt_fine};
}

SubgridFluxField SubgridFluxField::zero(int num_cells) {
  return {Vec::Zero(num_cells), Vec::Zero(num_cells)};
}

SweState coarsen_state(const SweState& fine_state, const CoarsePair& pair) {
  if (fine_state.size() != pair.fine.num_cells) {
    throw DomainError("coarsen_state: fine state length does not match the fine grid");
  }
  const int mc = pair.coarse.num_cells;
  SweState out(mc);
  for (int m = 0; m < mc; ++m) {
    out.h[m] = fine_state.h.segment(m * pair.ratio, pair.ratio).mean();
    out.q[m] = fine_state.q.segment(m * pair.ratio, pair.ratio).mean();
  }
  return out;
}

FaceFluxes coarse_flux(const SweState& coarse_state, double froude) {
  return face_fluxes(coarse_state, froude);
}

SubgridFluxField exact_subgrid_flux(const SweState& fine_state, const CoarsePair& pair,
                                    double froude) {
  const FaceFluxes fine = face_fluxes(fine_state, froude);
  const FaceFluxes coarse = coarse_flux(coarsen_state(fine_state, pair), froude);
  const int mc = pair.coarse.num_cells;
  SubgridFluxField g = SubgridFluxField::zero(mc);
  for (int m = 0; m < mc; ++m) {
    g.g_h[m] = fine.h[m * pair.ratio] - coarse.h[m];
    g.g_q[m] = fine.q[m * pair.ratio] - coarse.q[m];
  }
  return g;
}

SweState coarse_rhs(const SweState& coarse_state, const SubgridFluxField& subgrid,
                    const CoarsePair& pair, double froude) {
  if (coarse_state.size() != pair.coarse.num_cells || subgrid.size() != coarse_state.size() ||
      subgrid.g_q.size() != subgrid.g_h.size()) {
    throw DomainError("coarse_rhs: length mismatch");
  }
  const FaceFluxes f = coarse_flux(coarse_state, froude);
  return flux_divergence(f.h + subgrid.g_h, f.q + subgrid.g_q, pair.coarse.dx());
}

SweState step_coarse(const SweState& coarse_state, const SubgridFluxField& subgrid,
                     const CoarsePair& pair, double froude, long step) {
  const RhsFn rhs = [&](const SweState& s) { return coarse_rhs(s, subgrid, pair, froude); };
  return step_modified_euler(coarse_state, pair.dt_coarse(), rhs, step);
}

SweState ic_family(double delta, const Grid1D& grid, double domain_length) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw DomainError("ic_family: delta must lie in [0, 1]");
  if (!(domain_length > 0.0)) throw DomainError("ic_family: domain length must be positive");
  using std::numbers::pi;
  const double k = 2.0 * pi / domain_length;
  SweState out(grid.num_cells);
  for (int m = 0; m < grid.num_cells; ++m) {
    const double x = grid.center(m);
    const double h0 = 1.0 + 0.3 * (1.0 - delta / 2.0) *
                                std::sin(k * 3.5 * (1.0 - delta / 2.0) * x + pi / 6.0);
    const double v0 = 1.0 + 0.2 * (1.0 - delta) * std::sin(k * 3.0 * (1.0 - delta) * x);
    out.h[m] = h0;
    out.q[m] = h0 * v0;
  }
  return out;
}

}  // namespace qmcl
