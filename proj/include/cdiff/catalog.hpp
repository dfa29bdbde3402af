#ifndef CDIFF_CATALOG_HPP
#define CDIFF_CATALOG_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cdiff/grid.hpp"

namespace cdiff {

/// Parameters shared by the analytic catalog. Unused fields are ignored.
struct StateParams {
  double mass = 1.0;
  double omega = 1.0;
  double sigma = 1.0;     // standard deviation of |Psi|^2 at t = 0 (free packet)
  double center = 0.0;
  double momentum = 0.0;  // eigenvalue of p = -alpha d/dx
  int level = 0;          // excitation / ring wavenumber index
  Branch branch = Branch::Minus;
  double time = 0.0;

  // Klein-Gordon entries (alpha = i, flat spacetime, A = 0).
  std::vector<double> spatialMomentum;     // p vector; defaults to zero
  std::optional<double> energyOverride;    // p^0, normally taken on shell
  double packetWidth = 10.0;               // std of |Phi|^2 along each spatial axis
  int packetModes = 4;                     // momentum lattice half-width per axis
};

/// An exact solution together with the potential it pairs with. `exact` gives
/// Psi(x, t) for the diffusion entries and Phi(x) (t ignored) for the
/// Klein-Gordon entries.
struct CatalogState {
  WaveField psi;
  PotentialSet potential;
  std::optional<Complex> energy;
  std::function<Complex(const Point&, double)> exact;
  ParticleSpec particle;
  bool relativistic = false;
};

std::vector<std::string> catalog_names();

/// Throws InvalidSpec for unknown names or parameters that do not fit the grid
/// topology (for example a ring eigenstate on a line).
CatalogState analytic_state(const std::string& name, const GridSpec& grid,
                            const DiffusionConstant& alpha, const StateParams& params);

/// Max-norm of the discrete residual of
///   -/+ alpha dPsi/dt = [alpha^2/2m (d -/+ q A/alpha)^2 + U] Psi
/// on nodes away from bounded edges. The time derivative is taken from `exact`
/// by a fourth-order difference, the spatial operator by second-order stencils.
double diffusion_residual(const std::function<Complex(const Point&, double)>& exact,
                          const GridSpec& grid, const DiffusionConstant& alpha,
                          const ParticleSpec& particle, const PotentialSet& potential,
                          Branch branch, double t);

/// Max-norm of (eta^{mu nu} d_mu d_nu + m^2/alpha^2) Phi on interior nodes of a
/// spacetime grid (axis 0 is x^0).
double klein_gordon_residual(const std::function<Complex(const Point&, double)>& exact,
                             const GridSpec& spacetime, double mass,
                             const DiffusionConstant& alpha);

/// Residual certificate of a catalog entry on `grid`.
double catalog_residual(const CatalogState& state, const GridSpec& grid);

/// sum_k c_k psi_k e^{+/- E_k t / alpha}; every state must be an eigenstate on
/// the same grid with the same alpha and branch.
WaveField superpose(const std::vector<Complex>& coefficients,
                    const std::vector<CatalogState>& states, double t);

}  // namespace cdiff

#endif  // CDIFF_CATALOG_HPP
