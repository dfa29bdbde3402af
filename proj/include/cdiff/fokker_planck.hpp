#ifndef CDIFF_FOKKER_PLANCK_HPP
#define CDIFF_FOKKER_PLANCK_HPP

#include <functional>

#include "cdiff/grid.hpp"

namespace cdiff {

/// Real drift b(x, t) on one-dimensional grids.
using ScalarDrift = std::function<double(double x, double t)>;

struct FokkerPlanckOptions {
  double startTime = 0.0;
  /// Largest tolerated per-step mass change from clipping negative values.
  double clipTolerance = 1e-8;
};

/// Explicit conservative evolution of d rho/dt = -d(b rho)/dx + (sigma2/2) d^2 rho/dx^2
/// with exponentially fitted (Chang-Cooper / Scharfetter-Gummel) interface
/// fluxes, zero-flux ends on a line and periodic wrap on a ring.
/// Throws NumericalGuard when dt > h^2 / (2 sigma2) or when the drift makes the
/// explicit step lose positivity; the message suggests a stable dt.
DensityField evolve_fokker_planck(const DensityField& rho0, const ScalarDrift& drift,
                                  double sigma2, double dt, Index steps,
                                  const FokkerPlanckOptions& options = {});

/// Explicit centered evolution of the backward Kolmogorov equation
/// df/dt = b df/dx + (sigma2/2) d^2 f/dx^2 (time-homogeneous drift) with
/// zero-gradient ends on a line. Used for the duality check
/// <rho(t), f> = <rho0, f(t)>.
Eigen::VectorXd evolve_backward_kolmogorov(const GridSpec& grid, const Eigen::VectorXd& f0,
                                           const ScalarDrift& drift, double sigma2, double dt,
                                           Index steps);

/// Largest dt the oracle accepts on this grid.
double fokker_planck_max_step(const GridSpec& grid, const ScalarDrift& drift, double sigma2,
                              double t = 0.0);

}  // namespace cdiff

#endif  // CDIFF_FOKKER_PLANCK_HPP
