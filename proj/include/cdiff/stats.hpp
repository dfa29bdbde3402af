#ifndef CDIFF_STATS_HPP
#define CDIFF_STATS_HPP

#include <functional>
#include <string>
#include <vector>

#include "cdiff/relativistic.hpp"
#include "cdiff/sampler.hpp"

namespace cdiff {

/// Histogram of a snapshot on the cells of `grid`, normalized over the samples
/// that fall inside the grid. For ring grids the cell of node j is
/// [x_j - h/2, x_j + h/2).
DensityField empirical_density(const PathEnsemble& ensemble, std::size_t snapshot,
                               const GridSpec& grid);

struct ComparisonReport {
  double l1Distance = 0.0;
  double klDivergence = 0.0;  // KL(a || b), natural log, floor 1e-15 on b
  double maxAbs = 0.0;
};

inline constexpr double kKlFloor = 1e-15;

ComparisonReport compare_densities(const DensityField& a, const DensityField& b);

struct ItoVelocityEstimate {
  std::vector<double> centers;
  std::vector<double> values;
  std::vector<double> standardErrors;
  std::vector<Index> counts;
  Index droppedBins = 0;
};

/// Bin averages of the increment rate over consecutive snapshot pairs, along
/// axis 0. Forward conditions on the earlier position in physical time
/// (E[(X_{t+dt} - X_t)/dt | X_t]); backward on the later one
/// (E[(X_{t+dt} - X_t)/dt | X_{t+dt}]). Bins with fewer than `minCount`
/// samples are dropped and counted.
ItoVelocityEstimate estimate_ito_velocity(const PathEnsemble& ensemble, Direction which,
                                          const GridSpec& bins, Index minCount = 20);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Count-weighted least squares through (center, value).
LinearFit fit_line(const ItoVelocityEstimate& estimate);

struct UncertaintyReport {
  double varX = 0.0;
  double varP = 0.0;
  double product = 0.0;  // sqrt(VarX VarP); NaN when VarP is not positive
  double bound = 0.0;    // (|alpha| / 2)(1 + cos phi)
  bool asserted = false; // only for purely imaginary alpha
  bool satisfied = true;
};

UncertaintyReport uncertainty_product(const WaveField& psi);

struct CausalityReport {
  double energyMomentum = 0.0;        // E[eta w_circ w_circ]
  double energyMomentumError = 0.0;   // standard error
  double target = 0.0;                // -epsilon^2 m^2
  std::vector<double> windows;
  std::vector<double> violationFractions;
  double threshold = 0.0;             // n (1 + cos phi) / (2m)
};

/// (a) E[eta_{mu nu} w^mu w^nu] over the anchor snapshot using `velocity`;
/// (b) fraction of displacements X(anchor + window) - X(anchor) that are
/// spacelike, per window. The ensemble must carry snapshots at the anchor and
/// every anchor + window.
CausalityReport causality_statistics(const std::function<Point(const Point&)>& velocity,
                                     const PathEnsemble& ensemble, const RelativisticSpec& spec,
                                     const DiffusionConstant& alpha,
                                     const std::vector<double>& windows, double anchor);

/// Realized variance rate sum (dX)^2 / T per channel, averaged over paths.
Eigen::VectorXd ensemble_quadratic_variation(const PathEnsemble& ensemble,
                                             Index minimumSteps = 1000);

}  // namespace cdiff

#endif  // CDIFF_STATS_HPP
