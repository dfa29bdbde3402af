#ifndef CDIFF_SAMPLER_HPP
#define CDIFF_SAMPLER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cdiff/drift.hpp"
#include "cdiff/noise.hpp"

namespace cdiff {

/// Real drift b(x, t); writes x.size() components into `out`.
using DriftFunction = std::function<void(const Point& x, double t, Point& out)>;

/// Multilinear interpolation of a size x n grid drift. Bounded axes clamp to the
/// outermost nodes, periodic axes wrap.
class GridInterpolator {
 public:
  GridInterpolator(GridSpec grid, Eigen::MatrixXd values);
  void operator()(const Point& x, Point& out) const;
  const GridSpec& grid() const { return grid_; }

 private:
  GridSpec grid_;
  Eigen::MatrixXd values_;
};

DriftFunction stationary_drift(GridInterpolator interp);

/// Piecewise-linear in time between grid drifts given at increasing times;
/// held constant outside the covered interval.
DriftFunction time_series_drift(std::vector<double> times, std::vector<GridInterpolator> slices);

struct EnsembleOptions {
  Index steps = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  Direction direction = Direction::Forward;
  double startTime = 0.0;           // terminal time for backward runs
  std::vector<Index> snapshots;     // step indices to record; 0 is the initial state
  bool trackImaginary = false;      // accumulate Y = sum Im dM
  bool keepPaths = false;           // store every step (small ensembles only)
  std::optional<Axis> ring;         // wrap axis 0 onto this periodic axis
  int threads = 1;
  DriftMode mode = DriftMode::DensityConsistent;  // recorded, not used
};

struct PathEnsemble {
  Index paths = 0;
  int dimension = 0;
  Index steps = 0;
  double dt = 0.0;
  Direction direction = Direction::Forward;
  std::uint64_t seed = 0;
  DriftMode mode = DriftMode::DensityConsistent;
  std::optional<Axis> ring;

  std::vector<Index> snapshotSteps;
  std::vector<double> snapshotTimes;
  std::vector<Eigen::MatrixXd> positions;  // per snapshot, paths x dimension
  std::vector<Eigen::MatrixXd> imaginary;  // per snapshot when tracked
  Eigen::MatrixXd squaredIncrements;       // per path and channel, sum (dX)^2
  Eigen::VectorXi windings;                // ring only
  std::vector<double> fullPaths;           // path-major, (steps + 1) x dimension each

  double elapsed() const { return static_cast<double>(steps) * dt; }
  /// Snapshot index recorded at `time` (within dt/2); throws if absent.
  std::size_t snapshot_at(double time) const;
};

/// Euler-Maruyama: X_{k+1} = X_k + s b(X_k, t_k) dt + Re dM with s = +1 forward
/// and s = -1 backward (t decreasing, b the backward drift). One channel
/// covariance per coordinate.
PathEnsemble simulate_ensemble(const DriftFunction& drift,
                               const std::vector<ChannelCovariance>& channels,
                               const Eigen::MatrixXd& initial, const EnsembleOptions& options);

/// Cell-CDF sampling with uniform jitter inside the chosen cell.
Eigen::MatrixXd draw_initial_positions(const DensityField& density, Index count,
                                       std::uint64_t seed);

Eigen::MatrixXd point_mass_positions(const Point& x0, Index count);

/// Wraps x into [lower, upper) and returns the number of turns removed.
int wrap_periodic(double& x, const Axis& axis);

/// Full-path binary export: little-endian header {u64 N, u64 steps, u64 n,
/// f64 dt, u64 seed} followed by N x (steps + 1) x n float64 values.
void write_paths_binary(const PathEnsemble& ensemble, const std::string& path);

}  // namespace cdiff

#endif  // CDIFF_SAMPLER_HPP
