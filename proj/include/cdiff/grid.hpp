#ifndef CDIFF_GRID_HPP
#define CDIFF_GRID_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cdiff/core.hpp"

namespace cdiff {

enum class Topology { Line, Box, Ring, SpacetimeBox };

std::string to_string(Topology t);
Topology topology_from_string(const std::string& name);

/// One axis of a tensor grid. Periodic axes hold nodes lower + j h for
/// j < cells; bounded axes hold cell centres lower + (j + 1/2) h and are
/// closed by homogeneous Dirichlet ghosts.
struct Axis {
  double lower = 0.0;
  double upper = 1.0;
  Index cells = 8;
  bool periodic = false;

  double spacing() const { return (upper - lower) / static_cast<double>(cells); }
  double length() const { return upper - lower; }
  double node(Index j) const {
    return lower + (static_cast<double>(j) + (periodic ? 0.0 : 0.5)) * spacing();
  }
  bool operator==(const Axis&) const = default;
};

/// Row-major tensor grid; the last axis varies fastest. For SpacetimeBox the
/// first axis is x^0.
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(Topology topology, std::vector<Axis> axes, double timeStep);

  static GridSpec line(double lower, double upper, Index cells, double timeStep);
  static GridSpec ring(double lower, double upper, Index cells, double timeStep);
  static GridSpec box(std::vector<Axis> axes, double timeStep);
  static GridSpec spacetime(Axis time, std::vector<Axis> space, double timeStep);

  Topology topology() const { return topology_; }
  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(int a) const { return axes_[static_cast<std::size_t>(a)]; }
  int dimension() const { return static_cast<int>(axes_.size()); }
  double time_step() const { return timeStep_; }
  Index size() const { return size_; }
  Index stride(int a) const { return strides_[static_cast<std::size_t>(a)]; }
  double cell_volume() const;

  Index axis_index(Index flat, int a) const { return (flat / stride(a)) % axis(a).cells; }
  double coordinate(Index flat, int a) const { return axis(a).node(axis_index(flat, a)); }
  Point point(Index flat) const;

  /// Neighbour along an axis; -1 when it falls outside a bounded axis.
  Index neighbour(Index flat, int a, Index offset) const;

  bool operator==(const GridSpec& other) const {
    return topology_ == other.topology_ && axes_ == other.axes_ && timeStep_ == other.timeStep_;
  }

 private:
  Topology topology_ = Topology::Line;
  std::vector<Axis> axes_;
  std::vector<Index> strides_;
  double timeStep_ = 0.0;
  Index size_ = 0;
};

/// Scalar potential U(x,t), covector potential A_i(x,t) and the charge q.
struct PotentialSet {
  using ScalarFn = std::function<double(const Point&, double)>;
  using VectorFn = std::function<Point(const Point&, double)>;

  ScalarFn scalar;  // empty means U = 0
  VectorFn vector;  // empty means A = 0
  double charge = 0.0;
  bool timeDependent = false;
  std::string description = "none";

  static PotentialSet none() { return {}; }
  /// U = coefficient * |x|^2.
  static PotentialSet quadratic(double coefficient);

  bool has_vector() const { return static_cast<bool>(vector) && charge != 0.0; }
  Eigen::VectorXd scalar_on(const GridSpec& grid, double t) const;
  /// size x dimension matrix of A_i at the grid nodes.
  Eigen::MatrixXd vector_on(const GridSpec& grid, double t) const;
};

/// F_ij = d_i A_j - d_j A_i by central differences; one (n x n) block per node,
/// stored as a size x (n*n) row-major matrix.
Eigen::MatrixXd field_strength(const GridSpec& grid, const PotentialSet& pot, double t);

struct CatalogInfo {
  std::string name;
  std::string parameters;  // human-readable parameter echo
  Complex energy{0.0, 0.0};
  bool hasEnergy = false;
  std::string potential;
};

class WaveField {
 public:
  WaveField(GridSpec grid, Eigen::VectorXcd amplitudes, Branch branch, double time,
            DiffusionConstant alpha);

  const GridSpec& grid() const { return grid_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Branch branch() const { return branch_; }
  double time() const { return time_; }
  const DiffusionConstant& alpha() const { return alpha_; }

  double l2_norm_squared() const;
  double l1_norm() const;

  std::optional<CatalogInfo> provenance;

 private:
  GridSpec grid_;
  Eigen::VectorXcd amplitudes_;
  Branch branch_;
  double time_;
  DiffusionConstant alpha_;
};

enum class NormConvention { L1, L2 };

class DensityField {
 public:
  DensityField(GridSpec grid, Eigen::VectorXd values, NormConvention convention);

  const GridSpec& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  NormConvention convention() const { return convention_; }

  double integral() const { return values_.sum() * grid_.cell_volume(); }
  double mean(int axis = 0) const;
  double variance(int axis = 0) const;

  /// Returns a copy rescaled so that the integral is one.
  DensityField normalized() const;
  /// Merges `factor` consecutive cells along axis 0 (1D only).
  DensityField coarsened(Index factor) const;

 private:
  GridSpec grid_;
  Eigen::VectorXd values_;
  NormConvention convention_;
};

/// rho = |Psi| / int |Psi| (L1) or |Psi|^2 / int |Psi|^2 (L2).
DensityField density_from_wave(const WaveField& psi, NormConvention convention);

/// Samples f on the grid nodes.
template <typename Scalar, typename F>
GridFunction<Scalar> sample_on(const GridSpec& grid, F&& f) {
  GridFunction<Scalar> out(grid.size());
  for (Index i = 0; i < grid.size(); ++i) out(i) = f(grid.point(i));
  return out;
}

/// Second-order central first derivative along an axis. Periodic axes wrap;
/// bounded axes switch to second-order one-sided stencils at the edges.
template <typename Scalar>
GridFunction<Scalar> central_difference(const GridSpec& grid, const GridFunction<Scalar>& f,
                                        int a) {
  const double h = grid.axis(a).spacing();
  const bool periodic = grid.axis(a).periodic;
  GridFunction<Scalar> out(f.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const Index up = grid.neighbour(i, a, 1);
    const Index down = grid.neighbour(i, a, -1);
    if (periodic || (up >= 0 && down >= 0)) {
      out(i) = (f(up) - f(down)) / (2.0 * h);
    } else if (down < 0) {
      out(i) = (-3.0 * f(i) + 4.0 * f(up) - f(grid.neighbour(i, a, 2))) / (2.0 * h);
    } else {
      out(i) = (3.0 * f(i) - 4.0 * f(down) + f(grid.neighbour(i, a, -2))) / (2.0 * h);
    }
  }
  return out;
}

/// Second-order second derivative along an axis, with one-sided four-point
/// stencils at bounded edges.
template <typename Scalar>
GridFunction<Scalar> second_difference(const GridSpec& grid, const GridFunction<Scalar>& f,
                                       int a) {
  const double h2 = grid.axis(a).spacing() * grid.axis(a).spacing();
  const bool periodic = grid.axis(a).periodic;
  GridFunction<Scalar> out(f.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const Index up = grid.neighbour(i, a, 1);
    const Index down = grid.neighbour(i, a, -1);
    if (periodic || (up >= 0 && down >= 0)) {
      out(i) = (f(up) - 2.0 * f(i) + f(down)) / h2;
    } else if (down < 0) {
      out(i) = (2.0 * f(i) - 5.0 * f(up) + 4.0 * f(grid.neighbour(i, a, 2)) -
                f(grid.neighbour(i, a, 3))) /
               h2;
    } else {
      out(i) = (2.0 * f(i) - 5.0 * f(down) + 4.0 * f(grid.neighbour(i, a, -2)) -
                f(grid.neighbour(i, a, -3))) /
               h2;
    }
  }
  return out;
}

template <typename Scalar>
GridFunction<Scalar> laplacian(const GridSpec& grid, const GridFunction<Scalar>& f) {
  GridFunction<Scalar> out = GridFunction<Scalar>::Zero(f.size());
  for (int a = 0; a < grid.dimension(); ++a) out += second_difference(grid, f, a);
  return out;
}

/// Mask of nodes at least `margin` cells away from every bounded edge.
std::vector<bool> interior_mask(const GridSpec& grid, Index margin);

}  // namespace cdiff

#endif  // CDIFF_GRID_HPP
