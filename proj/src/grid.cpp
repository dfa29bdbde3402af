#include "cdiff/grid.hpp"

#include <cmath>

namespace cdiff {

std::string to_string(Topology t) {
  switch (t) {
    case Topology::Line: return "line";
    case Topology::Box: return "box";
    case Topology::Ring: return "ring";
    case Topology::SpacetimeBox: return "spacetime-box";
  }
  return "unknown";
}

Topology topology_from_string(const std::string& name) {
  if (name == "line") return Topology::Line;
  if (name == "box") return Topology::Box;
  if (name == "ring") return Topology::Ring;
  if (name == "spacetime-box") return Topology::SpacetimeBox;
  throw InvalidSpec("unknown topology '" + name + "'");
}

GridSpec::GridSpec(Topology topology, std::vector<Axis> axes, double timeStep)
    : topology_(topology), axes_(std::move(axes)), timeStep_(timeStep) {
  if (axes_.empty() || axes_.size() > 4) throw InvalidSpec("grid needs 1..4 axes");
  if (!(timeStep_ > 0.0)) throw InvalidSpec("grid time step must be positive");
  if ((topology_ == Topology::Line || topology_ == Topology::Ring) && axes_.size() != 1) {
    throw InvalidSpec("line and ring grids are one-dimensional");
  }
  if (topology_ == Topology::Ring && !axes_[0].periodic) {
    throw InvalidSpec("ring axis must be periodic");
  }
  if (topology_ == Topology::Line && axes_[0].periodic) {
    throw InvalidSpec("line axis cannot be periodic; use a ring");
  }
  if (topology_ == Topology::SpacetimeBox && axes_.size() < 2) {
    throw InvalidSpec("spacetime box needs a time axis and at least one spatial axis");
  }
  for (const auto& ax : axes_) {
    if (!(ax.upper > ax.lower)) throw InvalidSpec("axis bounds must satisfy lower < upper");
    if (ax.cells < 8) throw InvalidSpec("every axis needs at least 8 cells");
  }
  strides_.assign(axes_.size(), 1);
  for (int a = static_cast<int>(axes_.size()) - 2; a >= 0; --a) {
    strides_[static_cast<std::size_t>(a)] =
        strides_[static_cast<std::size_t>(a) + 1] * axes_[static_cast<std::size_t>(a) + 1].cells;
  }
  size_ = strides_[0] * axes_[0].cells;
}

GridSpec GridSpec::line(double lower, double upper, Index cells, double timeStep) {
  return {Topology::Line, {Axis{lower, upper, cells, false}}, timeStep};
}

GridSpec GridSpec::ring(double lower, double upper, Index cells, double timeStep) {
  return {Topology::Ring, {Axis{lower, upper, cells, true}}, timeStep};
}

GridSpec GridSpec::box(std::vector<Axis> axes, double timeStep) {
  return {Topology::Box, std::move(axes), timeStep};
}

GridSpec GridSpec::spacetime(Axis time, std::vector<Axis> space, double timeStep) {
  std::vector<Axis> axes;
  axes.push_back(time);
  axes.insert(axes.end(), space.begin(), space.end());
  return {Topology::SpacetimeBox, std::move(axes), timeStep};
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (const auto& ax : axes_) v *= ax.spacing();
  return v;
}

Point GridSpec::point(Index flat) const {
  Point p(dimension());
  for (int a = 0; a < dimension(); ++a) p(a) = coordinate(flat, a);
  return p;
}

Index GridSpec::neighbour(Index flat, int a, Index offset) const {
  const Axis& ax = axis(a);
  const Index j = axis_index(flat, a);
  Index target = j + offset;
  if (ax.periodic) {
    target = ((target % ax.cells) + ax.cells) % ax.cells;
  } else if (target < 0 || target >= ax.cells) {
    return -1;
  }
  return flat + (target - j) * stride(a);
}

PotentialSet PotentialSet::quadratic(double coefficient) {
  PotentialSet pot;
  pot.scalar = [coefficient](const Point& x, double) { return coefficient * x.squaredNorm(); };
  pot.description = "quadratic(" + std::to_string(coefficient) + ")";
  return pot;
}

Eigen::VectorXd PotentialSet::scalar_on(const GridSpec& grid, double t) const {
  if (!scalar) return Eigen::VectorXd::Zero(grid.size());
  Eigen::VectorXd out(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    out(i) = scalar(grid.point(i), t);
    if (!std::isfinite(out(i))) throw NumericalGuard("scalar potential is not finite on grid");
  }
  return out;
}

Eigen::MatrixXd PotentialSet::vector_on(const GridSpec& grid, double t) const {
  const int n = grid.dimension();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(grid.size(), n);
  if (!vector) return out;
  for (Index i = 0; i < grid.size(); ++i) {
    const Point a = vector(grid.point(i), t);
    if (a.size() != n) throw InvalidSpec("vector potential has wrong dimension");
    out.row(i) = a.transpose();
    if (!out.row(i).allFinite()) throw NumericalGuard("vector potential is not finite on grid");
  }
  return out;
}

Eigen::MatrixXd field_strength(const GridSpec& grid, const PotentialSet& pot, double t) {
  const int n = grid.dimension();
  const Eigen::MatrixXd a = pot.vector_on(grid, t);
  std::vector<Eigen::MatrixXd> grads;  // grads[i].col(j) = d_i A_j
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd g(grid.size(), n);
    for (int j = 0; j < n; ++j) {
      g.col(j) = central_difference<double>(grid, a.col(j), i);
    }
    grads.push_back(std::move(g));
  }
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(grid.size(), n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      f.col(i * n + j) = grads[static_cast<std::size_t>(i)].col(j) -
                         grads[static_cast<std::size_t>(j)].col(i);
    }
  }
  return f;
}

WaveField::WaveField(GridSpec grid, Eigen::VectorXcd amplitudes, Branch branch, double time,
                     DiffusionConstant alpha)
    : grid_(std::move(grid)),
      amplitudes_(std::move(amplitudes)),
      branch_(branch),
      time_(time),
      alpha_(alpha) {
  if (amplitudes_.size() != grid_.size()) {
    throw InvalidSpec("wave amplitudes do not match grid size");
  }
  if (!amplitudes_.allFinite()) throw NumericalGuard("wave field contains NaN or Inf");
  if (!(amplitudes_.squaredNorm() > 0.0)) throw InvalidSpec("wave field is identically zero");
}

double WaveField::l2_norm_squared() const {
  return amplitudes_.squaredNorm() * grid_.cell_volume();
}

double WaveField::l1_norm() const { return amplitudes_.cwiseAbs().sum() * grid_.cell_volume(); }

DensityField::DensityField(GridSpec grid, Eigen::VectorXd values, NormConvention convention)
    : grid_(std::move(grid)), values_(std::move(values)), convention_(convention) {
  if (values_.size() != grid_.size()) throw InvalidSpec("density does not match grid size");
  if (!values_.allFinite()) throw NumericalGuard("density contains NaN or Inf");
  if (values_.minCoeff() < 0.0) throw InvalidSpec("density must be nonnegative");
}

double DensityField::mean(int axis) const {
  double m = 0.0;
  for (Index i = 0; i < grid_.size(); ++i) m += values_(i) * grid_.coordinate(i, axis);
  return m * grid_.cell_volume() / integral();
}

double DensityField::variance(int axis) const {
  const double mu = mean(axis);
  double v = 0.0;
  for (Index i = 0; i < grid_.size(); ++i) {
    const double d = grid_.coordinate(i, axis) - mu;
    v += values_(i) * d * d;
  }
  return v * grid_.cell_volume() / integral();
}

DensityField DensityField::normalized() const {
  const double mass = integral();
  if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidSpec("density is not normalizable");
  return {grid_, values_ / mass, convention_};
}

DensityField DensityField::coarsened(Index factor) const {
  if (grid_.dimension() != 1) throw InvalidSpec("coarsening is implemented for 1D grids");
  const Axis& ax = grid_.axis(0);
  if (factor < 1 || ax.cells % factor != 0) {
    throw InvalidSpec("coarsening factor must divide the cell count");
  }
  Axis coarse = ax;
  coarse.cells = ax.cells / factor;
  GridSpec grid(grid_.topology(), {coarse}, grid_.time_step());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(coarse.cells);
  for (Index i = 0; i < ax.cells; ++i) {
    if (ax.periodic) {
      // Periodic nodes sit on cell edges: node j belongs to coarse cell round(j/factor).
      const Index target = ((i + factor / 2) / factor) % coarse.cells;
      v(target) += values_(i);
    } else {
      v(i / factor) += values_(i);
    }
  }
  v /= static_cast<double>(factor);
  return {grid, v, convention_};
}

DensityField density_from_wave(const WaveField& psi, NormConvention convention) {
  Eigen::VectorXd rho = psi.amplitudes().cwiseAbs2();
  if (convention == NormConvention::L1) rho = rho.cwiseSqrt();
  DensityField d(psi.grid(), rho, convention);
  return d.normalized();
}

std::vector<bool> interior_mask(const GridSpec& grid, Index margin) {
  std::vector<bool> mask(static_cast<std::size_t>(grid.size()), true);
  for (Index i = 0; i < grid.size(); ++i) {
    for (int a = 0; a < grid.dimension(); ++a) {
      if (grid.axis(a).periodic) continue;
      const Index j = grid.axis_index(i, a);
      if (j < margin || j >= grid.axis(a).cells - margin) mask[static_cast<std::size_t>(i)] = false;
    }
  }
  return mask;
}

}  // namespace cdiff
