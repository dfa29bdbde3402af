#include "cdiff/crank_nicolson.hpp"

#include <Eigen/SparseLU>

#include <cmath>

namespace cdiff {

namespace {

constexpr double kStabilityLimit = 0.5;

}  // namespace

bool is_well_posed(const DiffusionConstant& alpha, Branch branch, Direction direction) {
  // dPsi/dt = -(s/alpha) H Psi has diffusion coefficient -s alpha / 2m; running
  // in direction d needs Re(-s d alpha) >= 0.
  const double re = -static_cast<double>(sign(branch) * sign(direction)) * alpha.value().real();
  return re >= -1e-14 * alpha.magnitude();
}

Eigen::SparseMatrix<Complex> diffusion_operator(const GridSpec& grid, const DiffusionConstant& alpha,
                                                const ParticleSpec& particle,
                                                const PotentialSet& pot, Branch branch, double t) {
  const Complex a = alpha.value();
  const Complex kinetic = a * a / (2.0 * particle.mass);
  const Eigen::VectorXd u = pot.scalar_on(grid, t);
  const bool gauge = pot.has_vector();
  const Eigen::MatrixXd avec = gauge ? pot.vector_on(grid, t) : Eigen::MatrixXd();
  const Complex c = static_cast<double>(sign(branch)) * pot.charge / a;

  std::vector<Eigen::Triplet<Complex>> entries;
  entries.reserve(static_cast<std::size_t>(grid.size() * (2 * grid.dimension() + 1)));
  for (Index i = 0; i < grid.size(); ++i) {
    Complex diag = u(i);
    for (int d = 0; d < grid.dimension(); ++d) {
      const double h = grid.axis(d).spacing();
      const Index up = grid.neighbour(i, d, 1);
      const Index down = grid.neighbour(i, d, -1);
      // (d - cA)^2 = d^2 - c (d A + A d) + c^2 A^2; the product rule term
      // d(A Psi) is differenced with A at the neighbours.
      Complex wUp = kinetic / (h * h);
      Complex wDown = kinetic / (h * h);
      diag -= 2.0 * kinetic / (h * h);
      if (gauge) {
        const double ai = avec(i, d);
        const double aUp = up >= 0 ? avec(up, d) : ai;
        const double aDown = down >= 0 ? avec(down, d) : ai;
        wUp -= kinetic * c * (aUp + ai) / (2.0 * h);
        wDown += kinetic * c * (aDown + ai) / (2.0 * h);
        diag += kinetic * c * c * ai * ai;
      }
      if (up >= 0) entries.emplace_back(i, up, wUp);
      if (down >= 0) entries.emplace_back(i, down, wDown);
    }
    entries.emplace_back(i, i, diag);
  }
  Eigen::SparseMatrix<Complex> h(grid.size(), grid.size());
  h.setFromTriplets(entries.begin(), entries.end());
  return h;
}

WaveField evolve_crank_nicolson(const WaveField& psi, const PotentialSet& pot,
                                const ParticleSpec& particle, Index steps, Direction direction) {
  particle.validate();
  if (steps < 0) throw InvalidSpec("step count must be nonnegative");
  const GridSpec& grid = psi.grid();
  if (grid.topology() == Topology::SpacetimeBox) {
    throw InvalidSpec("Crank-Nicolson runs on spatial grids; use the spectral Klein-Gordon solver");
  }
  const DiffusionConstant& alpha = psi.alpha();
  const Branch branch = psi.branch();
  if (!is_well_posed(alpha, branch, direction)) {
    const Direction good = direction == Direction::Forward ? Direction::Backward : Direction::Forward;
    throw NumericalGuard("branch " + to_string(branch) + " with Re(alpha) = " +
                         std::to_string(alpha.value().real()) + " is ill-posed " +
                         to_string(direction) + "; integrate it " + to_string(good));
  }
  const double dt = grid.time_step();
  const double signedDt = static_cast<double>(sign(direction)) * dt;
  const Complex a = alpha.value();
  const double s = static_cast<double>(sign(branch));

  auto check_stability = [&](double t) {
    const double umax = pot.scalar ? pot.scalar_on(grid, t).cwiseAbs().maxCoeff() : 0.0;
    if (dt * umax >= kStabilityLimit) {
      throw NumericalGuard("stability guard: dt * max|U| = " + std::to_string(dt * umax) +
                           " must stay below 0.5; reduce dt below " +
                           std::to_string(kStabilityLimit / umax));
    }
  };

  // dPsi/dt = L Psi with L = -(s / alpha) H.
  const Eigen::SparseMatrix<Complex> identity = [&] {
    Eigen::SparseMatrix<Complex> id(grid.size(), grid.size());
    id.setIdentity();
    return id;
  }();
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> solver;
  Eigen::SparseMatrix<Complex> rhs;
  auto assemble = [&](double tMid) {
    const Eigen::SparseMatrix<Complex> l =
        (-s / a) * diffusion_operator(grid, alpha, particle, pot, branch, tMid);
    const Eigen::SparseMatrix<Complex> lhs = identity - (0.5 * signedDt) * l;
    rhs = identity + (0.5 * signedDt) * l;
    solver.compute(lhs);
    if (solver.info() != Eigen::Success) throw NumericalGuard("Crank-Nicolson factorization failed");
  };

  const bool timeDependent = pot.timeDependent;
  double t = psi.time();
  check_stability(t);
  if (!timeDependent) assemble(t);
  Eigen::VectorXcd state = psi.amplitudes();
  for (Index k = 0; k < steps; ++k) {
    if (timeDependent) {
      check_stability(t + 0.5 * signedDt);
      assemble(t + 0.5 * signedDt);
    }
    const Eigen::VectorXcd next = solver.solve(rhs * state);
    state = next;
    t += signedDt;
    if (!state.allFinite()) throw NumericalGuard("Crank-Nicolson produced non-finite values");
  }
  WaveField out(grid, state, branch, t, alpha);
  out.provenance = psi.provenance;
  return out;
}

}  // namespace cdiff
