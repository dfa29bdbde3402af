#ifndef CDIFF_CRANK_NICOLSON_HPP
#define CDIFF_CRANK_NICOLSON_HPP

#include <Eigen/SparseCore>

#include "cdiff/grid.hpp"

namespace cdiff {

/// Sparse matrix of the spatial operator H = alpha^2/2m (d -/+ q A/alpha)^2 + U
/// for the branch of `psi`, with Dirichlet ghosts on bounded axes and periodic
/// wrap elsewhere.
Eigen::SparseMatrix<Complex> diffusion_operator(const GridSpec& grid, const DiffusionConstant& alpha,
                                                const ParticleSpec& particle,
                                                const PotentialSet& pot, Branch branch, double t);

/// Crank-Nicolson integration of -/+ alpha dPsi/dt = H Psi with the grid time
/// step. Backward runs decrease t. Throws NumericalGuard when the requested
/// direction is ill-posed for the branch or when dt max|U| >= 0.5.
WaveField evolve_crank_nicolson(const WaveField& psi, const PotentialSet& pot,
                                const ParticleSpec& particle, Index steps, Direction direction);

/// Direction in which the branch of `psi` is well posed; both when Re(alpha) = 0.
bool is_well_posed(const DiffusionConstant& alpha, Branch branch, Direction direction);

}  // namespace cdiff

#endif  // CDIFF_CRANK_NICOLSON_HPP
