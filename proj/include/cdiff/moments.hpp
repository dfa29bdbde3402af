#ifndef CDIFF_MOMENTS_HPP
#define CDIFF_MOMENTS_HPP

#include "cdiff/grid.hpp"

namespace cdiff {

/// Expectations E[O] = <Psi, O Psi> / <Psi, Psi> along axis 0 with the
/// momentum operator P = -alpha d/dx (fourth-order central stencils).
struct OperatorMoments {
  double x = 0.0;
  double x2 = 0.0;
  Complex p;
  Complex p2;
  Complex xpSymmetric;  // E[(XP + PX) / 2]
  double varX = 0.0;
  Complex varP;  // E[P^2] - E[P]^2; real and positive for imaginary alpha
};

OperatorMoments operator_moments(const WaveField& psi);

/// Fourth-order first and second derivatives along an axis. Bounded axes treat
/// the field as zero outside the grid; periodic axes wrap.
Eigen::VectorXcd derivative4(const GridSpec& grid, const Eigen::VectorXcd& f, int axis);
Eigen::VectorXcd second_derivative4(const GridSpec& grid, const Eigen::VectorXcd& f, int axis);

}  // namespace cdiff

#endif  // CDIFF_MOMENTS_HPP
