#include "cdiff/moments.hpp"

#include <cmath>

namespace cdiff {

namespace {

Complex at(const GridSpec& grid, const Eigen::VectorXcd& f, Index i, int axis, Index offset) {
  const Index j = grid.neighbour(i, axis, offset);
  return j < 0 ? Complex(0.0) : f(j);
}

}  // namespace

Eigen::VectorXcd derivative4(const GridSpec& grid, const Eigen::VectorXcd& f, int axis) {
  const double h = grid.axis(axis).spacing();
  Eigen::VectorXcd out(f.size());
  for (Index i = 0; i < grid.size(); ++i) {
    out(i) = (-at(grid, f, i, axis, 2) + 8.0 * at(grid, f, i, axis, 1) -
              8.0 * at(grid, f, i, axis, -1) + at(grid, f, i, axis, -2)) /
             (12.0 * h);
  }
  return out;
}

Eigen::VectorXcd second_derivative4(const GridSpec& grid, const Eigen::VectorXcd& f, int axis) {
  const double h = grid.axis(axis).spacing();
  Eigen::VectorXcd out(f.size());
  for (Index i = 0; i < grid.size(); ++i) {
    out(i) = (-at(grid, f, i, axis, 2) + 16.0 * at(grid, f, i, axis, 1) - 30.0 * f(i) +
              16.0 * at(grid, f, i, axis, -1) - at(grid, f, i, axis, -2)) /
             (12.0 * h * h);
  }
  return out;
}

OperatorMoments operator_moments(const WaveField& psi) {
  const GridSpec& grid = psi.grid();
  const Eigen::VectorXcd& f = psi.amplitudes();
  const double norm = f.squaredNorm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InvalidSpec("wave field is not normalizable");
  }
  const Complex a = psi.alpha().value();
  Eigen::VectorXd x(grid.size());
  for (Index i = 0; i < grid.size(); ++i) x(i) = grid.coordinate(i, 0);

  const Eigen::VectorXcd pPsi = -a * derivative4(grid, f, 0);
  const Eigen::VectorXcd p2Psi = a * a * second_derivative4(grid, f, 0);
  const Eigen::VectorXcd xPsi = x.cast<Complex>().cwiseProduct(f);
  const Eigen::VectorXcd pxPsi = -a * derivative4(grid, xPsi, 0);
  auto expect = [&](const Eigen::VectorXcd& g) { return f.dot(g) / norm; };  // conj(f).g

  OperatorMoments m;
  m.x = f.cwiseAbs2().dot(x) / norm;
  m.x2 = f.cwiseAbs2().dot(x.cwiseAbs2()) / norm;
  m.p = expect(pPsi);
  m.p2 = expect(p2Psi);
  m.xpSymmetric = 0.5 * (expect(x.cast<Complex>().cwiseProduct(pPsi)) + expect(pxPsi));
  m.varX = m.x2 - m.x * m.x;
  m.varP = m.p2 - m.p * m.p;
  return m;
}

}  // namespace cdiff
