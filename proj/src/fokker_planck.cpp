#include "cdiff/fokker_planck.hpp"

#include <cmath>
#include <sstream>

namespace cdiff {

namespace {

// Bernoulli function B(w) = w / (e^w - 1).
double bernoulli(double w) {
  if (std::abs(w) < 1e-8) return 1.0 - 0.5 * w;
  return w / std::expm1(w);
}

void check_grid(const GridSpec& grid) {
  if (grid.dimension() != 1) throw InvalidSpec("the Fokker-Planck oracle is one-dimensional");
}

// Interface positions: i + 1/2 sits half a cell above node i.
double interface_position(const GridSpec& grid, Index i) {
  return grid.coordinate(i, 0) + 0.5 * grid.axis(0).spacing();
}

}  // namespace

double fokker_planck_max_step(const GridSpec& grid, const ScalarDrift& drift, double sigma2,
                              double t) {
  check_grid(grid);
  const double h = grid.axis(0).spacing();
  const double diff = 0.5 * sigma2;
  double limit = h * h / (2.0 * sigma2);
  // Positivity of the explicit update: dt * (outflow rate of a cell) <= 1.
  const Index n = grid.size();
  const bool periodic = grid.axis(0).periodic;
  for (Index i = 0; i < n; ++i) {
    double out = 0.0;
    if (periodic || i + 1 < n) {
      out += diff / (h * h) * bernoulli(-drift(interface_position(grid, i), t) * h / diff);
    }
    if (periodic || i > 0) {
      const double xl = interface_position(grid, i) - h;
      out += diff / (h * h) * bernoulli(drift(xl, t) * h / diff);
    }
    if (out > 0.0) limit = std::min(limit, 1.0 / out);
  }
  return limit;
}

DensityField evolve_fokker_planck(const DensityField& rho0, const ScalarDrift& drift,
                                  double sigma2, double dt, Index steps,
                                  const FokkerPlanckOptions& options) {
  const GridSpec& grid = rho0.grid();
  check_grid(grid);
  if (!(sigma2 > 0.0)) throw InvalidSpec("sigma^2 must be positive");
  if (!(dt > 0.0) || steps < 0) throw InvalidSpec("need dt > 0 and steps >= 0");
  const double h = grid.axis(0).spacing();
  const double diff = 0.5 * sigma2;
  const bool periodic = grid.axis(0).periodic;
  const Index n = grid.size();

  Eigen::VectorXd rho = rho0.values();
  Eigen::VectorXd flux(n);  // flux(i) through interface i + 1/2
  double t = options.startTime;
  for (Index k = 0; k < steps; ++k) {
    const double limit = fokker_planck_max_step(grid, drift, sigma2, t);
    if (dt > limit) {
      std::ostringstream os;
      os << "Fokker-Planck step guard: dt = " << dt << " exceeds the stable limit; use dt <= "
         << limit;
      throw NumericalGuard(os.str());
    }
    for (Index i = 0; i < n; ++i) {
      if (!periodic && i + 1 == n) {
        flux(i) = 0.0;
        continue;
      }
      const Index right = (i + 1) % n;
      const double w = drift(interface_position(grid, i), t) * h / diff;
      if (!std::isfinite(w)) throw NumericalGuard("Fokker-Planck drift is not finite");
      flux(i) = diff / h * (bernoulli(-w) * rho(i) - bernoulli(w) * rho(right));
    }
    const double before = rho.sum();
    for (Index i = 0; i < n; ++i) {
      const double left = i > 0 ? flux(i - 1) : (periodic ? flux(n - 1) : 0.0);
      rho(i) -= dt / h * (flux(i) - left);
    }
    if (rho.minCoeff() < 0.0) {
      rho = rho.cwiseMax(0.0);
      const double after = rho.sum();
      if (std::abs(after - before) > options.clipTolerance * before) {
        throw NumericalGuard("Fokker-Planck clipping changed the mass by more than tolerance");
      }
      rho *= before / after;
    }
    t += dt;
  }
  return {grid, rho, rho0.convention()};
}

Eigen::VectorXd evolve_backward_kolmogorov(const GridSpec& grid, const Eigen::VectorXd& f0,
                                           const ScalarDrift& drift, double sigma2, double dt,
                                           Index steps) {
  check_grid(grid);
  if (!(sigma2 > 0.0)) throw InvalidSpec("sigma^2 must be positive");
  const double h = grid.axis(0).spacing();
  if (dt > h * h / (2.0 * sigma2)) {
    std::ostringstream os;
    os << "backward Kolmogorov step guard: use dt <= " << h * h / (2.0 * sigma2);
    throw NumericalGuard(os.str());
  }
  const Index n = grid.size();
  const bool periodic = grid.axis(0).periodic;
  Eigen::VectorXd b(n);
  for (Index i = 0; i < n; ++i) b(i) = drift(grid.coordinate(i, 0), 0.0);
  Eigen::VectorXd f = f0;
  Eigen::VectorXd next(n);
  for (Index k = 0; k < steps; ++k) {
    for (Index i = 0; i < n; ++i) {
      // Ghost values mirror the edge node (zero gradient).
      const double left = i > 0 ? f(i - 1) : (periodic ? f(n - 1) : f(i));
      const double right = i + 1 < n ? f(i + 1) : (periodic ? f(0) : f(i));
      next(i) = f(i) + dt * (b(i) * (right - left) / (2.0 * h) +
                             0.5 * sigma2 * (right - 2.0 * f(i) + left) / (h * h));
    }
    f.swap(next);
  }
  return f;
}

}  // namespace cdiff
