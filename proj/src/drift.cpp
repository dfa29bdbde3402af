#include "cdiff/drift.hpp"

#include <cmath>
#include <limits>

namespace cdiff {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLogFloor = 1e-300;

// Principal phase increment from node i to its neighbour; invariant under a
// global sign flip of Psi because the product is unchanged.
double phase_step(const Eigen::VectorXcd& psi, Index from, Index to) {
  return std::arg(psi(to) * std::conj(psi(from)));
}

}  // namespace

Eigen::MatrixXcd log_gradient(const GridSpec& grid, const Eigen::VectorXcd& psi) {
  const Index size = grid.size();
  Eigen::VectorXd logMod(size);
  for (Index i = 0; i < size; ++i) {
    const double r = std::abs(psi(i));
    if (r == 0.0) {
      for (int a = 0; a < grid.dimension(); ++a) {
        for (Index off : {Index{-1}, Index{1}}) {
          const Index j = grid.neighbour(i, a, off);
          if (j >= 0 && psi(j) == Complex(0.0)) {
            throw InvalidSpec("wave function vanishes identically on a region");
          }
        }
      }
    }
    logMod(i) = std::log(std::max(r, kLogFloor));
  }
  Eigen::MatrixXcd out(size, grid.dimension());
  for (int a = 0; a < grid.dimension(); ++a) {
    const Eigen::VectorXd re = central_difference<double>(grid, logMod, a);
    const double h = grid.axis(a).spacing();
    for (Index i = 0; i < size; ++i) {
      const Index up = grid.neighbour(i, a, 1);
      const Index down = grid.neighbour(i, a, -1);
      double im = 0.0;
      if (up >= 0 && down >= 0) {
        im = (phase_step(psi, down, i) + phase_step(psi, i, up)) / (2.0 * h);
      } else if (down < 0) {
        const Index up2 = grid.neighbour(i, a, 2);
        im = (3.0 * phase_step(psi, i, up) - phase_step(psi, up, up2)) / (2.0 * h);
      } else {
        const Index down2 = grid.neighbour(i, a, -2);
        im = (3.0 * phase_step(psi, down, i) - phase_step(psi, down2, down)) / (2.0 * h);
      }
      out(i, a) = Complex(re(i), im);
    }
  }
  return out;
}

DriftField drift_from_wave(const WaveField& psi, const PotentialSet& pot,
                           const ParticleSpec& particle, Pairing pairing) {
  particle.validate();
  const GridSpec& grid = psi.grid();
  const Complex a = psi.alpha().value();
  const double s = static_cast<double>(sign(psi.branch()));
  const Eigen::MatrixXcd grad = log_gradient(grid, psi.amplitudes());
  Eigen::MatrixXcd gauge = Eigen::MatrixXcd::Zero(grid.size(), grid.dimension());
  if (pot.has_vector()) gauge = (pot.charge * pot.vector_on(grid, psi.time())).cast<Complex>();

  const Eigen::MatrixXcd own = (s * a * grad - gauge) / particle.mass;
  Eigen::MatrixXcd partner;
  if (pairing == Pairing::SharedAction) {
    partner = own;
  } else {
    partner = (-s * a * grad.conjugate() - gauge) / particle.mass;
  }
  DriftField field{grid, {}, {}, a / particle.mass, psi.alpha(), psi.time()};
  if (psi.branch() == Branch::Plus) {
    field.wPlus = own;
    field.wMinus = partner;
  } else {
    field.wPlus = partner;
    field.wMinus = own;
  }
  return field;
}

HyperplaneDecomposition decompose_and_check_hyperplane(const DriftField& drift,
                                                       const DiffusionConstant& alpha) {
  const double phi = alpha.phase();
  if (std::abs(std::abs(phi) - kPi) < 1e-12) {
    throw InvalidSpec("hyperplane reconstruction is singular at phi = +/- pi");
  }
  const double c = std::cos(0.5 * phi);
  const double sn = std::sin(0.5 * phi);
  HyperplaneDecomposition out;
  out.vPlus = drift.v_plus();
  out.vMinus = drift.v_minus();
  out.uCirc = 0.5 * (drift.u_plus() + drift.u_minus());
  const Eigen::MatrixXd half = 0.5 * (out.vPlus - out.vMinus) * std::tan(0.5 * phi);
  out.uPlus = out.uCirc + half;
  out.uMinus = out.uCirc - half;
  const Eigen::MatrixXd violation =
      (drift.u_plus() - drift.u_minus()) * c - (out.vPlus - out.vMinus) * sn;
  out.residual = violation.size() ? violation.cwiseAbs().maxCoeff() : 0.0;
  return out;
}

Eigen::MatrixXcd hamilton_jacobi_residual(const DriftField& drift, const PotentialSet& pot,
                                          const ParticleSpec& particle, Branch branch,
                                          const TimeDerivative& dt) {
  particle.validate();
  const GridSpec& grid = drift.grid;
  const int n = grid.dimension();
  const double m = particle.mass;
  const double s = static_cast<double>(sign(branch));
  const Complex a = drift.alpha.value();
  const Eigen::MatrixXcd& w = branch == Branch::Plus ? drift.wPlus : drift.wMinus;
  const double t = drift.time;

  Eigen::MatrixXcd dwdt = Eigen::MatrixXcd::Zero(grid.size(), n);
  if (!dt.stationary) {
    if (!dt.earlier || !dt.later || !(dt.tau > 0.0)) {
      throw InvalidSpec("time-dependent drift needs slices at t - tau and t + tau");
    }
    dwdt = (*dt.later - *dt.earlier) / (2.0 * dt.tau);
  }

  std::vector<Eigen::MatrixXcd> dw;  // dw[j](:, i) = d_j w_i
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXcd g(grid.size(), n);
    for (int i = 0; i < n; ++i) g.col(i) = central_difference<Complex>(grid, w.col(i), j);
    dw.push_back(std::move(g));
  }

  const Eigen::VectorXd u = pot.scalar_on(grid, t);
  Eigen::MatrixXcd res(grid.size(), n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXcd col = dwdt.col(i) + s * a / (2.0 * m) * laplacian<Complex>(grid, w.col(i));
    for (int j = 0; j < n; ++j) col += w.col(j).cwiseProduct(dw[static_cast<std::size_t>(j)].col(i));
    col *= m;
    col += central_difference<double>(grid, u, i).cast<Complex>();
    res.col(i) = col;
  }

  if (pot.has_vector()) {
    const double q = pot.charge;
    const Eigen::MatrixXd f = field_strength(grid, pot, t);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Eigen::VectorXd fij = f.col(i * n + j);
        res.col(i) -= q * w.col(j).cwiseProduct(fij.cast<Complex>());
        res.col(i) -= s * a * q / (2.0 * m) *
                      central_difference<double>(grid, fij, j).cast<Complex>();
      }
    }
    if (pot.timeDependent) {
      const double tau = 1e-5;
      const Eigen::MatrixXd dadt = (pot.vector_on(grid, t + tau) - pot.vector_on(grid, t - tau)) /
                                   (2.0 * tau);
      res += (q * dadt).cast<Complex>();
    }
  }

  const auto mask = interior_mask(grid, 2);
  for (Index k = 0; k < grid.size(); ++k) {
    if (!mask[static_cast<std::size_t>(k)]) res.row(k).setZero();
  }
  return res;
}

double hamilton_jacobi_norm(const Eigen::MatrixXcd& residual) {
  return residual.size() ? residual.cwiseAbs().maxCoeff() : 0.0;
}

WindingResult winding_number(const WaveField& psi) {
  const GridSpec& grid = psi.grid();
  if (grid.topology() != Topology::Ring) throw InvalidSpec("winding number needs a ring grid");
  const Eigen::VectorXcd& f = psi.amplitudes();
  const double peak = f.cwiseAbs().maxCoeff();
  if (f.cwiseAbs().minCoeff() <= 1e-10 * peak) {
    throw NumericalGuard("wave function has a node on the loop; winding is undefined");
  }
  double total = 0.0;
  for (Index i = 0; i < grid.size(); ++i) {
    const double step = phase_step(f, i, grid.neighbour(i, 0, 1));
    if (std::abs(step) > 0.9 * kPi) {
      throw NumericalGuard("phase is under-resolved on the ring; refine the grid");
    }
    total += step;
  }
  WindingResult result;
  result.raw = total / (2.0 * kPi);
  const double nearest = std::round(result.raw);
  if (std::abs(result.raw - nearest) > 1e-6) {
    throw NumericalGuard("loop phase is not an integer multiple of 2 pi");
  }
  result.winding = static_cast<int>(nearest);
  result.loopIntegral = Complex(0.0, 2.0 * kPi * result.winding) * psi.alpha().value();
  return result;
}

std::string to_string(DriftMode mode) {
  return mode == DriftMode::Literal ? "literal" : "density-consistent";
}

DriftMode drift_mode_from_string(const std::string& name) {
  if (name == "literal") return DriftMode::Literal;
  if (name == "density-consistent") return DriftMode::DensityConsistent;
  throw InvalidSpec("unknown drift mode '" + name + "'");
}

double real_channel_variance(const DiffusionConstant& alpha, const ParticleSpec& particle) {
  return alpha.magnitude() * (1.0 + std::cos(alpha.phase())) / (2.0 * particle.mass);
}

Eigen::MatrixXd generative_drift(const DriftField& drift, const DensityField& density,
                                 double sigma2, Direction direction, DriftMode mode,
                                 const GenerativeDriftOptions& options) {
  const GridSpec& grid = drift.grid;
  Eigen::MatrixXd b;
  if (mode == DriftMode::Literal) {
    b = direction == Direction::Forward ? drift.v_plus() : drift.v_minus();
  } else {
    if (!(sigma2 > 0.0)) throw InvalidSpec("diffusion coefficient sigma^2 must be positive");
    if (!(density.grid() == grid)) throw InvalidSpec("density and drift grids differ");
    const Eigen::VectorXd& rho = density.values();
    const double floor = options.densityFloor * rho.maxCoeff();
    const Eigen::VectorXd logRho = rho.cwiseMax(floor).array().log().matrix();
    const Eigen::MatrixXd vCirc = drift.w_circ().real();
    const double s = static_cast<double>(sign(direction));
    b.resize(grid.size(), grid.dimension());
    for (int a = 0; a < grid.dimension(); ++a) {
      b.col(a) = vCirc.col(a) + s * 0.5 * sigma2 * central_difference<double>(grid, logRho, a);
    }
  }
  if (!b.allFinite()) throw NumericalGuard("generative drift is not finite");
  if (options.wMax > 0.0) b = b.cwiseMax(-options.wMax).cwiseMin(options.wMax);
  return b;
}

double default_drift_clip(const GridSpec& grid, double totalTime) {
  if (!(totalTime > 0.0)) throw InvalidSpec("total time must be positive");
  double length = 0.0;
  for (const auto& ax : grid.axes()) length = std::max(length, ax.length());
  return 1e3 * length / totalTime;
}

}  // namespace cdiff
