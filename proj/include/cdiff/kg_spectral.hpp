#ifndef CDIFF_KG_SPECTRAL_HPP
#define CDIFF_KG_SPECTRAL_HPP

#include <optional>
#include <vector>

#include "cdiff/grid.hpp"

namespace cdiff {

/// |eta^{mu nu} p_mu p_nu + m^2| / |alpha|^2 for the plane wave
/// exp(-p_mu x^mu / alpha) with p_0 = -p0; zero on the mass shell.
double mass_shell_residual(double p0, const Eigen::VectorXd& p, double mass,
                           const DiffusionConstant& alpha);

/// Positive- and negative-frequency Fourier decomposition of Klein-Gordon data on
/// a periodic spatial box, at alpha = i:
///   Phi(x0, x) = sum_k [a_k e^{-i w_k x0} + b_k e^{+i w_k x0}] e^{i k.x},
///   w_k = sqrt(|k|^2 + m^2).
class KleinGordonModes {
 public:
  KleinGordonModes(GridSpec spatial, double mass, double epsilon, Eigen::VectorXcd positive,
                   Eigen::VectorXcd negative, double shellResidual);

  const GridSpec& spatial_grid() const { return grid_; }
  double mass() const { return mass_; }
  double epsilon() const { return epsilon_; }
  /// Largest mass-shell residual of the decomposition (reported, never projected).
  double shell_residual() const { return shellResidual_; }
  const Eigen::VectorXcd& positive() const { return positive_; }
  const Eigen::VectorXcd& negative() const { return negative_; }
  /// Wavevector and on-shell frequency of flat mode index j.
  Eigen::VectorXd wavevector(Index j) const;
  double frequency(Index j) const;

  /// Phi(x0, .) on the spatial grid.
  Eigen::VectorXcd field_at(double x0) const;
  /// d_mu Phi(x0, .) for mu = 0..n; column mu.
  Eigen::MatrixXcd gradient_at(double x0) const;
  /// exp(branchSign * epsilon m^2 lambda / (2 alpha)); Psi = factor * Phi.
  Complex affine_factor(double lambda, int branchSign) const;

 private:
  Eigen::VectorXcd synthesize(const Eigen::VectorXcd& spectrum) const;

  GridSpec grid_;
  double mass_;
  double epsilon_;
  Eigen::VectorXcd positive_;
  Eigen::VectorXcd negative_;
  double shellResidual_;
  std::vector<Eigen::VectorXd> wavevectors_;
};

/// Decomposes Phi(0, .) (and optionally d_0 Phi(0, .)) into on-shell modes.
/// Without a time derivative the data are taken to be positive-frequency.
/// Requires alpha = i, a periodic box, m >= 0 and epsilon > 0.
KleinGordonModes evolve_kg_spectral(const WaveField& phi, const ParticleSpec& particle,
                                    const DiffusionConstant& alpha, double epsilon,
                                    const std::optional<Eigen::VectorXcd>& timeDerivative = {});

/// Unnormalized forward / inverse multidimensional DFT over the axes of `grid`.
Eigen::VectorXcd fft_nd(const GridSpec& grid, const Eigen::VectorXcd& values, bool inverse);

}  // namespace cdiff

#endif  // CDIFF_KG_SPECTRAL_HPP
