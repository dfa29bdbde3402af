#ifndef CDIFF_DRIFT_HPP
#define CDIFF_DRIFT_HPP

#include <optional>

#include "cdiff/grid.hpp"

namespace cdiff {

/// How the partner of the given wave function is formed.
///  - Conjugate: Psi_other = conj(Psi). This is the time-reversed partner for
///    imaginary alpha and for real stationary states; w_circ is then the real
///    current velocity.
///  - SharedAction: S_+ = S_-, so w_- = w_+.
enum class Pairing { Conjugate, SharedAction };

/// Complex velocity fields on a grid; columns are coordinate components.
struct DriftField {
  GridSpec grid;
  Eigen::MatrixXcd wPlus;
  Eigen::MatrixXcd wMinus;
  Complex v2;  // second-order velocity alpha/m (or alpha epsilon)
  DiffusionConstant alpha;
  double time = 0.0;

  Eigen::MatrixXd v_plus() const { return wPlus.real(); }
  Eigen::MatrixXd v_minus() const { return wMinus.real(); }
  Eigen::MatrixXd u_plus() const { return wPlus.imag(); }
  Eigen::MatrixXd u_minus() const { return wMinus.imag(); }
  Eigen::MatrixXcd w_circ() const { return 0.5 * (wPlus + wMinus); }
};

/// d ln Psi along every axis: Re from central differences of ln|Psi|, Im from
/// Im(dPsi / Psi). Nodes (|Psi| below 1e-6 of its maximum) are assigned the
/// nearest regular value.
Eigen::MatrixXcd log_gradient(const GridSpec& grid, const Eigen::VectorXcd& psi);

/// w_b = (1/m)(b alpha d ln Psi_b - q A) for the branch b of `psi`, and the
/// partner branch according to `pairing`.
DriftField drift_from_wave(const WaveField& psi, const PotentialSet& pot,
                           const ParticleSpec& particle, Pairing pairing = Pairing::Conjugate);

struct HyperplaneDecomposition {
  Eigen::MatrixXd vPlus;
  Eigen::MatrixXd vMinus;
  Eigen::MatrixXd uCirc;
  Eigen::MatrixXd uPlus;   // reconstructed u_circ + (v_+ - v_-) tan(phi/2) / 2
  Eigen::MatrixXd uMinus;  // reconstructed u_circ - (v_+ - v_-) tan(phi/2) / 2
  double residual = 0.0;   // max |(u_+ - u_-) cos(phi/2) - (v_+ - v_-) sin(phi/2)|
};

/// Throws InvalidSpec at phi = +/- pi where tan(phi/2) is singular.
HyperplaneDecomposition decompose_and_check_hyperplane(const DriftField& drift,
                                                       const DiffusionConstant& alpha);

/// Source of d w / dt for the Hamilton-Jacobi residual.
struct TimeDerivative {
  bool stationary = false;
  std::optional<Eigen::MatrixXcd> earlier;  // w at t - tau
  std::optional<Eigen::MatrixXcd> later;    // w at t + tau
  double tau = 0.0;

  static TimeDerivative stationary_field() { return {true, {}, {}, 0.0}; }
  static TimeDerivative from_slices(Eigen::MatrixXcd earlier, Eigen::MatrixXcd later, double tau) {
    return {false, std::move(earlier), std::move(later), tau};
  }
};

/// Residual of
///   m (dw/dt + (w.grad) w +/- (alpha/2m) lap w) - q w_j F_ij
///     -/+ (alpha q / 2m) d_j F_ij + q dA/dt + grad U = 0
/// for the branch `branch` of `drift`, on every node (rows) and component
/// (columns). Nodes next to bounded edges are zeroed.
Eigen::MatrixXcd hamilton_jacobi_residual(const DriftField& drift, const PotentialSet& pot,
                                          const ParticleSpec& particle, Branch branch,
                                          const TimeDerivative& dt);

/// Max-norm of the residual above.
double hamilton_jacobi_norm(const Eigen::MatrixXcd& residual);

struct WindingResult {
  int winding = 0;
  double raw = 0.0;        // (1 / 2 pi) sum of principal phase increments
  Complex loopIntegral;    // closed-loop integral of alpha d ln Psi = 2 pi i alpha k
};

/// Phase winding of Psi around a ring. Throws NumericalGuard if |Psi| has a
/// node on the loop or the total is not within 1e-6 of an integer.
WindingResult winding_number(const WaveField& psi);

enum class DriftMode { Literal, DensityConsistent };

std::string to_string(DriftMode mode);
DriftMode drift_mode_from_string(const std::string& name);

/// Re-channel variance rate |alpha| (1 + cos phi) / 2m.
double real_channel_variance(const DiffusionConstant& alpha, const ParticleSpec& particle);

struct GenerativeDriftOptions {
  double densityFloor = 1e-12;  // relative to max rho
  double wMax = 0.0;            // |b| clip; <= 0 disables
};

/// b_+ = v_circ + (sigma2/2) d ln rho, b_- = v_circ - (sigma2/2) d ln rho for
/// DensityConsistent; Re w_+ / Re w_- for Literal. Returns size x n.
Eigen::MatrixXd generative_drift(const DriftField& drift, const DensityField& density,
                                 double sigma2, Direction direction, DriftMode mode,
                                 const GenerativeDriftOptions& options = {});

/// wMax = 1e3 * domain length / total time.
double default_drift_clip(const GridSpec& grid, double totalTime);

}  // namespace cdiff

#endif  // CDIFF_DRIFT_HPP
