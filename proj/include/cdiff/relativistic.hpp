#ifndef CDIFF_RELATIVISTIC_HPP
#define CDIFF_RELATIVISTIC_HPP

#include <string>
#include <vector>

#include "cdiff/kg_spectral.hpp"
#include "cdiff/sampler.hpp"

namespace cdiff {

struct RelativisticSpec {
  double mass = 1.0;
  int massSquaredSign = 1;  // +1, 0 or -1
  double epsilon = 1.0;
  double affineStep = 0.01;
  bool sampleable = true;   // false for the tachyonic branch
  std::string affineParameter;
};

/// epsilon = 1/m (proper time) for m^2 > 0, 1 (normalized momentum) for
/// m^2 = 0 and 1/|m| (proper length, not sampled) for m^2 < 0.
RelativisticSpec fix_epsilon_gauge(const ParticleSpec& particle, int massSquaredSign,
                                   double affineStep = 0.01);

/// Time channel (signature -1) followed by n spatial channels.
std::vector<ChannelCovariance> relativistic_channels(const DiffusionConstant& alpha,
                                                     const RelativisticSpec& spec, int spatialDim);

/// d_mu ln Phi tabulated on x0 slices of the spectral solution and interpolated
/// multilinearly in (x0, x). The dominant plane-wave carrier is removed before
/// tabulation and added back analytically, so only the envelope is
/// interpolated.
class SpacetimeDriftTable {
 public:
  SpacetimeDriftTable(const KleinGordonModes& modes, double x0Lower, double x0Upper,
                      Index slices);

  int dimension() const { return n_ + 1; }
  /// d_mu ln Phi at the spacetime point x = (x0, x1, ..).
  void log_gradient(const Point& x, Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, 4, 1>& out) const;
  /// epsilon eta^{mu nu} d_nu theta with theta = arg Phi (alpha = i).
  Point current_velocity(const Point& x) const;
  /// d_mu ln |Phi|^2.
  Point density_gradient(const Point& x) const;
  double epsilon() const { return epsilon_; }

 private:
  GridSpec spatial_;
  double x0Lower_;
  double dx0_;
  Index slices_;
  int n_;
  double epsilon_;
  Eigen::VectorXd carrier_;  // d_mu ln Phi of the carrier divided by i
  std::vector<Eigen::MatrixXcd> table_;
};

/// Real sampler drift built from the table: Re w_circ (+/- sigma2/2 grad ln|Phi|^2
/// when density-consistent). The table is captured by reference.
DriftFunction relativistic_drift(const SpacetimeDriftTable& table, double sigma2, DriftMode mode,
                                 Direction direction);

}  // namespace cdiff

#endif  // CDIFF_RELATIVISTIC_HPP
