#ifndef CDIFF_NOISE_HPP
#define CDIFF_NOISE_HPP

#include <cstdint>

#include "cdiff/core.hpp"
#include "cdiff/philox.hpp"

namespace cdiff {

/// Covariance per unit evolution parameter of (Re dM, Im dM) for one
/// coordinate channel of the complexified Wiener noise.
struct ChannelCovariance {
  Eigen::Matrix2d matrix = Eigen::Matrix2d::Zero();
  int signatureSign = 1;
  // Bookkeeping needed to sample the gamma = 0 case exactly on its hyperplane.
  double effectivePhase = 0.0;
  double magnitude = 0.0;  // |alpha| times the channel scale (1/m or epsilon)
  double gamma = 0.0;      // gamma times the channel scale

  /// Re-channel variance rate; the only part that moves the real position.
  double real_variance() const { return matrix(0, 0); }
};

/// Nonrelativistic channel: d[M, M] = (alpha / m) dt.
ChannelCovariance build_channel_covariance(const DiffusionConstant& alpha,
                                           const ParticleSpec& particle);

/// Relativistic channel: d[M^mu, M^mu] = alpha epsilon eta^{mu mu} d lambda.
/// signatureSign = -1 selects the Minkowski time channel, which is the spatial
/// channel of alpha e^{i pi}.
ChannelCovariance build_channel_covariance(const DiffusionConstant& alpha, double epsilon,
                                           int signatureSign);

struct RealizabilityCheck {
  Eigen::Vector2d eigenvalues;  // ascending
  double determinant = 0.0;
  bool realizable = false;
};

inline constexpr double kPsdTolerance = 1e-12;

RealizabilityCheck assert_realizable(const ChannelCovariance& cov);

/// 2x2 loading B with B B^T = cov. For gamma = 0 the second column is zero and
/// the first is parallel to (cos(phi'/2), sin(phi'/2)).
Eigen::Matrix2d noise_loading(const ChannelCovariance& cov);

/// Draws correlated (Re, Im) increments for a fixed channel covariance.
class ComplexNoise {
 public:
  ComplexNoise(const ChannelCovariance& cov, std::uint64_t seed);

  /// Increment over |dt| for the given counter address.
  Complex increment(std::uint64_t path, std::uint64_t step, std::uint32_t channel,
                    double sqrtDt) const {
    const auto [z0, z1] = gaussians_.normals(path, step, channel);
    if (rankOne_) {
      const double a = z0 * sqrtDt;
      return {loading_(0, 0) * a, loading_(1, 0) * a};
    }
    const double a = z0 * sqrtDt;
    const double b = z1 * sqrtDt;
    return {loading_(0, 0) * a + loading_(0, 1) * b, loading_(1, 0) * a + loading_(1, 1) * b};
  }

  const Eigen::Matrix2d& loading() const { return loading_; }

 private:
  GaussianField gaussians_;
  Eigen::Matrix2d loading_;
  bool rankOne_;
};

struct IncrementBatch {
  Eigen::MatrixXcd values;  // count x channels, entry = Re dM + i Im dM
  double step = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t counterOffset = 0;
};

IncrementBatch sample_increments(const ChannelCovariance& cov, double step, Index count,
                                 int channels, std::uint64_t seed,
                                 std::uint64_t counterOffset = 0);

/// Sums of increment products divided by the elapsed parameter T = count * step.
struct QuadraticVariationEstimate {
  Eigen::MatrixXcd bracket;       // sum dM (x) dM / T        -> alpha/m delta
  Eigen::MatrixXcd mixedBracket;  // sum dM (x) conj dM / T   -> (|alpha|+gamma)/m delta
  Eigen::MatrixXcd conjBracket;   // sum conj dM (x) conj dM  -> conj(alpha)/m delta
  // Normal-approximation standard errors (modulus over Re and Im parts).
  Eigen::MatrixXd bracketError;
  Eigen::MatrixXd mixedError;
  Eigen::MatrixXd conjError;
};

QuadraticVariationEstimate estimate_quadratic_variation(const IncrementBatch& batch);

}  // namespace cdiff

#endif  // CDIFF_NOISE_HPP
