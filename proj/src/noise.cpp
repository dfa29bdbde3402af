#include "cdiff/noise.hpp"

#include <cmath>

namespace cdiff {

namespace {

ChannelCovariance make_covariance(const DiffusionConstant& alpha, double scale, int sign) {
  ChannelCovariance cov;
  cov.signatureSign = sign;
  cov.effectivePhase = sign > 0 ? alpha.phase() : alpha.phase() + std::numbers::pi;
  cov.magnitude = scale * alpha.magnitude();
  cov.gamma = scale * alpha.gamma();
  const double c = std::cos(cov.effectivePhase);
  const double s = std::sin(cov.effectivePhase);
  const double a = alpha.magnitude();
  const double g = alpha.gamma();
  cov.matrix << a * (1.0 + c) + g, a * s, a * s, a * (1.0 - c) + g;
  cov.matrix *= 0.5 * scale;
  return cov;
}

}  // namespace

ChannelCovariance build_channel_covariance(const DiffusionConstant& alpha,
                                           const ParticleSpec& particle) {
  if (!(particle.mass > 0.0)) {
    throw InvalidSpec("nonrelativistic channel needs mass > 0");
  }
  return make_covariance(alpha, 1.0 / particle.mass, 1);
}

ChannelCovariance build_channel_covariance(const DiffusionConstant& alpha, double epsilon,
                                           int signatureSign) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidSpec("relativistic channel needs epsilon > 0");
  }
  if (signatureSign != 1 && signatureSign != -1) {
    throw InvalidSpec("signature sign must be +1 or -1");
  }
  return make_covariance(alpha, epsilon, signatureSign);
}

RealizabilityCheck assert_realizable(const ChannelCovariance& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(cov.matrix, Eigen::EigenvaluesOnly);
  RealizabilityCheck check;
  check.eigenvalues = solver.eigenvalues();
  check.determinant = cov.matrix.determinant();
  check.realizable = check.eigenvalues.minCoeff() >= -kPsdTolerance;
  return check;
}

Eigen::Matrix2d noise_loading(const ChannelCovariance& cov) {
  Eigen::Matrix2d loading = Eigen::Matrix2d::Zero();
  if (cov.gamma == 0.0) {
    // Rank one: all variance along e^{i phi'/2}, eigenvalue = trace.
    const double root = std::sqrt(cov.matrix.trace());
    loading(0, 0) = root * std::cos(0.5 * cov.effectivePhase);
    loading(1, 0) = root * std::sin(0.5 * cov.effectivePhase);
    return loading;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(cov.matrix);
  const Eigen::Vector2d roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * roots.asDiagonal();
}

ComplexNoise::ComplexNoise(const ChannelCovariance& cov, std::uint64_t seed)
    : gaussians_(seed), loading_(noise_loading(cov)), rankOne_(cov.gamma == 0.0) {
  if (!assert_realizable(cov).realizable) {
    throw InvalidSpec("channel covariance is not positive semi-definite");
  }
}

IncrementBatch sample_increments(const ChannelCovariance& cov, double step, Index count,
                                 int channels, std::uint64_t seed,
                                 std::uint64_t counterOffset) {
  if (!(step > 0.0)) throw InvalidSpec("increment step must be positive");
  if (count < 1 || channels < 1) throw InvalidSpec("increment batch must be non-empty");
  const ComplexNoise noise(cov, seed);
  IncrementBatch batch;
  batch.step = step;
  batch.seed = seed;
  batch.counterOffset = counterOffset;
  batch.values.resize(count, channels);
  const double root = std::sqrt(step);
  for (Index k = 0; k < count; ++k) {
    for (int c = 0; c < channels; ++c) {
      batch.values(k, c) = noise.increment(0, counterOffset + static_cast<std::uint64_t>(k),
                                           static_cast<std::uint32_t>(c), root);
    }
  }
  return batch;
}

QuadraticVariationEstimate estimate_quadratic_variation(const IncrementBatch& batch) {
  const Index count = batch.values.rows();
  const Index n = batch.values.cols();
  if (count < 2 || n < 1) {
    throw InvalidSpec("quadratic variation needs at least two increments");
  }
  const double total = static_cast<double>(count) * batch.step;
  QuadraticVariationEstimate est;
  est.bracket.setZero(n, n);
  est.mixedBracket.setZero(n, n);
  est.conjBracket.setZero(n, n);
  est.bracketError.setZero(n, n);
  est.mixedError.setZero(n, n);
  est.conjError.setZero(n, n);

  auto error_of = [&](auto product) {
    // Sample standard deviation of the per-step rates, divided by sqrt(count).
    Complex mean = 0.0;
    for (Index k = 0; k < count; ++k) mean += product(k);
    mean /= static_cast<double>(count);
    double sre = 0.0;
    double sim = 0.0;
    for (Index k = 0; k < count; ++k) {
      const Complex d = product(k) - mean;
      sre += d.real() * d.real();
      sim += d.imag() * d.imag();
    }
    const double var = (sre + sim) / static_cast<double>(count - 1);
    return std::sqrt(var / static_cast<double>(count));
  };

  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      const auto x = batch.values.col(a);
      const auto y = batch.values.col(b);
      est.bracket(a, b) = x.cwiseProduct(y).sum() / total;
      est.mixedBracket(a, b) = x.cwiseProduct(y.conjugate()).sum() / total;
      est.conjBracket(a, b) = x.conjugate().cwiseProduct(y.conjugate()).sum() / total;
      est.bracketError(a, b) = error_of([&](Index k) { return x(k) * y(k) / batch.step; });
      est.mixedError(a, b) =
          error_of([&](Index k) { return x(k) * std::conj(y(k)) / batch.step; });
      est.conjError(a, b) =
          error_of([&](Index k) { return std::conj(x(k)) * std::conj(y(k)) / batch.step; });
    }
  }
  return est;
}

}  // namespace cdiff
