#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cdiff/noise.hpp"

using namespace cdiff;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("philox matches the Random123 known-answer vectors") {
  using P = Philox4x32;
  CHECK(P::generate({0, 0, 0, 0}, {0, 0}) ==
        P::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(P::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                    {0xffffffffu, 0xffffffffu}) ==
        P::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(P::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                    {0xa4093822u, 0x299f31d0u}) ==
        P::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("gaussian field is a pure function of its address") {
  const GaussianField g(42);
  CHECK(g.normals(3, 7, 1) == g.normals(3, 7, 1));
  CHECK(g.normals(3, 7, 1) != g.normals(3, 7, 2));
  CHECK(g.normals(3, 7, 1) != g.normals(4, 7, 1));
  CHECK(g.normals(3, 7, 1) != GaussianField(43).normals(3, 7, 1));
  const double u = g.uniform(0, 0, 0);
  CHECK(u > 0.0);
  CHECK(u < 1.0);
}

TEST_CASE("channel covariance examples") {
  const ParticleSpec unit{1.0, 0.0, 1};
  SUBCASE("quantum, spatial channel") {
    const auto cov = build_channel_covariance(DiffusionConstant::quantum(), unit);
    Eigen::Matrix2d expected;
    expected << 0.5, 0.5, 0.5, 0.5;
    CHECK((cov.matrix - expected).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("Brownian, m = 2") {
    const auto cov = build_channel_covariance(DiffusionConstant::brownian(), ParticleSpec{2.0, 0, 1});
    Eigen::Matrix2d expected;
    expected << 0.5, 0.0, 0.0, 0.0;
    CHECK((cov.matrix - expected).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("quantum, Minkowski time channel") {
    const auto cov = build_channel_covariance(DiffusionConstant::quantum(), 1.0, -1);
    Eigen::Matrix2d expected;
    expected << 0.5, -0.5, -0.5, 0.5;
    CHECK((cov.matrix - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(cov.signatureSign == -1);
  }
  SUBCASE("time channel equals the spatial channel of alpha e^{i pi}") {
    for (double phi : {0.0, 0.3, kPi / 2, -2.0}) {
      const DiffusionConstant a(1.3, phi);
      const DiffusionConstant shifted(1.3, phi + kPi);
      const auto time = build_channel_covariance(a, 0.7, -1);
      const auto space = build_channel_covariance(shifted, 0.7, 1);
      CHECK((time.matrix - space.matrix).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
  SUBCASE("invalid parameters") {
    CHECK_THROWS_AS(build_channel_covariance(DiffusionConstant::quantum(), ParticleSpec{0.0, 0, 1}),
                    InvalidSpec);
    CHECK_THROWS_AS(build_channel_covariance(DiffusionConstant::quantum(), -1.0, 1), InvalidSpec);
    CHECK_THROWS_AS(DiffusionConstant(1.0, 0.0, -0.1), InvalidSpec);
    CHECK_THROWS_AS(DiffusionConstant(0.0, 0.0), InvalidSpec);
  }
}

TEST_CASE("realizability") {
  const ParticleSpec unit{1.0, 0.0, 1};
  const auto check = assert_realizable(build_channel_covariance(DiffusionConstant::quantum(), unit));
  CHECK(check.realizable);
  CHECK(check.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(check.eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-14));
  for (double phi : {0.0, kPi / 4, kPi / 2, kPi}) {
    const auto cov = build_channel_covariance(DiffusionConstant(1.0, phi), unit);
    CHECK(std::abs(cov.matrix.determinant()) < 1e-15);
  }
  for (int k = 0; k < 100; ++k) {
    const double phi = -kPi + 2.0 * kPi * (k + 1) / 100.0;
    for (double gamma : {0.0, 0.5}) {
      const auto c = assert_realizable(build_channel_covariance(DiffusionConstant(1.0, phi, gamma), unit));
      CHECK(c.realizable);
      CHECK(c.eigenvalues.minCoeff() >= -kPsdTolerance);
    }
  }
}

TEST_CASE("hyperplane increments are exact for gamma = 0") {
  const ParticleSpec unit{1.0, 0.0, 1};
  const auto cov = build_channel_covariance(DiffusionConstant::quantum(), unit);
  const auto batch = sample_increments(cov, 1e-3, 2000, 2, 7);
  for (Index k = 0; k < batch.values.rows(); ++k) {
    for (Index c = 0; c < 2; ++c) {
      const Complex v = batch.values(k, c);
      CHECK(std::abs(v.imag() - v.real()) <= 1e-15 * std::abs(v.real()) + 1e-300);
    }
  }
  const auto brown = sample_increments(build_channel_covariance(DiffusionConstant::brownian(), unit),
                                       1e-3, 100, 1, 7);
  CHECK(brown.values.imag().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("batches are bit-identical for the same seed and offset") {
  const auto cov = build_channel_covariance(DiffusionConstant(1.0, 0.4, 0.2), ParticleSpec{});
  const auto a = sample_increments(cov, 0.01, 500, 3, 99, 11);
  const auto b = sample_increments(cov, 0.01, 500, 3, 99, 11);
  CHECK(a.values == b.values);
  const auto shifted = sample_increments(cov, 0.01, 499, 3, 99, 12);
  CHECK(shifted.values.topRows(499) == a.values.bottomRows(499));
}

TEST_CASE("sample covariance matches the channel matrix") {
  const auto cov = build_channel_covariance(DiffusionConstant(1.0, 0.7, 0.3), ParticleSpec{});
  const double dt = 1e-3;
  const Index n = 200000;
  const auto batch = sample_increments(cov, dt, n, 1, 5);
  Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
  for (Index k = 0; k < n; ++k) {
    const Eigen::Vector2d v(batch.values(k, 0).real(), batch.values(k, 0).imag());
    s += v * v.transpose();
  }
  s /= static_cast<double>(n);
  const Eigen::Matrix2d target = cov.matrix * dt;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      // Var of a product of zero-mean Gaussians: S_ii S_jj + S_ij^2.
      const double se = std::sqrt((target(i, i) * target(j, j) + target(i, j) * target(i, j)) / n);
      CHECK(std::abs(s(i, j) - target(i, j)) < 4.0 * se);
    }
  }
}

TEST_CASE("quadratic variation estimators") {
  const ParticleSpec unit{1.0, 0.0, 1};
  const auto quantum = build_channel_covariance(DiffusionConstant::quantum(), unit);
  const auto batch = sample_increments(quantum, 1e-3, 100000, 1, 3);
  const auto est = estimate_quadratic_variation(batch);
  CHECK(std::abs(est.bracket(0, 0) - Complex(0.0, 1.0)) < 5.0 * est.bracketError(0, 0));
  CHECK(std::abs(est.mixedBracket(0, 0) - 1.0) < 5.0 * est.mixedError(0, 0));
  CHECK(std::abs(est.conjBracket(0, 0) - Complex(0.0, -1.0)) < 5.0 * est.conjError(0, 0));

  const auto brown = sample_increments(build_channel_covariance(DiffusionConstant::brownian(), unit),
                                       1e-3, 1000, 1, 3);
  CHECK(estimate_quadratic_variation(brown).bracket(0, 0).imag() == 0.0);

  const DiffusionConstant withGamma(1.0, kPi / 2, 0.5);
  const auto g = sample_increments(build_channel_covariance(withGamma, unit), 1e-3, 100000, 1, 4);
  const auto eg = estimate_quadratic_variation(g);
  CHECK(std::abs(eg.mixedBracket(0, 0) - 1.5) < 5.0 * eg.mixedError(0, 0));
  CHECK(std::abs(eg.bracket(0, 0) - Complex(0.0, 1.0)) < 5.0 * eg.bracketError(0, 0));

  IncrementBatch tiny;
  tiny.values = Eigen::MatrixXcd::Zero(1, 1);
  tiny.step = 1.0;
  CHECK_THROWS_AS(estimate_quadratic_variation(tiny), InvalidSpec);
}
