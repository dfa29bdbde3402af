#include <doctest.h>

#include <cmath>

#include "cdiff/fokker_planck.hpp"

using namespace cdiff;

namespace {

DensityField gaussian(const GridSpec& grid, double mean, double variance) {
  Eigen::VectorXd v(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const double d = grid.coordinate(i, 0) - mean;
    v(i) = std::exp(-0.5 * d * d / variance);
  }
  return DensityField(grid, v, NormConvention::L2).normalized();
}

const ScalarDrift kOu = [](double x, double) { return -x; };
const ScalarDrift kZero = [](double, double) { return 0.0; };

}  // namespace

TEST_CASE("stationary OU density is a fixed point") {
  const auto grid = GridSpec::line(-6, 6, 240, 0.01);
  const auto rho0 = gaussian(grid, 0.0, 0.5);
  const double dt = 0.5 * fokker_planck_max_step(grid, kOu, 1.0);
  const auto steps = static_cast<Index>(std::ceil(1.0 / dt));
  const auto rho = evolve_fokker_planck(rho0, kOu, 1.0, 1.0 / static_cast<double>(steps), steps);
  CHECK((rho.values() - rho0.values()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("zero drift: variance grows by sigma^2 t and mass is conserved") {
  const auto grid = GridSpec::line(-10, 10, 400, 0.01);
  const auto rho0 = gaussian(grid, 0.3, 0.8);
  const double sigma2 = 1.0;
  const double dt = 0.001;
  const Index steps = 1000;
  auto rho = rho0;
  for (Index k = 0; k < steps; ++k) {
    const double before = rho.integral();
    rho = evolve_fokker_planck(rho, kZero, sigma2, dt, 1);
    CHECK(std::abs(rho.integral() - before) < 1e-10);
  }
  CHECK(std::abs(rho.variance() - (rho0.variance() + sigma2 * 1.0)) < 1e-4);
  CHECK(rho.values().minCoeff() >= 0.0);
}

TEST_CASE("second-order self-convergence on the heat kernel") {
  auto error_at = [](Index cells) {
    const auto grid = GridSpec::line(-8, 8, cells, 0.01);
    const double h = grid.axis(0).spacing();
    const double dt = 0.25 * h * h;
    const auto steps = static_cast<Index>(std::lround(0.5 / dt));
    const auto rho = evolve_fokker_planck(gaussian(grid, 0.0, 0.5), kZero, 1.0,
                                          0.5 / static_cast<double>(steps), steps);
    Eigen::VectorXd exact(grid.size());
    for (Index i = 0; i < grid.size(); ++i) {
      const double x = grid.coordinate(i, 0);
      exact(i) = std::exp(-x * x / 2.0) / std::sqrt(2.0 * std::numbers::pi);
    }
    return (rho.values() - exact).cwiseAbs().maxCoeff();
  };
  const double coarse = error_at(80);
  const double fine = error_at(160);
  CHECK(std::log2(coarse / fine) > 1.8);
}

TEST_CASE("forward and backward Kolmogorov evolutions are dual") {
  const auto grid = GridSpec::line(-7, 7, 560, 0.01);
  const auto rho0 = gaussian(grid, 1.0, 0.3);
  const double sigma2 = 1.0;
  const double dt = 0.5 * fokker_planck_max_step(grid, kOu, sigma2);
  const auto steps = static_cast<Index>(std::ceil(0.5 / dt));
  const double step = 0.5 / static_cast<double>(steps);
  Eigen::VectorXd f0(grid.size());
  for (Index i = 0; i < grid.size(); ++i) f0(i) = std::tanh(grid.coordinate(i, 0));
  const auto rho = evolve_fokker_planck(rho0, kOu, sigma2, step, steps);
  const auto f = evolve_backward_kolmogorov(grid, f0, kOu, sigma2, step, steps);
  const double h = grid.axis(0).spacing();
  const double lhs = rho.values().dot(f0) * h;
  const double rhs = rho0.values().dot(f) * h;
  CHECK(std::abs(lhs - rhs) < 1e-4);
  // The pairing actually moved.
  CHECK(std::abs(lhs - rho0.values().dot(f0) * h) > 1e-2);
}

TEST_CASE("oracle guards") {
  const auto grid = GridSpec::line(-6, 6, 120, 0.01);
  const auto rho0 = gaussian(grid, 0.0, 0.5);
  const double limit = fokker_planck_max_step(grid, kOu, 1.0);
  CHECK(limit <= 0.5 * 0.01 + 1e-15);
  try {
    evolve_fokker_planck(rho0, kOu, 1.0, 2.0 * limit, 1);
    FAIL("expected a step guard");
  } catch (const NumericalGuard& e) {
    CHECK(std::string(e.what()).find("dt <=") != std::string::npos);
  }
  CHECK_THROWS_AS(evolve_fokker_planck(rho0, kOu, 0.0, 1e-4, 1), InvalidSpec);
  CHECK_THROWS_AS(evolve_backward_kolmogorov(grid, rho0.values(), kOu, 1.0, 1.0, 1), NumericalGuard);
  const auto box = GridSpec::box({Axis{0, 1, 8, false}, Axis{0, 1, 8, false}}, 0.1);
  CHECK_THROWS_AS(evolve_fokker_planck(DensityField(box, Eigen::VectorXd::Ones(64), NormConvention::L2),
                                       kOu, 1.0, 1e-4, 1),
                  InvalidSpec);
}

TEST_CASE("ring evolution relaxes to uniform") {
  const auto ring = GridSpec::ring(0, 2 * std::numbers::pi, 64, 0.01);
  Eigen::VectorXd v(64);
  for (Index i = 0; i < 64; ++i) v(i) = 1.0 + 0.5 * std::cos(ring.coordinate(i, 0));
  const auto rho0 = DensityField(ring, v, NormConvention::L2).normalized();
  const ScalarDrift push = [](double, double) { return 0.7; };
  const double dt = 0.5 * fokker_planck_max_step(ring, push, 1.0);
  const auto rho = evolve_fokker_planck(rho0, push, 1.0, dt, static_cast<Index>(40.0 / dt));
  CHECK(std::abs(rho.integral() - 1.0) < 1e-10);
  CHECK((rho.values().array() - 1.0 / (2 * std::numbers::pi)).abs().maxCoeff() < 1e-6);
}
