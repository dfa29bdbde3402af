#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cdiff/catalog.hpp"
#include "cdiff/relativistic.hpp"
#include "cdiff/sampler.hpp"

using namespace cdiff;

namespace {

constexpr double kPi = std::numbers::pi;

double sample_variance(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

DriftFunction linear_drift(double slope) {
  return [slope](const Point& x, double, Point& out) { out = slope * x; };
}

std::vector<ChannelCovariance> one_channel(const DiffusionConstant& alpha) {
  return {build_channel_covariance(alpha, ParticleSpec{})};
}

DensityField gaussian_density(const GridSpec& grid, double variance) {
  Eigen::VectorXd v(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const double x = grid.coordinate(i, 0);
    v(i) = std::exp(-0.5 * x * x / variance);
  }
  return DensityField(grid, v, NormConvention::L2).normalized();
}

}  // namespace

TEST_CASE("epsilon gauge table") {
  ParticleSpec p;
  p.mass = 2.0;
  CHECK(fix_epsilon_gauge(p, 1).epsilon == 0.5);
  const auto tachyon = fix_epsilon_gauge(p, -1);
  CHECK(tachyon.epsilon == 0.5);
  CHECK_FALSE(tachyon.sampleable);
  CHECK_THROWS_AS(relativistic_channels(DiffusionConstant::quantum(), tachyon, 3), InvalidSpec);
  p.mass = 0.0;
  CHECK(fix_epsilon_gauge(p, 0).epsilon == 1.0);
  CHECK_THROWS_AS(fix_epsilon_gauge(p, 1), InvalidSpec);
  p.mass = 1.0;
  const auto channels = relativistic_channels(DiffusionConstant::quantum(), fix_epsilon_gauge(p, 1), 3);
  REQUIRE(channels.size() == 4);
  CHECK(channels[0].signatureSign == -1);
  for (const auto& c : channels) CHECK(c.real_variance() == doctest::Approx(0.5));
}

TEST_CASE("initial position draws") {
  const Index n = 100000;
  SUBCASE("standard Gaussian") {
    const auto grid = GridSpec::line(-8, 8, 1600, 0.01);
    const Eigen::VectorXd x = draw_initial_positions(gaussian_density(grid, 1.0), n, 3).col(0);
    const double se = std::sqrt(2.0 / static_cast<double>(n - 1));
    CHECK(std::abs(x.mean()) < 3.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(sample_variance(x) - 1.0) < 3.0 * se);
  }
  SUBCASE("point mass") {
    Point x0(2);
    x0 << 0.25, -1.5;
    const auto x = point_mass_positions(x0, 17);
    for (Index p = 0; p < 17; ++p) CHECK(x.row(p) == x0.transpose());
  }
  SUBCASE("uniform on a ring") {
    const auto ring = GridSpec::ring(0, 2 * kPi, 64, 0.01);
    const DensityField flat(ring, Eigen::VectorXd::Ones(64), NormConvention::L2);
    const Eigen::VectorXd x = draw_initial_positions(flat.normalized(), n, 9).col(0);
    CHECK(x.minCoeff() >= 0.0);
    CHECK(x.maxCoeff() < 2 * kPi);
    const double c = x.array().cos().mean();
    const double s = x.array().sin().mean();
    CHECK(std::hypot(c, s) < 3.0 / std::sqrt(static_cast<double>(n)));
  }
  SUBCASE("empty density") {
    const auto grid = GridSpec::line(0, 1, 8, 0.1);
    CHECK_THROWS_AS(draw_initial_positions(DensityField(grid, Eigen::VectorXd::Zero(8), NormConvention::L2), 5, 1),
                    InvalidSpec);
  }
}

TEST_CASE("Ornstein-Uhlenbeck ensembles") {
  const auto alpha = DiffusionConstant::brownian();
  const auto grid = GridSpec::line(-6, 6, 1200, 0.01);
  const Index n = 100000;
  const auto initial = draw_initial_positions(gaussian_density(grid, 0.5), n, 5);
  EnsembleOptions opt;
  opt.steps = 200;
  opt.dt = 0.01;
  opt.seed = 42;
  opt.snapshots = {0, 100, 200};
  const auto fwd = simulate_ensemble(linear_drift(-1.0), one_channel(alpha), initial, opt);
  const double se = 0.5 * std::sqrt(2.0 / static_cast<double>(n));
  for (const auto& pos : fwd.positions) {
    CHECK(std::abs(sample_variance(pos.col(0)) - 0.5) < 0.02 * 0.5);
  }
  CHECK(fwd.snapshotTimes.back() == doctest::Approx(2.0));

  opt.direction = Direction::Backward;
  opt.startTime = 2.0;
  const auto bwd = simulate_ensemble(linear_drift(1.0), one_channel(alpha), initial, opt);
  CHECK(bwd.snapshotTimes.back() == doctest::Approx(0.0));
  for (std::size_t s = 0; s < fwd.positions.size(); ++s) {
    const double a = sample_variance(fwd.positions[s].col(0));
    const double b = sample_variance(bwd.positions[s].col(0));
    CHECK(std::abs(a - b) < 4.0 * std::sqrt(2.0) * se);
  }
}

TEST_CASE("zero drift with alpha = i spreads at the real-channel rate") {
  const Index n = 100000;
  EnsembleOptions opt;
  opt.steps = 10;
  opt.dt = 0.1;
  opt.seed = 7;
  opt.snapshots = {10};
  const auto ens = simulate_ensemble(linear_drift(0.0), one_channel(DiffusionConstant::quantum()),
                                     point_mass_positions(Point::Zero(1), n), opt);
  CHECK(std::abs(sample_variance(ens.positions[0].col(0)) - 0.5) < 0.02 * 0.5);
}

TEST_CASE("ensembles are independent of the thread count") {
  const auto grid = GridSpec::line(-6, 6, 240, 0.01);
  const auto initial = draw_initial_positions(gaussian_density(grid, 0.5), 1003, 5);
  EnsembleOptions opt;
  opt.steps = 50;
  opt.dt = 0.01;
  opt.seed = 11;
  opt.snapshots = {0, 25, 50};
  opt.trackImaginary = true;
  opt.keepPaths = true;
  const auto cov = one_channel(DiffusionConstant(1.0, 0.7));
  const auto a = simulate_ensemble(linear_drift(-1.0), cov, initial, opt);
  opt.threads = 4;
  const auto b = simulate_ensemble(linear_drift(-1.0), cov, initial, opt);
  for (std::size_t s = 0; s < a.positions.size(); ++s) {
    CHECK(a.positions[s] == b.positions[s]);
    CHECK(a.imaginary[s] == b.imaginary[s]);
  }
  CHECK(a.fullPaths == b.fullPaths);
  CHECK(a.squaredIncrements == b.squaredIncrements);
}

TEST_CASE("weak order one on E[X_T^2]") {
  // Oracle: the Euler recursion v <- (1 - dt)^2 v + sigma^2 dt is exact for the
  // discrete second moment; the continuum value is e^{-2T} + (1 - e^{-2T})/2.
  const double T = 1.0;
  const double exact = std::exp(-2.0 * T) + 0.5 * (1.0 - std::exp(-2.0 * T));
  const Index n = 400000;
  std::vector<double> logDt;
  std::vector<double> logErr;
  for (double dt : {0.2, 0.1, 0.05}) {
    const auto steps = static_cast<Index>(std::lround(T / dt));
    EnsembleOptions opt;
    opt.steps = steps;
    opt.dt = dt;
    opt.seed = 21;
    opt.snapshots = {steps};
    Point x0(1);
    x0 << 1.0;
    const auto ens = simulate_ensemble(linear_drift(-1.0), one_channel(DiffusionConstant::brownian()),
                                       point_mass_positions(x0, n), opt);
    const double m2 = ens.positions[0].col(0).squaredNorm() / static_cast<double>(n);
    double v = 1.0;
    for (Index k = 0; k < steps; ++k) v = (1.0 - dt) * (1.0 - dt) * v + dt;
    const double se = std::sqrt(2.0) * m2 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(m2 - v) < 4.0 * se);
    logDt.push_back(std::log(dt));
    logErr.push_back(std::log(std::abs(m2 - exact)));
  }
  const double xm = (logDt[0] + logDt[1] + logDt[2]) / 3.0;
  const double ym = (logErr[0] + logErr[1] + logErr[2]) / 3.0;
  double sxy = 0.0;
  double sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxy += (logDt[i] - xm) * (logErr[i] - ym);
    sxx += (logDt[i] - xm) * (logDt[i] - xm);
  }
  CHECK(std::abs(sxy / sxx - 1.0) < 0.2);
}

TEST_CASE("ring ensembles wrap and count windings") {
  const Axis ax{0.0, 2 * kPi, 64, true};
  EnsembleOptions opt;
  opt.steps = 400;
  opt.dt = 0.01;
  opt.seed = 3;
  opt.ring = ax;
  opt.keepPaths = true;
  opt.snapshots = {400};
  const Index n = 200;
  Point x0(1);
  x0 << 1.0;
  const auto ens = simulate_ensemble([](const Point&, double, Point& out) { out.setConstant(1, 2.0); }, one_channel(DiffusionConstant::brownian()),
                                     point_mass_positions(x0, n), opt);
  // Constant drift 2 plus noise: unwrapped displacement = 2 pi winding + wrapped change.
  for (Index p = 0; p < n; ++p) {
    const double x = ens.positions[0](p, 0);
    CHECK(x >= 0.0);
    CHECK(x < 2 * kPi);
    double unwrapped = 0.0;
    for (Index k = 0; k < opt.steps; ++k) {
      double d = ens.fullPaths[static_cast<std::size_t>(p * (opt.steps + 1) + k + 1)] -
                 ens.fullPaths[static_cast<std::size_t>(p * (opt.steps + 1) + k)];
      d -= 2 * kPi * std::round(d / (2 * kPi));
      CHECK(std::abs(d) < kPi);
      unwrapped += d;
    }
    const double turns = (1.0 + unwrapped - x) / (2 * kPi);
    CHECK(std::abs(turns - ens.windings(p)) < 1e-9);
  }
}

TEST_CASE("sampler guards") {
  EnsembleOptions opt;
  opt.steps = 0;
  opt.dt = 0.1;
  const auto cov = one_channel(DiffusionConstant::brownian());
  const auto x = point_mass_positions(Point::Zero(1), 4);
  CHECK_THROWS_AS(simulate_ensemble(linear_drift(-1.0), cov, x, opt), InvalidSpec);
  opt.steps = 3;
  const DriftFunction bad = [](const Point&, double, Point& out) {
    out.setConstant(1, std::numeric_limits<double>::quiet_NaN());
  };
  CHECK_THROWS_AS(simulate_ensemble(bad, cov, x, opt), NumericalGuard);
}

TEST_CASE("grid interpolation is exact on affine fields") {
  const auto grid = GridSpec::box({Axis{-1, 1, 10, false}, Axis{0, 2, 8, false}}, 0.01);
  Eigen::MatrixXd v(grid.size(), 2);
  for (Index i = 0; i < grid.size(); ++i) {
    v(i, 0) = 2.0 * grid.coordinate(i, 0) - grid.coordinate(i, 1);
    v(i, 1) = 0.5;
  }
  const GridInterpolator interp(grid, v);
  Point x(2);
  x << 0.13, 1.37;
  Point out;
  interp(x, out);
  CHECK(out(0) == doctest::Approx(2.0 * 0.13 - 1.37));
  CHECK(out(1) == doctest::Approx(0.5));
}
