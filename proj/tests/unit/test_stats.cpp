#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cdiff/catalog.hpp"
#include "cdiff/stats.hpp"

using namespace cdiff;

namespace {

constexpr double kPi = std::numbers::pi;

DensityField gaussian(const GridSpec& grid, double variance) {
  Eigen::VectorXd v(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const double x = grid.coordinate(i, 0);
    v(i) = std::exp(-0.5 * x * x / variance) / std::sqrt(2.0 * kPi * variance);
  }
  return {grid, v, NormConvention::L2};
}

PathEnsemble snapshot_of(const Eigen::MatrixXd& x) {
  PathEnsemble e;
  e.paths = x.rows();
  e.dimension = static_cast<int>(x.cols());
  e.steps = 1;
  e.dt = 1.0;
  e.snapshotSteps = {0};
  e.snapshotTimes = {0.0};
  e.positions = {x};
  return e;
}

DriftFunction linear_drift(double slope) {
  return [slope](const Point& x, double, Point& out) { out = slope * x; };
}

std::vector<ChannelCovariance> one_channel(const DiffusionConstant& alpha) {
  return {build_channel_covariance(alpha, ParticleSpec{})};
}

}  // namespace

TEST_CASE("empirical densities") {
  const Index n = 100000;
  SUBCASE("standard Gaussian samples") {
    const auto fine = GridSpec::line(-8, 8, 3200, 0.01);
    const auto x = draw_initial_positions(gaussian(fine, 1.0), n, 17);
    const auto bins = GridSpec::line(-6, 6, 48, 0.01);
    const auto rho = empirical_density(snapshot_of(x), 0, bins);
    CHECK(rho.integral() == doctest::Approx(1.0));
    CHECK(compare_densities(rho, gaussian(bins, 1.0)).l1Distance < 0.02);
  }
  SUBCASE("identical positions fill one bin") {
    const auto bins = GridSpec::line(-1, 1, 20, 0.01);
    const auto rho = empirical_density(snapshot_of(Eigen::MatrixXd::Constant(50, 1, 0.33)), 0, bins);
    CHECK((rho.values().array() > 0.0).count() == 1);
  }
  SUBCASE("uniform ring samples") {
    const auto ring = GridSpec::ring(0, 2 * kPi, 64, 0.01);
    const auto x = draw_initial_positions(
        DensityField(ring, Eigen::VectorXd::Ones(64), NormConvention::L2).normalized(), n, 23);
    const auto rho = empirical_density(snapshot_of(x), 0, ring);
    const double expected = static_cast<double>(n) / 64.0;
    const Eigen::VectorXd counts = rho.values() * ring.cell_volume() * static_cast<double>(n);
    CHECK((counts.array() - expected).abs().maxCoeff() < 4.0 * std::sqrt(expected));
  }
  SUBCASE("errors") {
    PathEnsemble empty;
    CHECK_THROWS_AS(empirical_density(empty, 0, GridSpec::line(0, 1, 8, 0.1)), InvalidSpec);
    CHECK_THROWS_AS(empirical_density(snapshot_of(Eigen::MatrixXd::Zero(3, 1)), 1,
                                      GridSpec::line(-1, 1, 8, 0.1)),
                    InvalidSpec);
  }
}

TEST_CASE("density comparison") {
  const auto grid = GridSpec::line(-12, 12, 4800, 0.01);
  const auto a = gaussian(grid, 1.0);
  const auto b = gaussian(grid, 1.1);
  SUBCASE("identity") {
    const auto r = compare_densities(a, a);
    CHECK(r.l1Distance == 0.0);
    CHECK(r.klDivergence == 0.0);
    CHECK(r.maxAbs == 0.0);
  }
  SUBCASE("Gaussian KL against the closed form") {
    const double exact = 0.5 * (std::log(1.1) + 1.0 / 1.1 - 1.0);
    CHECK(exact == doctest::Approx(0.0022005).epsilon(1e-4));
    CHECK(std::abs(compare_densities(a, b).klDivergence - exact) < 1e-8);
  }
  SUBCASE("disjoint supports") {
    const auto line = GridSpec::line(0, 2, 20, 0.01);
    Eigen::VectorXd left = Eigen::VectorXd::Zero(20);
    Eigen::VectorXd right = Eigen::VectorXd::Zero(20);
    left.head(10).setOnes();
    right.tail(10).setOnes();
    const auto r = compare_densities(DensityField(line, left, NormConvention::L2),
                                     DensityField(line, right, NormConvention::L2));
    CHECK(r.l1Distance == doctest::Approx(2.0));
  }
  SUBCASE("L1 is symmetric and KL is not") {
    Eigen::VectorXd skew(grid.size());
    for (Index i = 0; i < grid.size(); ++i) {
      const double x = grid.coordinate(i, 0);
      skew(i) = x > 0 ? std::exp(-x) : 0.01 * std::exp(x);
    }
    const auto c = DensityField(grid, skew, NormConvention::L2).normalized();
    const auto ab = compare_densities(a, c);
    const auto ba = compare_densities(c, a);
    CHECK(ab.l1Distance == doctest::Approx(ba.l1Distance).epsilon(1e-14));
    CHECK(std::abs(ab.klDivergence - ba.klDivergence) > 0.1);
  }
  SUBCASE("grid mismatch") {
    CHECK_THROWS_AS(compare_densities(a, gaussian(GridSpec::line(-12, 12, 480, 0.01), 1.0)),
                    InvalidSpec);
  }
}

TEST_CASE("Ito velocity on stationary OU") {
  const auto fine = GridSpec::line(-6, 6, 1200, 0.01);
  const Index n = 100000;
  const auto initial = draw_initial_positions(gaussian(fine, 0.5), n, 31);
  EnsembleOptions opt;
  opt.steps = 10;
  opt.dt = 0.01;
  opt.seed = 42;
  for (Index k = 0; k <= 10; ++k) opt.snapshots.push_back(k);
  const auto ens = simulate_ensemble(linear_drift(-1.0), one_channel(DiffusionConstant::brownian()),
                                     initial, opt);
  const auto bins = GridSpec::line(-1.5, 1.5, 12, 0.01);
  const auto fwd = estimate_ito_velocity(ens, Direction::Forward, bins);
  const auto bwd = estimate_ito_velocity(ens, Direction::Backward, bins);
  const double slopeF = fit_line(fwd).slope;
  const double slopeB = fit_line(bwd).slope;
  CHECK(std::abs(slopeF + 1.0) < 0.05);
  CHECK(std::abs(slopeB - 1.0) < 0.05);
  // b+ - b- = sigma^2 d ln rho = -2x for rho ~ N(0, 1/2).
  CHECK(std::abs((slopeF - slopeB) + 2.0) < 0.2);

  SUBCASE("backward runs condition on the later point") {
    EnsembleOptions back = opt;
    back.direction = Direction::Backward;
    back.startTime = 1.0;
    const auto ensB = simulate_ensemble(linear_drift(1.0), one_channel(DiffusionConstant::brownian()),
                                        initial, back);
    CHECK(std::abs(fit_line(estimate_ito_velocity(ensB, Direction::Backward, bins)).slope - 1.0) < 0.05);
    CHECK(std::abs(fit_line(estimate_ito_velocity(ensB, Direction::Forward, bins)).slope + 1.0) < 0.05);
  }
}

TEST_CASE("Ito velocity of a driftless ensemble is statistically zero") {
  EnsembleOptions opt;
  opt.steps = 10;
  opt.dt = 0.01;
  opt.seed = 8;
  for (Index k = 0; k <= 10; ++k) opt.snapshots.push_back(k);
  const auto fine = GridSpec::line(-5, 5, 500, 0.01);
  const auto ens = simulate_ensemble(linear_drift(0.0), one_channel(DiffusionConstant::brownian()),
                                     draw_initial_positions(gaussian(fine, 1.0), 50000, 2), opt);
  const auto est = estimate_ito_velocity(ens, Direction::Forward, GridSpec::line(-2, 2, 16, 0.01));
  REQUIRE(est.values.size() == 16);
  for (std::size_t i = 0; i < est.values.size(); ++i) {
    const double se = 1.0 / std::sqrt(static_cast<double>(est.counts[i]) * opt.dt);
    CHECK(std::abs(est.values[i]) < 3.0 * se);
  }
  const auto sparse = estimate_ito_velocity(ens, Direction::Forward, GridSpec::line(-6, 6, 48, 0.01), 20);
  CHECK(sparse.droppedBins > 0);
}

TEST_CASE("uncertainty products") {
  const auto grid = GridSpec::line(-10, 10, 2000, 0.01);
  const auto alpha = DiffusionConstant::quantum();
  SUBCASE("minimal and squeezed Gaussians") {
    for (double sigma : {1.0, 0.5}) {
      StateParams p;
      p.sigma = sigma;
      const auto st = analytic_state("free-gaussian-packet", grid, alpha, p);
      const auto r = uncertainty_product(st.psi);
      CHECK(r.asserted);
      CHECK(std::abs(r.product - 0.5) < 1e-6);
      CHECK(r.bound == doctest::Approx(0.5));
    }
  }
  SUBCASE("first excited oscillator state") {
    StateParams p;
    p.level = 1;
    const auto st = analytic_state("harmonic-excited-1", grid, alpha, p);
    CHECK(uncertainty_product(st.psi).product == doctest::Approx(1.5).epsilon(1e-5));
  }
  SUBCASE("random four-level superpositions") {
    std::vector<CatalogState> levels;
    for (int k = 0; k < 4; ++k) {
      levels.push_back(analytic_state("harmonic-excited-" + std::to_string(k), grid, alpha, StateParams{}));
    }
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Complex> c;
      for (int k = 0; k < 4; ++k) c.emplace_back(normal(rng), normal(rng));
      const auto r = uncertainty_product(superpose(c, levels, 0.0));
      CHECK(r.asserted);
      CHECK(r.satisfied);
      CHECK(r.product >= 0.5 - 1e-8);
    }
  }
  SUBCASE("the bound formula at several phases") {
    for (double phi : {kPi / 2, 0.3, -1.0}) {
      const DiffusionConstant a(2.0, phi);
      StateParams p;
      const auto st = analytic_state("free-gaussian-packet", grid, a, p);
      const auto r = uncertainty_product(st.psi);
      CHECK(r.bound == doctest::Approx(1.0 * (1.0 + std::cos(phi))));
      CHECK(r.asserted == (phi == kPi / 2));
    }
  }
}

TEST_CASE("realized quadratic variation") {
  const Index n = 2000;
  EnsembleOptions opt;
  opt.steps = 1000;
  opt.dt = 0.005;
  opt.seed = 13;
  opt.snapshots = {1000};
  Point x0(1);
  x0 << 1.0;
  const auto start = point_mass_positions(x0, n);
  SUBCASE("OU with sigma^2 = 1") {
    const auto ens = simulate_ensemble(linear_drift(-1.0), one_channel(DiffusionConstant::brownian()), start, opt);
    CHECK(std::abs(ensemble_quadratic_variation(ens)(0) - 1.0) < 0.02);
  }
  SUBCASE("quantum channel has rate one half") {
    const auto ens = simulate_ensemble(linear_drift(0.0), one_channel(DiffusionConstant::quantum()), start, opt);
    CHECK(std::abs(ensemble_quadratic_variation(ens)(0) - 0.5) < 0.01);
  }
  SUBCASE("a smooth drift changes the rate only at O(dt)") {
    const auto cov = one_channel(DiffusionConstant::brownian());
    const auto a = simulate_ensemble(linear_drift(0.0), cov, start, opt);
    const auto b = simulate_ensemble(linear_drift(-1.0), cov, start, opt);
    double bmax = 0.0;
    for (const auto& pos : b.positions) bmax = std::max(bmax, pos.cwiseAbs().maxCoeff());
    bmax = std::max(bmax, 4.0);
    const double T = a.elapsed();
    CHECK(std::abs(ensemble_quadratic_variation(a)(0) - ensemble_quadratic_variation(b)(0)) <
          5.0 * opt.dt * bmax * bmax * T);
  }
  SUBCASE("a drift-only path has vanishing rate") {
    // phase pi leaves no variance in the real channel.
    const auto cov = one_channel(DiffusionConstant(1.0, kPi));
    std::vector<double> rates;
    for (double dt : {0.004, 0.002}) {
      EnsembleOptions o = opt;
      o.dt = dt;
      o.steps = static_cast<Index>(std::lround(4.0 / dt));
      o.snapshots = {o.steps};
      rates.push_back(ensemble_quadratic_variation(
          simulate_ensemble(linear_drift(-1.0), cov, point_mass_positions(x0, 4), o))(0));
    }
    CHECK(rates[0] < 1e-3);
    CHECK(rates[0] / rates[1] == doctest::Approx(2.0).epsilon(0.02));
  }
  SUBCASE("too few steps") {
    EnsembleOptions o = opt;
    o.steps = 10;
    o.snapshots = {10};
    CHECK_THROWS_AS(ensemble_quadratic_variation(
                        simulate_ensemble(linear_drift(0.0), one_channel(DiffusionConstant::brownian()), start, o)),
                    InvalidSpec);
  }
}

TEST_CASE("causality statistics on a particle at rest") {
  // Rest-frame plane wave exp(i m x^0): w_circ = epsilon eta d theta = (epsilon m, 0, 0, 0).
  const auto alpha = DiffusionConstant::quantum();
  auto fractions = [&](double mass) {
    ParticleSpec particle;
    particle.mass = mass;
    particle.dimension = 3;
    const auto spec = fix_epsilon_gauge(particle, 1, 0.01);
    const double w0 = spec.epsilon * mass;
    EnsembleOptions opt;
    opt.steps = 300;
    opt.dt = spec.affineStep;
    opt.seed = 5;
    opt.snapshots = {0, 10, 50, 150, 300};
    const DriftFunction drift = [w0](const Point&, double, Point& out) {
      out.setZero(4);
      out(0) = w0;
    };
    const auto ens = simulate_ensemble(drift, relativistic_channels(alpha, spec, 3),
                                       Eigen::MatrixXd::Zero(20000, 4), opt);
    const auto velocity = [w0](const Point&) {
      Point w = Point::Zero(4);
      w(0) = w0;
      return w;
    };
    return causality_statistics(velocity, ens, spec, alpha, {0.1, 0.5, 1.5, 3.0}, 0.0);
  };
  const auto r = fractions(1.0);
  CHECK(r.energyMomentum == doctest::Approx(-1.0));
  CHECK(r.target == -1.0);
  CHECK(r.threshold == doctest::Approx(1.5));
  for (std::size_t i = 0; i + 1 < r.violationFractions.size(); ++i) {
    CHECK(r.violationFractions[i] > r.violationFractions[i + 1]);
  }
  const auto heavy = fractions(10.0);
  CHECK(heavy.threshold == doctest::Approx(0.15));
  for (std::size_t i = 0; i < r.violationFractions.size(); ++i) {
    CHECK(heavy.violationFractions[i] <= r.violationFractions[i]);
  }
}
