#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cdiff/catalog.hpp"
#include "cdiff/drift.hpp"

using namespace cdiff;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("drift of the oscillator ground state") {
  const auto grid = GridSpec::line(-6, 6, 120, 0.01);
  Eigen::VectorXd x(grid.size());
  for (Index i = 0; i < grid.size(); ++i) x(i) = grid.coordinate(i, 0);
  SUBCASE("Brownian: w+ = -omega x, u = 0") {
    const auto st = analytic_state("harmonic-ground", grid, DiffusionConstant::brownian(), StateParams{});
    const auto d = drift_from_wave(st.psi, st.potential, st.particle);
    CHECK(max_abs(d.v_plus().col(0) + x) < 1e-12);
    CHECK(max_abs(d.u_plus()) == 0.0);
    CHECK(max_abs(d.v_minus().col(0) - x) < 1e-12);
  }
  SUBCASE("quantum: w+ = -i omega x") {
    const auto st = analytic_state("harmonic-ground", grid, DiffusionConstant::quantum(), StateParams{});
    const auto d = drift_from_wave(st.psi, st.potential, st.particle);
    CHECK(max_abs(d.v_plus()) < 1e-12);
    CHECK(max_abs(d.u_plus().col(0) + x) < 1e-12);
    CHECK(std::abs(d.v2 - Complex(0.0, 1.0)) < 1e-15);
  }
  SUBCASE("sign flip of Psi leaves the drift bitwise unchanged") {
    StateParams p;
    p.momentum = 0.7;
    const auto st = analytic_state("free-gaussian-packet", grid, DiffusionConstant(1.0, 1.1), p);
    const WaveField flipped(grid, -st.psi.amplitudes(), st.psi.branch(), 0.0, st.psi.alpha());
    const auto a = drift_from_wave(st.psi, st.potential, st.particle);
    const auto b = drift_from_wave(flipped, st.potential, st.particle);
    CHECK(a.wPlus == b.wPlus);
    CHECK(a.wMinus == b.wMinus);
  }
  SUBCASE("zero region is rejected") {
    Eigen::VectorXcd amps = Eigen::VectorXcd::Ones(grid.size());
    amps.segment(10, 3).setZero();
    const WaveField psi(grid, amps, Branch::Minus, 0.0, DiffusionConstant::quantum());
    CHECK_THROWS_AS(drift_from_wave(psi, PotentialSet::none(), ParticleSpec{}), InvalidSpec);
  }
}

TEST_CASE("integrating the drift recovers ln|Psi|") {
  const auto grid = GridSpec::line(-6, 6, 600, 0.01);
  const auto alpha = DiffusionConstant::brownian();
  StateParams p;
  p.sigma = 0.8;
  p.momentum = -0.4;
  const auto st = analytic_state("free-gaussian-packet", grid, alpha, p);
  const auto d = drift_from_wave(st.psi, st.potential, st.particle);
  // w+ = alpha d ln Psi / m for the plus branch of the conjugate pair.
  const Eigen::VectorXd g = (d.wPlus.col(0) * st.particle.mass / alpha.value()).real();
  const double h = grid.axis(0).spacing();
  double acc = std::log(std::abs(st.psi.amplitudes()(0)));
  double worst = 0.0;
  for (Index i = 1; i < grid.size(); ++i) {
    acc += 0.5 * h * (g(i - 1) + g(i));
    worst = std::max(worst, std::abs(acc - std::log(std::abs(st.psi.amplitudes()(i)))));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("hyperplane decomposition") {
  const auto grid = GridSpec::line(-6, 6, 60, 0.01);
  const auto alpha = DiffusionConstant::quantum();
  SUBCASE("shared-action oscillator pair") {
    const auto st = analytic_state("harmonic-ground", grid, alpha, StateParams{});
    const auto d = drift_from_wave(st.psi, st.potential, st.particle, Pairing::SharedAction);
    const auto h = decompose_and_check_hyperplane(d, alpha);
    CHECK(h.residual == 0.0);
    CHECK(max_abs(h.uPlus - h.uMinus) == 0.0);
    CHECK(max_abs(h.uPlus - h.uCirc) == 0.0);
    CHECK(max_abs(h.vPlus) < 1e-12);
  }
  SUBCASE("any single-wave pair with a shared action satisfies the constraint") {
    StateParams p;
    p.momentum = 1.2;
    for (double phi : {0.0, 0.5, kPi / 2, -1.0}) {
      const DiffusionConstant a(1.0, phi);
      const auto st = analytic_state("free-gaussian-packet", grid, a, p);
      const auto d = drift_from_wave(st.psi, st.potential, st.particle, Pairing::SharedAction);
      CHECK(decompose_and_check_hyperplane(d, a).residual < 1e-10);
    }
  }
  SUBCASE("Brownian fields with u = 0 pass") {
    const auto st = analytic_state("harmonic-ground", grid, DiffusionConstant::brownian(), StateParams{});
    const auto d = drift_from_wave(st.psi, st.potential, st.particle);
    CHECK(decompose_and_check_hyperplane(d, DiffusionConstant::brownian()).residual == 0.0);
  }
  SUBCASE("synthetic reconstruction") {
    DriftField d{grid, Eigen::MatrixXcd::Zero(grid.size(), 1), Eigen::MatrixXcd::Zero(grid.size(), 1),
                 alpha.value(), alpha, 0.0};
    Eigen::VectorXd x(grid.size());
    for (Index i = 0; i < grid.size(); ++i) x(i) = grid.coordinate(i, 0);
    d.wPlus.col(0) = x.cast<Complex>();
    d.wMinus.col(0) = (-x).cast<Complex>();
    const auto h = decompose_and_check_hyperplane(d, alpha);
    CHECK(max_abs(h.uPlus.col(0) - x) < 1e-12);
    CHECK(max_abs(h.uMinus.col(0) + x) < 1e-12);
  }
  SUBCASE("phi = pi is unsupported") {
    DriftField d{grid, Eigen::MatrixXcd::Zero(grid.size(), 1), Eigen::MatrixXcd::Zero(grid.size(), 1),
                 -1.0, DiffusionConstant(1.0, kPi), 0.0};
    CHECK_THROWS_AS(decompose_and_check_hyperplane(d, DiffusionConstant(1.0, kPi)), InvalidSpec);
  }
}

TEST_CASE("Hamilton-Jacobi residual") {
  const auto grid = GridSpec::line(-6, 6, 120, 0.01);
  const auto alpha = DiffusionConstant::brownian();
  const auto st = analytic_state("harmonic-ground", grid, alpha, StateParams{});
  const auto d = drift_from_wave(st.psi, st.potential, st.particle);
  SUBCASE("vanishes on the OU drift with its paired potential") {
    for (Branch b : {Branch::Plus, Branch::Minus}) {
      const auto r = hamilton_jacobi_residual(d, st.potential, st.particle, b,
                                              TimeDerivative::stationary_field());
      CHECK(hamilton_jacobi_norm(r) < 1e-10);
    }
  }
  SUBCASE("flipping the potential leaves 2 m omega^2 x") {
    const auto flipped = PotentialSet::quadratic(0.5);
    const auto r = hamilton_jacobi_residual(d, flipped, st.particle, Branch::Plus,
                                            TimeDerivative::stationary_field());
    const auto mask = interior_mask(grid, 2);
    for (Index i = 0; i < grid.size(); ++i) {
      if (!mask[static_cast<std::size_t>(i)]) continue;
      CHECK(std::abs(r(i, 0) - 2.0 * grid.coordinate(i, 0)) < 1e-10);
    }
  }
  SUBCASE("missing time slices are an error") {
    CHECK_THROWS_AS(hamilton_jacobi_residual(d, st.potential, st.particle, Branch::Plus, TimeDerivative{}),
                    InvalidSpec);
  }
  SUBCASE("linear in the potential") {
    PotentialSet u1;
    u1.scalar = [](const Point& x, double) { return std::sin(x(0)); };
    PotentialSet u2;
    u2.scalar = [](const Point& x, double) { return 0.3 * x(0) * x(0) * x(0); };
    PotentialSet sum;
    sum.scalar = [&](const Point& x, double t) { return u1.scalar(x, t) + u2.scalar(x, t); };
    const auto ts = TimeDerivative::stationary_field();
    const auto r0 = hamilton_jacobi_residual(d, PotentialSet::none(), st.particle, Branch::Plus, ts);
    const auto r1 = hamilton_jacobi_residual(d, u1, st.particle, Branch::Plus, ts);
    const auto r2 = hamilton_jacobi_residual(d, u2, st.particle, Branch::Plus, ts);
    const auto r12 = hamilton_jacobi_residual(d, sum, st.particle, Branch::Plus, ts);
    CHECK(hamilton_jacobi_norm(r12 - (r1 + r2 - r0)) < 1e-12);
  }
}

TEST_CASE("Hamilton-Jacobi residual converges at second order on a two-packet superposition") {
  // A single Gaussian has an affine drift that central differences resolve
  // exactly, so a superposition is used to expose the truncation error.
  const auto alpha = DiffusionConstant::quantum();
  StateParams p1;
  p1.momentum = 0.6;
  StateParams p2;
  p2.momentum = -0.3;
  p2.sigma = 1.4;
  const double t0 = 0.4;
  auto residual_on = [&](Index cells) {
    const auto grid = GridSpec::line(-5, 5, cells, 0.01);
    const auto a = analytic_state("free-gaussian-packet", grid, alpha, p1);
    const auto b = analytic_state("free-gaussian-packet", grid, alpha, p2);
    auto exact = [&](const Point& x, double t) { return a.exact(x, t) + 0.3 * b.exact(x, t); };
    auto drift_at = [&](double t) {
      Eigen::VectorXcd v(grid.size());
      for (Index i = 0; i < grid.size(); ++i) v(i) = exact(grid.point(i), t);
      return drift_from_wave(WaveField(grid, v, Branch::Minus, t, alpha), a.potential, a.particle);
    };
    const double tau = 1e-4;
    const auto r = hamilton_jacobi_residual(
        drift_at(t0), a.potential, a.particle, Branch::Minus,
        TimeDerivative::from_slices(drift_at(t0 - tau).wMinus, drift_at(t0 + tau).wMinus, tau));
    return hamilton_jacobi_norm(r);
  };
  const double coarse = residual_on(200);
  const double fine = residual_on(400);
  CHECK(coarse > 1e-6);
  CHECK(std::log2(coarse / fine) > 1.8);
}

TEST_CASE("Hamilton-Jacobi residual with a pure-gauge vector potential") {
  const double q = 0.8;
  const auto grid = GridSpec::line(-8, 8, 320, 0.01);
  const auto alpha = DiffusionConstant::quantum();
  StateParams p;
  p.time = 0.3;
  const auto st = analytic_state("free-gaussian-packet", grid, alpha, p);
  PotentialSet pot;
  pot.charge = q;
  pot.vector = [](const Point& x, double) {
    Point a(1);
    a << 0.3 * std::cos(0.5 * x(0));
    return a;
  };
  const Complex c = -q / alpha.value();
  auto gauged = [&](const Point& x, double t) {
    return st.exact(x, t) * std::exp(c * 0.6 * std::sin(0.5 * x(0)));
  };
  const double tau = 1e-4;
  auto slice = [&](double t) {
    Eigen::VectorXcd v(grid.size());
    for (Index i = 0; i < grid.size(); ++i) v(i) = gauged(grid.point(i), t);
    return drift_from_wave(WaveField(grid, v, Branch::Minus, t, alpha), pot, st.particle);
  };
  const auto d = slice(p.time);
  const auto r = hamilton_jacobi_residual(
      d, pot, st.particle, Branch::Minus,
      TimeDerivative::from_slices(slice(p.time - tau).wMinus, slice(p.time + tau).wMinus, tau));
  CHECK(hamilton_jacobi_norm(r) < 1e-3);
}

TEST_CASE("winding numbers") {
  const auto ring = GridSpec::ring(0, 2 * kPi, 128, 0.01);
  const auto alpha = DiffusionConstant::quantum();
  for (int k = -3; k <= 3; ++k) {
    const auto st = analytic_state("ring-eigenstate-" + std::to_string(k), ring, alpha, StateParams{});
    const auto w = winding_number(st.psi);
    CHECK(w.winding == k);
    const WaveField rotated(ring, st.psi.amplitudes() * std::polar(1.0, 1.234), Branch::Minus, 0.0, alpha);
    CHECK(winding_number(rotated).winding == k);
    for (int j = -3; j <= 3; ++j) {
      const auto other = analytic_state("ring-eigenstate-" + std::to_string(j), ring, alpha, StateParams{});
      const WaveField product(ring, st.psi.amplitudes().cwiseProduct(other.psi.amplitudes()),
                              Branch::Minus, 0.0, alpha);
      CHECK(winding_number(product).winding == k + j);
    }
  }
  const WaveField constant(ring, Eigen::VectorXcd::Ones(128), Branch::Minus, 0.0, alpha);
  CHECK(winding_number(constant).winding == 0);
  Eigen::VectorXcd node = Eigen::VectorXcd::Ones(128);
  node(5) = 0.0;
  CHECK_THROWS_AS(winding_number(WaveField(ring, node, Branch::Minus, 0.0, alpha)), NumericalGuard);
  CHECK_THROWS_AS(winding_number(WaveField(GridSpec::line(0, 1, 16, 0.1), Eigen::VectorXcd::Ones(16),
                                           Branch::Minus, 0.0, alpha)),
                  InvalidSpec);
}

TEST_CASE("generative drift") {
  // Kept narrow enough that the density never reaches its relative floor.
  const auto grid = GridSpec::line(-4, 4, 160, 0.01);
  Eigen::VectorXd x(grid.size());
  for (Index i = 0; i < grid.size(); ++i) x(i) = grid.coordinate(i, 0);
  SUBCASE("quantum oscillator: b+ = -x/2 with zero probability flux") {
    const auto alpha = DiffusionConstant::quantum();
    const auto st = analytic_state("harmonic-ground", grid, alpha, StateParams{});
    const auto d = drift_from_wave(st.psi, st.potential, st.particle);
    const auto rho = density_from_wave(st.psi, NormConvention::L2);
    const double s2 = real_channel_variance(alpha, st.particle);
    CHECK(s2 == doctest::Approx(0.5));
    const Eigen::MatrixXd b = generative_drift(d, rho, s2, Direction::Forward, DriftMode::DensityConsistent);
    CHECK(max_abs(b.col(0) + 0.5 * x) < 1e-10);
    const Eigen::VectorXd flux = b.col(0).cwiseProduct(rho.values()) -
                                 0.5 * s2 * central_difference<double>(grid, rho.values(), 0);
    CHECK(max_abs(flux.segment(1, grid.size() - 2)) < 1e-3);
  }
  SUBCASE("Brownian oscillator: density-consistent equals literal") {
    const auto alpha = DiffusionConstant::brownian();
    const auto st = analytic_state("harmonic-ground", grid, alpha, StateParams{});
    const auto d = drift_from_wave(st.psi, st.potential, st.particle);
    const auto rho = density_from_wave(st.psi, NormConvention::L2);
    const double s2 = real_channel_variance(alpha, st.particle);
    for (Direction dir : {Direction::Forward, Direction::Backward}) {
      const auto dc = generative_drift(d, rho, s2, dir, DriftMode::DensityConsistent);
      const auto lit = generative_drift(d, rho, s2, dir, DriftMode::Literal);
      CHECK(max_abs(dc - lit) < 1e-10);
    }
  }
  SUBCASE("plane wave: b = p/m") {
    const auto ring = GridSpec::ring(0, 2 * kPi, 64, 0.01);
    StateParams p;
    p.momentum = 2.0;
    p.mass = 0.5;
    const auto alpha = DiffusionConstant::quantum();
    const auto st = analytic_state("plane-wave", ring, alpha, p);
    const auto d = drift_from_wave(st.psi, st.potential, st.particle);
    const auto rho = density_from_wave(st.psi, NormConvention::L2);
    const auto b = generative_drift(d, rho, real_channel_variance(alpha, st.particle),
                                    Direction::Forward, DriftMode::DensityConsistent);
    CHECK(max_abs(b.array() - 4.0) < 1e-10);
  }
  SUBCASE("clipping and invalid sigma") {
    const auto alpha = DiffusionConstant::quantum();
    const auto st = analytic_state("harmonic-ground", grid, alpha, StateParams{});
    const auto d = drift_from_wave(st.psi, st.potential, st.particle);
    const auto rho = density_from_wave(st.psi, NormConvention::L2);
    GenerativeDriftOptions opt;
    opt.wMax = 1.0;
    const auto b = generative_drift(d, rho, 0.5, Direction::Forward, DriftMode::DensityConsistent, opt);
    CHECK(max_abs(b) <= 1.0);
    CHECK_THROWS_AS(generative_drift(d, rho, 0.0, Direction::Forward, DriftMode::DensityConsistent),
                    InvalidSpec);
    CHECK(default_drift_clip(grid, 2.0) == doctest::Approx(4000.0));
  }
}
