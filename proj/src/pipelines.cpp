#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include <Eigen/Core>
#include <yaml-cpp/yaml.h>

#include "cdiff/catalog.hpp"
#include "cdiff/crank_nicolson.hpp"
#include "cdiff/drift.hpp"
#include "cdiff/fokker_planck.hpp"
#include "cdiff/io.hpp"
#include "cdiff/kg_spectral.hpp"
#include "cdiff/noise.hpp"
#include "cdiff/relativistic.hpp"
#include "cdiff/sampler.hpp"
#include "cdiff/scenario.hpp"
#include "cdiff/stats.hpp"

namespace cdiff {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kPi = std::numbers::pi;

// splitmix64 finalizer; gives independent Philox keys for the separate
// random streams of one scenario.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct Context {
  const ScenarioConfig& cfg;
  fs::path out;
  int threads;
  ScenarioReport report;

  DiffusionConstant alpha() const {
    return {cfg.number("alpha.magnitude"), cfg.number("alpha.phase"), cfg.number("alpha.gamma")};
  }
  ParticleSpec particle() const {
    return {cfg.number("particle.mass"), cfg.number("particle.charge"),
            static_cast<int>(cfg.integer("particle.dimension"))};
  }
  bool ring() const { return cfg.text("grid.topology") == "ring"; }
  GridSpec grid() const {
    const double lo = cfg.number("grid.lower");
    const double hi = cfg.number("grid.upper");
    const Index cells = cfg.integer("grid.cells");
    const double dt = cfg.number("grid.dt");
    return ring() ? GridSpec::ring(lo, hi, cells, dt) : GridSpec::line(lo, hi, cells, dt);
  }
  GridSpec bins() const {
    const double lo = cfg.number("histogram.lower");
    const double hi = cfg.number("histogram.upper");
    const Index cells = cfg.integer("histogram.cells");
    return ring() ? GridSpec::ring(lo, hi, cells, 0.01) : GridSpec::line(lo, hi, cells, 0.01);
  }
  StateParams state() const {
    StateParams p;
    p.mass = cfg.number("particle.mass");
    p.omega = cfg.number("state.omega");
    p.sigma = cfg.number("state.sigma");
    p.center = cfg.number("state.center");
    p.momentum = cfg.number("state.momentum");
    p.level = static_cast<int>(cfg.integer("state.level"));
    p.branch = cfg.text("state.branch") == "plus" ? Branch::Plus : Branch::Minus;
    p.time = cfg.number("state.time");
    return p;
  }
  std::uint64_t seed() const { return static_cast<std::uint64_t>(cfg.integer("ensemble.seed")); }
  Index paths() const { return cfg.integer("ensemble.paths"); }
  Index steps() const { return cfg.integer("ensemble.steps"); }
  double dt() const { return cfg.number("ensemble.dt"); }
  DriftMode mode() const { return drift_mode_from_string(cfg.text("ensemble.drift_mode")); }
  Direction direction() const {
    return cfg.text("ensemble.direction") == "backward" ? Direction::Backward : Direction::Forward;
  }
  double crit(const std::string& name) const { return cfg.number("criteria." + name); }
  fs::path file(const std::string& rel) const { return out / rel; }
};

// Cell of x on a histogram axis, with the same convention as empirical_density.
Index bin_of(const Axis& ax, double x) {
  const double h = ax.spacing();
  if (ax.periodic) {
    double u = (x - ax.lower) / h + 0.5;
    const double cells = static_cast<double>(ax.cells);
    u -= cells * std::floor(u / cells);
    return std::min<Index>(static_cast<Index>(std::floor(u)), ax.cells - 1);
  }
  if (x < ax.lower || x >= ax.upper) return -1;
  return std::min<Index>(static_cast<Index>(std::floor((x - ax.lower) / h)), ax.cells - 1);
}

// Moves the mass of each fine cell into the histogram bin holding its centre
// and normalizes over the bins, as empirical_density does for samples.
DensityField rebin(const DensityField& fine, const GridSpec& bins) {
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(bins.size());
  const Axis& ax = bins.axis(0);
  for (Index i = 0; i < fine.grid().size(); ++i) {
    const Index b = bin_of(ax, fine.grid().coordinate(i, 0));
    if (b >= 0) mass(b) += fine.values()(i);
  }
  const double total = mass.sum();
  if (!(total > 0.0)) throw InvalidSpec("reference density has no mass inside the histogram");
  return {bins, mass / (total * bins.cell_volume()), fine.convention()};
}

std::vector<Index> snapshot_steps(const std::vector<double>& times, double dt, Index steps) {
  std::set<Index> s{0, steps};
  for (double t : times) {
    const auto k = static_cast<Index>(std::llround(t / dt));
    if (k > steps) throw InvalidSpec("snapshot time " + format_number(t) + " lies beyond the run");
    s.insert(k);
  }
  return {s.begin(), s.end()};
}

double sample_variance(const Eigen::VectorXd& x) {
  const double m = x.mean();
  return (x.array() - m).square().sum() / static_cast<double>(x.size() - 1);
}

DensityField gaussian_density(const GridSpec& grid, double mean, double variance) {
  Eigen::VectorXd v(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const double d = grid.coordinate(i, 0) - mean;
    v(i) = std::exp(-0.5 * d * d / variance);
  }
  return DensityField(grid, v, NormConvention::L2).normalized();
}

Eigen::MatrixXd initial_positions(const Context& ctx, const DensityField& rho, std::uint64_t seed) {
  if (ctx.cfg.text("ensemble.initial") == "point") {
    Point x0(1);
    x0 << ctx.cfg.number("ensemble.x0");
    return point_mass_positions(x0, ctx.paths());
  }
  return draw_initial_positions(rho, ctx.paths(), seed);
}

ScalarDrift scalar_drift(const GridInterpolator& interp) {
  return [interp](double x, double) {
    Point p(1);
    p << x;
    Point out;
    interp(p, out);
    return out(0);
  };
}

// Least-squares slope of a grid field over nodes inside [lo, hi].
double field_slope(const GridSpec& grid, const Eigen::VectorXd& f, double lo, double hi) {
  double n = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (Index i = 0; i < grid.size(); ++i) {
    const double x = grid.coordinate(i, 0);
    if (x < lo || x > hi) continue;
    n += 1.0;
    sx += x;
    sy += f(i);
    sxx += x * x;
    sxy += x * f(i);
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

PotentialSet potential_for(const Context& ctx, const CatalogState& st) {
  const std::string kind = ctx.cfg.text("potential.kind");
  if (kind == "none") return PotentialSet::none();
  if (kind == "quadratic") return PotentialSet::quadratic(ctx.cfg.number("potential.coefficient"));
  return st.potential;
}

std::vector<ChannelCovariance> channels_for(const Context& ctx, int n) {
  const auto cov = build_channel_covariance(ctx.alpha(), ctx.particle());
  return std::vector<ChannelCovariance>(static_cast<std::size_t>(n), cov);
}

EnsembleOptions ensemble_options(const Context& ctx, std::uint64_t seed, Direction direction,
                                 double startTime, std::vector<Index> snapshots) {
  EnsembleOptions opt;
  opt.steps = ctx.steps();
  opt.dt = ctx.dt();
  opt.seed = seed;
  opt.direction = direction;
  opt.startTime = startTime;
  opt.snapshots = std::move(snapshots);
  opt.threads = ctx.threads;
  opt.mode = ctx.mode();
  return opt;
}

// Re-runs the first outputs.full_paths paths with every step stored. Paths are
// addressed by index in the RNG, so they coincide with the summarized ones.
void export_paths(const Context& ctx, const DriftFunction& drift, const std::vector<ChannelCovariance>& channels,
                  const Eigen::MatrixXd& initial, EnsembleOptions opt, const std::string& name) {
  const Index k = std::min<Index>(ctx.cfg.integer("outputs.full_paths"), initial.rows());
  if (k <= 0) return;
  opt.keepPaths = true;
  opt.snapshots.clear();
  const auto e = simulate_ensemble(drift, channels, initial.topRows(k), opt);
  fs::create_directories(ctx.file("ensembles"));
  write_paths_binary(e, ctx.file("ensembles/" + name + ".bin").string());
}

json variance_list(const PathEnsemble& e) {
  json list = json::array();
  for (std::size_t s = 0; s < e.positions.size(); ++s) {
    list.push_back({{"time", e.snapshotTimes[s]}, {"variance", sample_variance(e.positions[s].col(0))},
                    {"mean", e.positions[s].col(0).mean()}});
  }
  return list;
}

// Oscillator ground state with its paired potential, drift and density.
struct Stationary {
  CatalogState state;
  PotentialSet potential;
  DriftField drift;
  DensityField rho;
  double sigma2;
};

Stationary stationary_setup(const Context& ctx) {
  const GridSpec grid = ctx.grid();
  if (ctx.ring()) throw InvalidSpec("stationary pipelines need a line grid");
  CatalogState st = analytic_state(ctx.cfg.text("state.name"), grid, ctx.alpha(), ctx.state());
  PotentialSet pot = potential_for(ctx, st);
  DriftField drift = drift_from_wave(st.psi, pot, st.particle);
  DensityField rho = density_from_wave(st.psi, NormConvention::L2);
  const double s2 = real_channel_variance(ctx.alpha(), st.particle);
  return {std::move(st), std::move(pot), std::move(drift), std::move(rho), s2};
}

Eigen::MatrixXd generative(const Stationary& s, Direction dir, DriftMode mode, double totalTime) {
  GenerativeDriftOptions opt;
  opt.wMax = default_drift_clip(s.drift.grid, totalTime);
  return generative_drift(s.drift, s.rho, s.sigma2, dir, mode, opt);
}

// ---------------------------------------------------------------------------

struct NoiseInputs {
  double magnitude;
  double gamma;
  ParticleSpec particle;
  double step;
  explicit NoiseInputs(const Context& ctx)
      : magnitude(ctx.cfg.number("alpha.magnitude")),
        gamma(ctx.cfg.number("alpha.gamma")),
        particle(ctx.particle()),
        step(ctx.cfg.number("noise.step")) {}
};

void noise_covariance(Context& ctx, std::uint64_t& stream) {
  const auto& cfg = ctx.cfg;
  const NoiseInputs in(ctx);
  const double magnitude = in.magnitude;
  const double gamma = in.gamma;
  const ParticleSpec& particle = in.particle;
  const double step = in.step;
  const Index count = cfg.integer("noise.increments");
  json& m = ctx.report.measurements;

  double worstZ = 0.0;
  double worstPlane = 0.0;
  for (double phi : cfg.numbers("noise.phases")) {
    const DiffusionConstant alpha(magnitude, phi, gamma);
    const auto cov = build_channel_covariance(alpha, particle);
    const auto batch = sample_increments(cov, step, count, 1, derive_seed(ctx.seed(), stream++));
    const Eigen::VectorXd re = batch.values.col(0).real();
    const Eigen::VectorXd im = batch.values.col(0).imag();
    const Eigen::VectorXd* comp[2] = {&re, &im};
    Eigen::Matrix2d empirical;
    double z = 0.0;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const Eigen::ArrayXd prod = comp[a]->array() * comp[b]->array() / step;
        const double mean = prod.mean();
        const double se = std::sqrt((prod - mean).square().sum() / static_cast<double>(count - 1) /
                                    static_cast<double>(count));
        empirical(a, b) = mean;
        const double diff = std::abs(mean - cov.matrix(a, b));
        z = std::max(z, se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY));
      }
    }
    worstZ = std::max(worstZ, z);
    double plane = 0.0;
    if (gamma == 0.0) {
      const double c = std::cos(0.5 * cov.effectivePhase);
      const double s = std::sin(0.5 * cov.effectivePhase);
      plane = (im * c - re * s).cwiseAbs().maxCoeff();
      worstPlane = std::max(worstPlane, plane);
    }
    m["covariance"].push_back({{"phase", phi},
                               {"expected", {cov.matrix(0, 0), cov.matrix(0, 1), cov.matrix(1, 1)}},
                               {"empirical", {empirical(0, 0), empirical(0, 1), empirical(1, 1)}},
                               {"max_standard_errors", z},
                               {"hyperplane_max", plane}});
  }
  ctx.report.check("noise.covariance_standard_errors", worstZ, "<=", ctx.crit("covariance_standard_errors"));
  if (gamma == 0.0) {
    ctx.report.check("noise.hyperplane_identity", worstPlane, "<=", ctx.crit("hyperplane_tolerance"));
  }
}

// Realizability over phases in (-pi, pi].
void noise_realizability(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const NoiseInputs in(ctx);
  const double magnitude = in.magnitude;
  const ParticleSpec& particle = in.particle;
  const Index sweep = cfg.integer("noise.sweep_phases");
  double minEig = INFINITY;
  double maxDet = 0.0;
  std::vector<double> cPhi, cGamma, cEig, cDet;
  for (double g : cfg.numbers("noise.sweep_gammas")) {
    for (Index j = 0; j < sweep; ++j) {
      const double phi = -kPi + 2.0 * kPi * static_cast<double>(j + 1) / static_cast<double>(sweep);
      const auto cov = build_channel_covariance(DiffusionConstant(magnitude, phi, g), particle);
      const auto check = assert_realizable(cov);
      minEig = std::min(minEig, check.eigenvalues.minCoeff());
      if (g == 0.0) maxDet = std::max(maxDet, std::abs(check.determinant));
      cPhi.push_back(phi);
      cGamma.push_back(g);
      cEig.push_back(check.eigenvalues.minCoeff());
      cDet.push_back(check.determinant);
    }
  }
  write_csv(ctx.file("curves/realizability.csv"), {"phase", "gamma", "min_eigenvalue", "determinant"},
            {cPhi, cGamma, cEig, cDet});
  ctx.report.check("noise.min_eigenvalue", minEig, ">=", -ctx.crit("psd_tolerance"));
  ctx.report.check("noise.rank_one_determinant", maxDet, "<=", ctx.crit("determinant_tolerance"));
}

void noise_brackets(Context& ctx, std::uint64_t& stream) {
  const auto& cfg = ctx.cfg;
  const NoiseInputs in(ctx);
  const double magnitude = in.magnitude;
  const double gamma = in.gamma;
  const ParticleSpec& particle = in.particle;
  const double step = in.step;
  json& m = ctx.report.measurements;

  const Index qvCount = cfg.integer("noise.qv_increments");
  double worstBracket = 0.0;
  double worstMixed = 0.0;
  for (double phi : cfg.numbers("noise.phases")) {
    for (double g : cfg.numbers("noise.sweep_gammas")) {
      const DiffusionConstant alpha(magnitude, phi, g);
      const auto cov = build_channel_covariance(alpha, particle);
      const auto batch = sample_increments(cov, step, qvCount, 1, derive_seed(ctx.seed(), stream++));
      const auto est = estimate_quadratic_variation(batch);
      const Complex target = alpha.value() / particle.mass;
      const double mixedTarget = (magnitude + g) / particle.mass;
      const double zb = std::abs(est.bracket(0, 0) - target) / est.bracketError(0, 0);
      const double zm = std::abs(est.mixedBracket(0, 0) - mixedTarget) / est.mixedError(0, 0);
      worstBracket = std::max(worstBracket, zb);
      worstMixed = std::max(worstMixed, zm);
      m["brackets"].push_back({{"phase", phi},
                               {"gamma", g},
                               {"bracket", {est.bracket(0, 0).real(), est.bracket(0, 0).imag()}},
                               {"bracket_target", {target.real(), target.imag()}},
                               {"mixed", est.mixedBracket(0, 0).real()},
                               {"mixed_target", mixedTarget},
                               {"bracket_standard_errors", zb},
                               {"mixed_standard_errors", zm}});
    }
  }
  ctx.report.check("noise.bracket_standard_errors", worstBracket, "<=", ctx.crit("bracket_standard_errors"));
  ctx.report.check("noise.mixed_bracket_standard_errors", worstMixed, "<=",
                   ctx.crit("bracket_standard_errors"));

  // Root-mean-square error of the complex bracket against batch size.
  const auto sizes = cfg.numbers("noise.qv_sizes");
  const Index reps = cfg.integer("noise.qv_replicates");
  std::vector<std::string> header{"increments"};
  std::vector<std::vector<double>> cols{sizes};
  double worstSlope = 0.0;
  for (double phi : cfg.numbers("noise.phases")) {
    const DiffusionConstant alpha(magnitude, phi, gamma);
    const auto cov = build_channel_covariance(alpha, particle);
    const Complex target = alpha.value() / particle.mass;
    const std::uint64_t key = derive_seed(ctx.seed(), stream++);
    std::vector<double> rms;
    std::uint64_t offset = 0;
    for (double size : sizes) {
      const auto n = static_cast<Index>(size);
      if (n < 2) throw InvalidSpec("noise.qv_sizes entries must be at least 2");
      double acc = 0.0;
      for (Index r = 0; r < reps; ++r) {
        const auto est = estimate_quadratic_variation(sample_increments(cov, step, n, 1, key, offset));
        offset += static_cast<std::uint64_t>(n);
        acc += std::norm(est.bracket(0, 0) - target);
      }
      rms.push_back(std::sqrt(acc / static_cast<double>(reps)));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      mx += std::log(sizes[i]);
      my += std::log(rms[i]);
    }
    mx /= static_cast<double>(sizes.size());
    my /= static_cast<double>(sizes.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      sxy += (std::log(sizes[i]) - mx) * (std::log(rms[i]) - my);
      sxx += (std::log(sizes[i]) - mx) * (std::log(sizes[i]) - mx);
    }
    const double slope = sxy / sxx;
    worstSlope = std::max(worstSlope, std::abs(slope - ctx.crit("qv_slope")));
    m["bracket_convergence"].push_back({{"phase", phi}, {"slope", slope}, {"rms", rms}});
    header.push_back("rms_phase_" + format_number(phi));
    cols.push_back(rms);
  }
  write_csv(ctx.file("curves/qv_convergence.csv"), header, cols);
  ctx.report.check("noise.bracket_convergence_slope_deviation", worstSlope, "<=",
                   ctx.crit("qv_slope_tolerance"));
}

void run_noise(Context& ctx) {
  const std::string part = ctx.cfg.text("noise.part");
  // Fixed stream bases keep each part's draws independent of which parts run.
  std::uint64_t stream = 0;
  if (part == "all" || part == "covariance") noise_covariance(ctx, stream);
  stream = 1000;
  if (part == "all" || part == "realizability") noise_realizability(ctx);
  if (part == "all" || part == "brackets") noise_brackets(ctx, stream);
}

// ---------------------------------------------------------------------------

void run_free_packet(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GridSpec grid = ctx.grid();
  if (ctx.ring()) throw InvalidSpec("free-packet-spreading needs a line grid");
  const ParticleSpec particle = ctx.particle();
  const double m = particle.mass;
  const double sigma = cfg.number("state.sigma");
  const double magnitude = cfg.number("alpha.magnitude");
  const double T = cfg.number("evolution.time");
  const auto steps = static_cast<Index>(std::llround(T / grid.time_step()));
  if (steps < 1) throw InvalidSpec("evolution.time is shorter than one grid.dt");
  const double t = static_cast<double>(steps) * grid.time_step();
  json& meas = ctx.report.measurements;
  StateParams p = ctx.state();
  p.time = 0.0;

  // Quantum branch, L2 density.
  const DiffusionConstant quantum(magnitude, kPi / 2);
  const auto q = analytic_state("free-gaussian-packet", grid, quantum, p);
  WaveField psi = q.psi;
  double norm = psi.l2_norm_squared();
  double drift = 0.0;
  for (Index k = 0; k < steps; ++k) {
    psi = evolve_crank_nicolson(psi, q.potential, q.particle, 1, Direction::Forward);
    const double next = psi.l2_norm_squared();
    drift = std::max(drift, std::abs(next - norm) / norm);
    norm = next;
  }
  const double qVar = density_from_wave(psi, NormConvention::L2).variance();
  const double qTarget = sigma * sigma + magnitude * magnitude * t * t / (4.0 * m * m * sigma * sigma);
  Eigen::VectorXcd exact(grid.size());
  for (Index i = 0; i < grid.size(); ++i) exact(i) = q.exact(grid.point(i), t);
  const auto qRef = density_from_wave(WaveField(grid, exact, Branch::Minus, t, quantum), NormConvention::L2);
  write_density_csv(ctx.file("densities/quantum_packet.csv"), density_from_wave(psi, NormConvention::L2), &qRef);
  write_wave_csv(ctx.file("densities/quantum_packet_wave.csv"), psi);
  ctx.report.check("pde.quantum_variance_relative_error", std::abs(qVar / qTarget - 1.0), "<",
                   ctx.crit("spreading_relative"));
  ctx.report.check("pde.quantum_norm_drift_per_step", drift, "<", ctx.crit("norm_drift_per_step"));
  meas["quantum_variance"] = qVar;
  meas["quantum_variance_target"] = qTarget;

  // Heat branch, L1 density; s^2 = 2 sigma^2 is the initial L1 variance.
  const DiffusionConstant heat(magnitude, 0.0);
  StateParams hp = p;
  hp.branch = Branch::Minus;
  const auto h = analytic_state("free-gaussian-packet", grid, heat, hp);
  const WaveField hOut = evolve_crank_nicolson(h.psi, h.potential, h.particle, steps, Direction::Forward);
  const double hVar = density_from_wave(hOut, NormConvention::L1).variance();
  const double hTarget = 2.0 * sigma * sigma + magnitude / m * t;
  for (Index i = 0; i < grid.size(); ++i) exact(i) = h.exact(grid.point(i), t);
  const auto hRef = density_from_wave(WaveField(grid, exact, Branch::Minus, t, heat), NormConvention::L1);
  write_density_csv(ctx.file("densities/heat_packet.csv"), density_from_wave(hOut, NormConvention::L1), &hRef);
  ctx.report.check("pde.heat_variance_relative_error", std::abs(hVar / hTarget - 1.0), "<",
                   ctx.crit("spreading_relative"));
  meas["heat_variance"] = hVar;
  meas["heat_variance_target"] = hTarget;

  // Residual certificates under refinement.
  const Index coarse = cfg.integer("refinement.cells");
  struct Entry {
    std::string name;
    DiffusionConstant alpha;
    StateParams params;
    double lower, upper;
    int kind;  // 0 line, 1 ring, 2 spacetime
  };
  StateParams packet;
  packet.mass = m;
  packet.sigma = 1.0;
  packet.momentum = 0.8;
  packet.time = 0.3;
  StateParams wave;
  wave.mass = m;
  wave.momentum = 3.0;
  StateParams wavePlus = wave;
  wavePlus.branch = Branch::Plus;
  StateParams kg;
  kg.mass = m;
  kg.spatialMomentum = {0.6};
  StateParams osc;
  osc.mass = m;
  const std::vector<Entry> entries = {
      {"free-gaussian-packet", DiffusionConstant::quantum(), packet, -12, 12, 0},
      {"free-gaussian-packet", DiffusionConstant::brownian(), packet, -12, 12, 0},
      {"harmonic-ground", DiffusionConstant::quantum(), osc, -8, 8, 0},
      {"harmonic-excited-3", DiffusionConstant::quantum(), osc, -8, 8, 0},
      {"harmonic-excited-2", DiffusionConstant::brownian(), osc, -8, 8, 0},
      {"ring-eigenstate-2", DiffusionConstant::quantum(), osc, 0, 2 * kPi, 1},
      {"plane-wave", DiffusionConstant::quantum(), wave, 0, 2 * kPi, 1},
      {"plane-wave", DiffusionConstant::quantum(), wavePlus, 0, 2 * kPi, 1},
      {"kg-plane-wave", DiffusionConstant::quantum(), kg, -3, 3, 2},
  };
  double worst = INFINITY;
  for (const auto& e : entries) {
    auto grid_of = [&](Index cells) {
      switch (e.kind) {
        case 1: return GridSpec::ring(e.lower, e.upper, cells, 0.01);
        case 2: return GridSpec::spacetime(Axis{-2, 2, cells, false}, {Axis{e.lower, e.upper, cells, false}}, 0.1);
        default: return GridSpec::line(e.lower, e.upper, cells, 0.01);
      }
    };
    const GridSpec g1 = grid_of(coarse);
    const GridSpec g2 = grid_of(2 * coarse);
    const double r1 = catalog_residual(analytic_state(e.name, g1, e.alpha, e.params), g1);
    const double r2 = catalog_residual(analytic_state(e.name, g2, e.alpha, e.params), g2);
    const double order = std::log2(r1 / r2);
    worst = std::min(worst, order);
    meas["residual_orders"].push_back({{"state", e.name},
                                       {"alpha_phase", e.alpha.phase()},
                                       {"branch", to_string(e.params.branch)},
                                       {"coarse", r1},
                                       {"fine", r2},
                                       {"order", order}});
  }
  ctx.report.check("pde.min_residual_order", worst, ">=", ctx.crit("residual_order"));
}

// ---------------------------------------------------------------------------

void run_ou_stationary(Context& ctx) {
  const Stationary s = stationary_setup(ctx);
  const GridSpec& grid = s.drift.grid;
  const GridSpec bins = ctx.bins();
  const double T = static_cast<double>(ctx.steps()) * ctx.dt();
  json& meas = ctx.report.measurements;

  const Eigen::MatrixXd fDc = generative(s, Direction::Forward, DriftMode::DensityConsistent, T);
  const Eigen::MatrixXd fLit = generative(s, Direction::Forward, DriftMode::Literal, T);
  const Eigen::MatrixXd bDc = generative(s, Direction::Backward, DriftMode::DensityConsistent, T);
  const Eigen::MatrixXd bLit = generative(s, Direction::Backward, DriftMode::Literal, T);
  const bool dc = ctx.mode() == DriftMode::DensityConsistent;
  const Eigen::MatrixXd& fwdDrift = dc ? fDc : fLit;
  const Eigen::MatrixXd& bwdDrift = dc ? bDc : bLit;
  write_drift_csv(ctx.file("drift/forward.csv"), s.drift, &fwdDrift);
  write_drift_csv(ctx.file("drift/backward.csv"), s.drift, &bwdDrift);

  // Literal and density-consistent drifts coincide where the density is
  // resolved (away from the relative floor).
  double modeGap = 0.0;
  const double cut = 1e-6 * s.rho.values().maxCoeff();
  for (Index i = 0; i < grid.size(); ++i) {
    if (s.rho.values()(i) < cut) continue;
    modeGap = std::max({modeGap, std::abs(fDc(i, 0) - fLit(i, 0)), std::abs(bDc(i, 0) - bLit(i, 0))});
  }
  ctx.report.check("ou.literal_matches_density_consistent", modeGap, "<", 1e-8);

  const auto snaps = snapshot_steps(ctx.cfg.numbers("ensemble.snapshots"), ctx.dt(), ctx.steps());
  const auto channels = channels_for(ctx, 1);
  const Eigen::MatrixXd initial = initial_positions(ctx, s.rho, derive_seed(ctx.seed(), 0));
  const auto fwdOpt = ensemble_options(ctx, derive_seed(ctx.seed(), 1), Direction::Forward, 0.0, snaps);
  const auto fwd = simulate_ensemble(stationary_drift(GridInterpolator(grid, fwdDrift)), channels, initial, fwdOpt);
  export_paths(ctx, stationary_drift(GridInterpolator(grid, fwdDrift)), channels, initial, fwdOpt, "forward");
  const Eigen::MatrixXd terminal = initial_positions(ctx, s.rho, derive_seed(ctx.seed(), 2));
  const auto bwdOpt = ensemble_options(ctx, derive_seed(ctx.seed(), 3), Direction::Backward, T, snaps);
  const auto bwd = simulate_ensemble(stationary_drift(GridInterpolator(grid, bwdDrift)), channels, terminal, bwdOpt);
  export_paths(ctx, stationary_drift(GridInterpolator(grid, bwdDrift)), channels, terminal, bwdOpt, "backward");
  write_ensemble_summary_csv(ctx.file("densities/forward_summary.csv"), fwd, bins);
  write_ensemble_summary_csv(ctx.file("densities/backward_summary.csv"), bwd, bins);

  const double target = s.rho.variance();
  const double finalVar = sample_variance(fwd.positions.back().col(0));
  ctx.report.check("ou.stationary_variance_relative_error", std::abs(finalVar / target - 1.0), "<",
                   ctx.crit("variance_relative"));
  meas["variance_target"] = target;
  meas["forward"] = variance_list(fwd);
  meas["backward"] = variance_list(bwd);

  // Fokker-Planck oracle at every snapshot.
  const GridInterpolator interp(grid, fwdDrift);
  const ScalarDrift fp = scalar_drift(interp);
  const double limit = fokker_planck_max_step(grid, fp, s.sigma2);
  DensityField rho = s.rho;
  double prevTime = 0.0;
  double worstL1 = 0.0;
  for (std::size_t k = 0; k < fwd.positions.size(); ++k) {
    const double t = fwd.snapshotTimes[k];
    if (t > prevTime) {
      const auto n = static_cast<Index>(std::ceil((t - prevTime) / (0.9 * limit)));
      FokkerPlanckOptions opt;
      opt.startTime = prevTime;
      rho = evolve_fokker_planck(rho, fp, s.sigma2, (t - prevTime) / static_cast<double>(n), n, opt);
      prevTime = t;
    }
    const auto emp = empirical_density(fwd, k, bins);
    const auto ref = rebin(rho, bins);
    const double l1 = compare_densities(emp, ref).l1Distance;
    worstL1 = std::max(worstL1, l1);
    meas["oracle_l1"].push_back({{"time", t}, {"l1", l1}});
    write_density_csv(ctx.file("densities/forward_t" + format_number(t) + ".csv"), emp, &ref);
  }
  ctx.report.check("ou.density_vs_oracle_l1", worstL1, "<", ctx.crit("density_l1"));

  // Forward and backward marginals after equal elapsed time.
  const auto n = static_cast<double>(ctx.paths());
  double worstZ = 0.0;
  double worstMarginalL1 = 0.0;
  for (std::size_t k = 0; k < fwd.positions.size(); ++k) {
    const double vf = sample_variance(fwd.positions[k].col(0));
    const double vb = sample_variance(bwd.positions[k].col(0));
    const double se = std::sqrt(2.0 / (n - 1.0)) * std::hypot(vf, vb);
    worstZ = std::max(worstZ, std::abs(vf - vb) / se);
    worstMarginalL1 = std::max(
        worstMarginalL1, compare_densities(empirical_density(fwd, k, bins), empirical_density(bwd, k, bins)).l1Distance);
  }
  ctx.report.check("ou.forward_backward_variance_standard_errors", worstZ, "<",
                   ctx.crit("marginal_standard_errors"));
  ctx.report.check("ou.forward_backward_l1", worstMarginalL1, "<", 2.0 * ctx.crit("density_l1"), false,
                   "two independent histograms; reported only");
}

// ---------------------------------------------------------------------------

void run_quantum_ho(Context& ctx) {
  const Stationary s = stationary_setup(ctx);
  const GridSpec& grid = s.drift.grid;
  const GridSpec bins = ctx.bins();
  const double T = static_cast<double>(ctx.steps()) * ctx.dt();
  json& meas = ctx.report.measurements;

  const DriftMode mode = ctx.mode();
  const DriftMode other = mode == DriftMode::Literal ? DriftMode::DensityConsistent : DriftMode::Literal;
  const Direction dir = ctx.direction();
  const Eigen::MatrixXd b = generative(s, dir, mode, T);
  const Eigen::MatrixXd bOther = generative(s, dir, other, T);
  write_drift_csv(ctx.file("drift/" + to_string(dir) + ".csv"), s.drift, &b);

  const auto snaps = snapshot_steps(ctx.cfg.numbers("ensemble.snapshots"), ctx.dt(), ctx.steps());
  const auto channels = channels_for(ctx, 1);
  const Eigen::MatrixXd initial = initial_positions(ctx, s.rho, derive_seed(ctx.seed(), 0));
  // Backward runs start at the terminal time T; snapshots count elapsed time.
  const auto opt = ensemble_options(ctx, derive_seed(ctx.seed(), 1), dir, dir == Direction::Forward ? 0.0 : T, snaps);
  const auto ens = simulate_ensemble(stationary_drift(GridInterpolator(grid, b)), channels, initial, opt);
  export_paths(ctx, stationary_drift(GridInterpolator(grid, b)), channels, initial, opt, to_string(dir));
  const auto alt = simulate_ensemble(stationary_drift(GridInterpolator(grid, bOther)), channels, initial, opt);
  write_ensemble_summary_csv(ctx.file("densities/summary.csv"), ens, bins);
  write_ensemble_summary_csv(ctx.file("densities/summary_" + to_string(other) + ".csv"), alt, bins);

  const DensityField ref = rebin(s.rho, bins);
  for (std::size_t k = 0; k < ens.positions.size(); ++k) {
    const double t = ens.snapshotTimes[k];
    const auto emp = empirical_density(ens, k, bins);
    const auto empAlt = empirical_density(alt, k, bins);
    write_density_csv(ctx.file("densities/t" + format_number(t) + ".csv"), emp, &ref);
    const double l1 = compare_densities(emp, ref).l1Distance;
    const double l1Alt = compare_densities(empAlt, ref).l1Distance;
    meas["l1"].push_back({{"time", t}, {to_string(mode), l1}, {to_string(other), l1Alt}});
    if (k == 0) continue;  // the initial draw
    ctx.report.check("quantum.density_l1_t" + format_number(t), l1, "<", ctx.crit("density_l1"));
    ctx.report.check("quantum." + to_string(other) + "_l1_t" + format_number(t), l1Alt, "<",
                     ctx.crit("density_l1"), false, "discrepancy of the alternative drift mode; reported only");
  }
  meas["variance_target"] = s.rho.variance();
  meas["ensemble"] = variance_list(ens);
  meas["alternative"] = variance_list(alt);
  meas["sigma2"] = s.sigma2;
}

// ---------------------------------------------------------------------------

void run_duality(Context& ctx) {
  const Stationary s = stationary_setup(ctx);
  const GridSpec& grid = s.drift.grid;
  const GridSpec bins = ctx.bins();
  const double T = static_cast<double>(ctx.steps()) * ctx.dt();
  json& meas = ctx.report.measurements;
  const Eigen::MatrixXd bF = generative(s, Direction::Forward, ctx.mode(), std::max(T, 1.0));
  const Eigen::MatrixXd bB = generative(s, Direction::Backward, ctx.mode(), std::max(T, 1.0));
  write_drift_csv(ctx.file("drift/forward.csv"), s.drift, &bF);
  write_drift_csv(ctx.file("drift/backward.csv"), s.drift, &bB);

  std::vector<Index> every;
  for (Index k = 0; k <= ctx.steps(); ++k) every.push_back(k);
  const Eigen::MatrixXd initial = initial_positions(ctx, s.rho, derive_seed(ctx.seed(), 0));
  const auto ens = simulate_ensemble(stationary_drift(GridInterpolator(grid, bF)), channels_for(ctx, 1), initial,
                                     ensemble_options(ctx, derive_seed(ctx.seed(), 1), Direction::Forward, 0.0, every));
  const auto estF = estimate_ito_velocity(ens, Direction::Forward, bins);
  const auto estB = estimate_ito_velocity(ens, Direction::Backward, bins);
  const double slopeF = fit_line(estF).slope;
  const double slopeB = fit_line(estB).slope;

  const double lo = bins.axis(0).lower;
  const double hi = bins.axis(0).upper;
  const double inF = field_slope(grid, bF.col(0), lo, hi);
  const double inB = field_slope(grid, bB.col(0), lo, hi);
  const Eigen::VectorXd logRho = s.rho.values().array().log().matrix();
  const Eigen::VectorXd osmotic = s.sigma2 * central_difference<double>(grid, logRho, 0);
  const double inOsm = field_slope(grid, osmotic, lo, hi);
  ctx.report.check("ito.forward_slope_relative_error", std::abs(slopeF / inF - 1.0), "<", ctx.crit("slope_relative"));
  ctx.report.check("ito.backward_slope_relative_error", std::abs(slopeB / inB - 1.0), "<", ctx.crit("slope_relative"));
  ctx.report.check("ito.osmotic_relative_error", std::abs((slopeF - slopeB) / inOsm - 1.0), "<",
                   ctx.crit("osmotic_relative"));
  meas["ito"] = {{"forward_slope", slopeF},   {"backward_slope", slopeB}, {"input_forward_slope", inF},
                 {"input_backward_slope", inB}, {"osmotic_slope", inOsm},   {"dropped_bins", estF.droppedBins}};
  if (estF.centers == estB.centers) {
    std::vector<double> ref;
    const GridInterpolator osm(grid, osmotic);
    for (double c : estF.centers) {
      Point x(1);
      x << c;
      Point o;
      osm(x, o);
      ref.push_back(o(0));
    }
    std::vector<double> diff;
    for (std::size_t i = 0; i < estF.values.size(); ++i) diff.push_back(estF.values[i] - estB.values[i]);
    write_csv(ctx.file("curves/ito_velocity.csv"), {"x", "forward", "backward", "difference", "osmotic"},
              {estF.centers, estF.values, estB.values, diff, ref});
  }

  // <rho(t), f> = <rho0, f(t)> for the Fokker-Planck oracle and the backward
  // Kolmogorov evolver, from a non-stationary start.
  const double horizon = ctx.cfg.number("evolution.time");
  const GridInterpolator interp(grid, bF);
  const ScalarDrift fp = scalar_drift(interp);
  const double h = grid.axis(0).spacing();
  const double limit = std::min(fokker_planck_max_step(grid, fp, s.sigma2), h * h / (2.0 * s.sigma2));
  const auto n = static_cast<Index>(std::ceil(horizon / (0.5 * limit)));
  const double step = horizon / static_cast<double>(n);
  const DensityField rho0 = gaussian_density(grid, 1.0, 0.3);
  Eigen::VectorXd f0(grid.size());
  for (Index i = 0; i < grid.size(); ++i) f0(i) = std::tanh(grid.coordinate(i, 0));
  const auto rhoT = evolve_fokker_planck(rho0, fp, s.sigma2, step, n);
  const Eigen::VectorXd fT = evolve_backward_kolmogorov(grid, f0, fp, s.sigma2, step, n);
  const double lhs = rhoT.values().dot(f0) * h;
  const double rhs = rho0.values().dot(fT) * h;
  write_density_csv(ctx.file("densities/oracle_start.csv"), rho0);
  write_density_csv(ctx.file("densities/oracle_end.csv"), rhoT);
  ctx.report.check("oracle.duality_gap", std::abs(lhs - rhs), "<", ctx.crit("duality"));
  meas["duality"] = {{"forward_pairing", lhs}, {"backward_pairing", rhs}, {"steps", n}, {"dt", step}};
}

// ---------------------------------------------------------------------------

void run_hamilton_jacobi(Context& ctx) {
  const GridSpec grid = ctx.grid();
  if (ctx.ring()) throw InvalidSpec("hamilton-jacobi needs a line grid");
  json& meas = ctx.report.measurements;
  const StateParams params = ctx.state();
  const auto st = analytic_state("harmonic-ground", grid, ctx.alpha(), params);
  const auto drift = drift_from_wave(st.psi, st.potential, st.particle);
  write_drift_csv(ctx.file("drift/oscillator.csv"), drift);

  double zero = 0.0;
  for (Branch b : {Branch::Plus, Branch::Minus}) {
    zero = std::max(zero, hamilton_jacobi_norm(hamilton_jacobi_residual(
                              drift, st.potential, st.particle, b, TimeDerivative::stationary_field())));
  }
  ctx.report.check("hj.oscillator_residual", zero, "<", ctx.crit("hj_zero"));

  PotentialSet flipped = st.potential;
  flipped.scalar = [u = st.potential.scalar](const Point& x, double t) { return -u(x, t); };
  const auto r = hamilton_jacobi_residual(drift, flipped, st.particle, Branch::Plus, TimeDerivative::stationary_field());
  const double m = st.particle.mass;
  const double w = params.omega;
  // The paired potential is -/+ m w^2 x^2 / 2; flipping it leaves 2 grad U.
  const double slope = -2.0 * st.potential.scalar(Point::Ones(1), 0.0) * 2.0;
  const auto mask = interior_mask(grid, 2);
  double flipErr = 0.0;
  std::vector<double> xs, rs;
  for (Index i = 0; i < grid.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const double x = grid.coordinate(i, 0);
    flipErr = std::max(flipErr, std::abs(r(i, 0) - slope * x));
    xs.push_back(x);
    rs.push_back(r(i, 0).real());
  }
  write_csv(ctx.file("curves/sign_flip_residual.csv"), {"x", "residual"}, {xs, rs});
  ctx.report.check("hj.sign_flip_residual_error", flipErr, "<", ctx.crit("hj_sign_flip"));
  meas["sign_flip_slope"] = slope;
  meas["sign_flip_expected_slope"] = 2.0 * m * w * w;

  // Free packet at alpha = i, refined in space and time together (tau = h).
  const DiffusionConstant quantum(ctx.cfg.number("alpha.magnitude"), kPi / 2);
  StateParams p = params;
  const double t0 = p.time;
  auto residual_on = [&](Index cells) {
    const GridSpec g = GridSpec::line(grid.axis(0).lower, grid.axis(0).upper, cells, grid.time_step());
    const auto packet = analytic_state("free-gaussian-packet", g, quantum, p);
    const double tau = g.axis(0).spacing();
    auto drift_at = [&](double t) {
      Eigen::VectorXcd v(g.size());
      for (Index i = 0; i < g.size(); ++i) v(i) = packet.exact(g.point(i), t);
      return drift_from_wave(WaveField(g, v, Branch::Minus, t, quantum), packet.potential, packet.particle);
    };
    const auto d = drift_at(t0);
    return hamilton_jacobi_norm(hamilton_jacobi_residual(
        d, packet.potential, packet.particle, Branch::Minus,
        TimeDerivative::from_slices(drift_at(t0 - tau).wMinus, drift_at(t0 + tau).wMinus, tau)));
  };
  const Index coarse = ctx.cfg.integer("refinement.cells");
  const double r1 = residual_on(coarse);
  const double r2 = residual_on(2 * coarse);
  const double r3 = residual_on(4 * coarse);
  const double order = std::log2(r2 / r3);
  meas["packet_residuals"] = {r1, r2, r3};
  meas["packet_orders"] = {std::log2(r1 / r2), order};
  ctx.report.check("hj.free_packet_order", order, ">=", ctx.crit("hj_order"));
}

// ---------------------------------------------------------------------------

void run_ring_winding(Context& ctx) {
  const GridSpec grid = ctx.grid();
  if (!ctx.ring()) throw InvalidSpec("ring-winding needs ring topology");
  const DiffusionConstant alpha = ctx.alpha();
  json& meas = ctx.report.measurements;
  const auto K = static_cast<int>(ctx.cfg.integer("ring.max_winding"));
  StateParams params = ctx.state();
  std::vector<CatalogState> states;
  double mismatches = 0.0;
  double loopErr = 0.0;
  std::vector<double> ks, windings, raws;
  for (int k = -K; k <= K; ++k) {
    states.push_back(analytic_state("ring-eigenstate-" + std::to_string(k), grid, alpha, params));
    const auto w = winding_number(states.back().psi);
    if (w.winding != k) mismatches += 1.0;
    loopErr = std::max(loopErr, std::abs(w.loopIntegral - 2.0 * kPi * Complex(0, 1) * alpha.value() * static_cast<double>(k)));
    ks.push_back(k);
    windings.push_back(w.winding);
    raws.push_back(w.raw);
  }
  write_csv(ctx.file("curves/windings.csv"), {"k", "winding", "raw"}, {ks, windings, raws});
  ctx.report.check("ring.winding_mismatches", mismatches, "==", 0.0);
  double productMismatches = 0.0;
  for (int a = -K; a <= K; ++a) {
    for (int b = -K; b <= K; ++b) {
      const auto& sa = states[static_cast<std::size_t>(a + K)].psi;
      const auto& sb = states[static_cast<std::size_t>(b + K)].psi;
      const WaveField prod(grid, sa.amplitudes().cwiseProduct(sb.amplitudes()), Branch::Minus, 0.0, alpha);
      if (winding_number(prod).winding != a + b) productMismatches += 1.0;
    }
  }
  ctx.report.check("ring.product_additivity_mismatches", productMismatches, "==", 0.0);
  ctx.report.check("ring.loop_integral_error", loopErr, "<", 1e-8, false, "loop integral of alpha dlnPsi");

  // Ensemble on the ring driven by the chosen eigenstate; windings reported.
  const int level = params.level;
  const auto st = analytic_state("ring-eigenstate-" + std::to_string(level), grid, alpha, params);
  const auto drift = drift_from_wave(st.psi, st.potential, st.particle);
  const auto rho = density_from_wave(st.psi, NormConvention::L2);
  const double T = static_cast<double>(ctx.steps()) * ctx.dt();
  GenerativeDriftOptions gopt;
  gopt.wMax = default_drift_clip(grid, T);
  const Eigen::MatrixXd b = generative_drift(drift, rho, real_channel_variance(alpha, st.particle),
                                             ctx.direction(), ctx.mode(), gopt);
  write_drift_csv(ctx.file("drift/ring.csv"), drift, &b);
  auto opt = ensemble_options(ctx, derive_seed(ctx.seed(), 1), ctx.direction(),
                              ctx.direction() == Direction::Forward ? 0.0 : T,
                              snapshot_steps(ctx.cfg.numbers("ensemble.snapshots"), ctx.dt(), ctx.steps()));
  opt.ring = grid.axis(0);
  const Eigen::MatrixXd initial = initial_positions(ctx, rho, derive_seed(ctx.seed(), 0));
  const auto ens = simulate_ensemble(stationary_drift(GridInterpolator(grid, b)), channels_for(ctx, 1), initial, opt);
  export_paths(ctx, stationary_drift(GridInterpolator(grid, b)), channels_for(ctx, 1), initial, opt, "ring");
  write_ensemble_summary_csv(ctx.file("densities/ring_summary.csv"), ens, ctx.bins());
  const double meanWinding = ens.windings.cast<double>().mean();
  meas["ensemble_mean_winding"] = meanWinding;
  meas["ensemble_expected_winding"] = b.col(0).mean() * T / grid.axis(0).length();
  meas["ensemble_winding_min"] = ens.windings.minCoeff();
  meas["ensemble_winding_max"] = ens.windings.maxCoeff();
}

// ---------------------------------------------------------------------------

void run_uncertainty(Context& ctx) {
  const GridSpec grid = ctx.grid();
  const DiffusionConstant alpha = ctx.alpha();
  json& meas = ctx.report.measurements;
  StateParams p = ctx.state();

  double gaussErr = 0.0;
  UncertaintyReport base;
  for (double scale : {1.0, 0.5}) {
    StateParams q = p;
    q.sigma = p.sigma * scale;
    const auto r = uncertainty_product(analytic_state("free-gaussian-packet", grid, alpha, q).psi);
    gaussErr = std::max(gaussErr, std::abs(r.product - r.bound));
    meas["gaussians"].push_back({{"sigma", q.sigma}, {"product", r.product}, {"bound", r.bound}});
    if (scale == 1.0) base = r;
    if (scale == 1.0) {
      write_density_csv(ctx.file("densities/gaussian.csv"),
                        density_from_wave(analytic_state("free-gaussian-packet", grid, alpha, q).psi, NormConvention::L2));
    }
  }
  ctx.report.check("uncertainty.gaussian_product_error", gaussErr, "<", ctx.crit("uncertainty_gaussian"));
  const double formula = 0.5 * alpha.magnitude() * (1.0 + std::cos(alpha.phase()));
  ctx.report.check("uncertainty.bound_formula_error", std::abs(base.bound - formula), "<=", 1e-15);
  meas["bound"] = base.bound;

  const auto levels = static_cast<int>(ctx.cfg.integer("uncertainty.levels"));
  std::vector<CatalogState> states;
  for (int k = 0; k < levels; ++k) {
    states.push_back(analytic_state("harmonic-excited-" + std::to_string(k), grid, alpha, p));
  }
  const auto first = uncertainty_product(states.size() > 1 ? states[1].psi : states[0].psi);
  meas["first_excited_product"] = first.product;
  const GaussianField rng(static_cast<std::uint64_t>(ctx.cfg.integer("uncertainty.seed")));
  double minProduct = INFINITY;
  double unsatisfied = 0.0;
  std::vector<double> trials, products;
  for (Index t = 0; t < ctx.cfg.integer("uncertainty.trials"); ++t) {
    std::vector<Complex> c;
    for (int k = 0; k < levels; ++k) {
      const auto [a, b] = rng.normals(static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k), 0);
      c.emplace_back(a, b);
    }
    const auto r = uncertainty_product(superpose(c, states, 0.0));
    minProduct = std::min(minProduct, r.product);
    if (!r.satisfied) unsatisfied += 1.0;
    trials.push_back(static_cast<double>(t));
    products.push_back(r.product);
  }
  write_csv(ctx.file("curves/uncertainty_family.csv"), {"trial", "product"}, {trials, products});
  ctx.report.check("uncertainty.family_min_product", minProduct, ">=", base.bound - ctx.crit("uncertainty_slack"));
  meas["family_unsatisfied"] = unsatisfied;

  for (double phi : ctx.cfg.numbers("uncertainty.report_phases")) {
    const DiffusionConstant a(alpha.magnitude(), phi);
    const auto r = uncertainty_product(analytic_state("free-gaussian-packet", grid, a, p).psi);
    meas["general_phase"].push_back(
        {{"phase", phi}, {"product", r.product}, {"bound", r.bound}, {"asserted", r.asserted}});
  }
}

// ---------------------------------------------------------------------------

void run_kg_causality(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const DiffusionConstant alpha = ctx.alpha();
  const ParticleSpec particle = ctx.particle();
  const int n = particle.dimension;
  const auto spec = fix_epsilon_gauge(particle, static_cast<int>(cfg.integer("relativistic.mass_squared_sign")), ctx.dt());
  if (!spec.sampleable) throw InvalidSpec("the m^2 < 0 branch is gauge-fixed only and cannot be sampled");
  json& meas = ctx.report.measurements;

  const double L = cfg.number("relativistic.box");
  const Index cells = cfg.integer("relativistic.cells");
  std::vector<Axis> axes(static_cast<std::size_t>(n), Axis{-0.5 * L, 0.5 * L, cells, true});
  const GridSpec space = GridSpec::box(axes, ctx.dt());
  const double width = cfg.number("relativistic.packet_width");
  const double kc = 2.0 * kPi * static_cast<double>(cfg.integer("relativistic.carrier")) / L;
  Eigen::VectorXcd phi(space.size());
  for (Index i = 0; i < space.size(); ++i) {
    const Point x = space.point(i);
    phi(i) = std::exp(-x.squaredNorm() / (4.0 * width * width)) * std::polar(1.0, kc * x(0));
  }
  const auto modes = evolve_kg_spectral(WaveField(space, phi, Branch::Minus, 0.0, alpha), particle, alpha, spec.epsilon);

  Eigen::VectorXd carrier = Eigen::VectorXd::Zero(n);
  carrier(0) = kc;
  const double shell = mass_shell_residual(std::sqrt(particle.mass * particle.mass + kc * kc), carrier,
                                           particle.mass, alpha);
  ctx.report.check("kg.plane_wave_shell_residual", shell, "<=", ctx.crit("shell_residual"));
  meas["packet_shell_residual"] = modes.shell_residual();

  const SpacetimeDriftTable table(modes, cfg.number("relativistic.x0_lower"), cfg.number("relativistic.x0_upper"),
                                  cfg.integer("relativistic.slices"));
  const auto channels = relativistic_channels(alpha, spec, n);
  const double sigma2 = channels[1].real_variance();
  const DriftFunction drift = relativistic_drift(table, sigma2, ctx.mode(), Direction::Forward);

  const auto windows = cfg.numbers("relativistic.windows");
  const double anchor = cfg.number("relativistic.anchor");
  const double dl = ctx.dt();
  const auto steps = static_cast<Index>(std::llround((anchor + *std::max_element(windows.begin(), windows.end())) / dl));
  std::vector<double> times{anchor};
  for (double w : windows) times.push_back(anchor + w);

  const DensityField rho = DensityField(space, phi.cwiseAbs2(), NormConvention::L2).normalized();
  const Eigen::MatrixXd spatial = draw_initial_positions(rho, ctx.paths(), derive_seed(ctx.seed(), 0));
  Eigen::MatrixXd initial = Eigen::MatrixXd::Zero(ctx.paths(), n + 1);
  initial.rightCols(n) = spatial;

  EnsembleOptions opt;
  opt.steps = steps;
  opt.dt = dl;
  opt.seed = derive_seed(ctx.seed(), 1);
  opt.snapshots = snapshot_steps(times, dl, steps);
  opt.threads = ctx.threads;
  opt.mode = ctx.mode();
  const auto ens = simulate_ensemble(drift, channels, initial, opt);

  const auto rep = causality_statistics([&](const Point& x) { return table.current_velocity(x); }, ens, spec,
                                        alpha, windows, anchor);
  const double rel = rep.target != 0.0 ? std::abs(rep.energyMomentum / rep.target - 1.0)
                                       : std::abs(rep.energyMomentum);
  ctx.report.check("kg.energy_momentum_relative_error", rel, "<", ctx.crit("energy_momentum_relative"));
  double rise = -INFINITY;
  for (std::size_t i = 0; i + 1 < rep.violationFractions.size(); ++i) {
    rise = std::max(rise, rep.violationFractions[i + 1] - rep.violationFractions[i]);
  }
  ctx.report.check("kg.violation_fraction_max_increase", rise, "<", 0.0, true,
                   "strictly decreasing across windows");
  write_csv(ctx.file("curves/causality.csv"), {"window", "spacelike_fraction"}, {rep.windows, rep.violationFractions});

  // x1 marginal at the anchor.
  const GridSpec bins = GridSpec::line(-0.5 * L, 0.5 * L, 48, 0.01);
  PathEnsemble slice;
  slice.paths = ens.paths;
  slice.dimension = 1;
  slice.steps = 1;
  slice.dt = 1.0;
  slice.snapshotSteps = {0};
  slice.snapshotTimes = {anchor};
  slice.positions = {ens.positions[ens.snapshot_at(anchor)].col(1)};
  for (Index p = 0; p < slice.paths; ++p) wrap_periodic(slice.positions[0](p, 0), axes[0]);
  write_density_csv(ctx.file("densities/x1_at_anchor.csv"), empirical_density(slice, 0, bins));

  meas["epsilon"] = spec.epsilon;
  meas["affine_parameter"] = spec.affineParameter;
  meas["energy_momentum"] = rep.energyMomentum;
  meas["energy_momentum_standard_error"] = rep.energyMomentumError;
  meas["energy_momentum_target"] = rep.target;
  meas["threshold_scale"] = rep.threshold;
  meas["windows"] = rep.windows;
  meas["violation_fractions"] = rep.violationFractions;
}

using Pipeline = void (*)(Context&);

const std::vector<std::pair<std::string, Pipeline>>& pipelines() {
  static const std::vector<std::pair<std::string, Pipeline>> table = {
      {"backward-forward-duality", run_duality},   {"free-packet-spreading", run_free_packet},
      {"hamilton-jacobi", run_hamilton_jacobi},    {"kg-causality", run_kg_causality},
      {"noise-covariance-sweep", run_noise},       {"ou-stationary", run_ou_stationary},
      {"quantum-ho-ground", run_quantum_ho},       {"ring-winding", run_ring_winding},
      {"uncertainty-family", run_uncertainty},
  };
  return table;
}

void write_json(const fs::path& file, const json& j) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  os << j.dump(2) << '\n';
}

}  // namespace

std::vector<std::string> pipeline_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : pipelines()) names.push_back(name);
  return names;
}

ScenarioReport run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  ScenarioConfig cfg = config;
  if (!options.outDir.empty()) cfg.set("outputs.directory", options.outDir.string());
  cfg.validate();
  const fs::path out = cfg.text("outputs.directory");
  fs::create_directories(out);

  json manifest = cfg.to_json();
  manifest["manifest"] = {
      {"library", "cdiff 1.0.0"},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
      {"compiler", __VERSION__},
      {"seed", cfg.integer("ensemble.seed")},
      {"source", cfg.source()}};
  write_json(out / "manifest.json", manifest);

  Context ctx{cfg, out, std::max(1, options.threads), {}};
  ctx.report.scenario = cfg.text("scenario");
  ctx.report.pipeline = cfg.text("pipeline");
  for (const auto& [name, fn] : pipelines()) {
    if (name == ctx.report.pipeline) fn(ctx);
  }
  write_json(out / "report.json", ctx.report.to_json());
  return ctx.report;
}

}  // namespace cdiff
