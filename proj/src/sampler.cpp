#include "cdiff/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <thread>

namespace cdiff {

namespace {

struct AxisWeights {
  Index lo = 0;
  Index hi = 0;
  double frac = 0.0;
};

AxisWeights locate(const Axis& ax, double x) {
  const double h = ax.spacing();
  AxisWeights w;
  if (ax.periodic) {
    double u = (x - ax.lower) / h;
    const double cells = static_cast<double>(ax.cells);
    u -= cells * std::floor(u / cells);
    auto j = static_cast<Index>(std::floor(u));
    if (j >= ax.cells) j = ax.cells - 1;
    w.lo = j;
    w.hi = (j + 1) % ax.cells;
    w.frac = u - static_cast<double>(j);
    return w;
  }
  double u = (x - ax.lower) / h - 0.5;
  u = std::clamp(u, 0.0, static_cast<double>(ax.cells - 1));
  auto j = static_cast<Index>(std::floor(u));
  if (j > ax.cells - 2) j = ax.cells - 2;
  w.lo = j;
  w.hi = j + 1;
  w.frac = u - static_cast<double>(j);
  return w;
}

}  // namespace

GridInterpolator::GridInterpolator(GridSpec grid, Eigen::MatrixXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.rows() != grid_.size()) throw InvalidSpec("interpolated field does not match grid");
  if (!values_.allFinite()) throw NumericalGuard("interpolated field is not finite");
}

void GridInterpolator::operator()(const Point& x, Point& out) const {
  const int n = grid_.dimension();
  AxisWeights w[4];
  for (int a = 0; a < n; ++a) w[a] = locate(grid_.axis(a), x(a));
  out.setZero(values_.cols());
  for (int corner = 0; corner < (1 << n); ++corner) {
    double weight = 1.0;
    Index flat = 0;
    for (int a = 0; a < n; ++a) {
      const bool upper = (corner >> a) & 1;
      weight *= upper ? w[a].frac : 1.0 - w[a].frac;
      flat += (upper ? w[a].hi : w[a].lo) * grid_.stride(a);
    }
    if (weight != 0.0) out += weight * values_.row(flat).transpose();
  }
}

DriftFunction stationary_drift(GridInterpolator interp) {
  return [interp = std::move(interp)](const Point& x, double, Point& out) { interp(x, out); };
}

DriftFunction time_series_drift(std::vector<double> times, std::vector<GridInterpolator> slices) {
  if (times.empty() || times.size() != slices.size()) {
    throw InvalidSpec("time series drift needs one grid per time");
  }
  if (!std::is_sorted(times.begin(), times.end())) {
    throw InvalidSpec("time series drift times must increase");
  }
  return [times = std::move(times), slices = std::move(slices)](const Point& x, double t,
                                                                 Point& out) {
    if (t <= times.front()) return slices.front()(x, out);
    if (t >= times.back()) return slices.back()(x, out);
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const auto k = static_cast<std::size_t>(it - times.begin());
    const double f = (t - times[k - 1]) / (times[k] - times[k - 1]);
    Point lo;
    Point hi;
    slices[k - 1](x, lo);
    slices[k](x, hi);
    out = (1.0 - f) * lo + f * hi;
  };
}

int wrap_periodic(double& x, const Axis& axis) {
  const double turns = std::floor((x - axis.lower) / axis.length());
  x -= turns * axis.length();
  if (x >= axis.upper) x = axis.lower;  // round-off at the seam
  return static_cast<int>(turns);
}

std::size_t PathEnsemble::snapshot_at(double time) const {
  for (std::size_t s = 0; s < snapshotTimes.size(); ++s) {
    if (std::abs(snapshotTimes[s] - time) <= 0.5 * dt) return s;
  }
  throw InvalidSpec("no snapshot recorded at t = " + std::to_string(time));
}

PathEnsemble simulate_ensemble(const DriftFunction& drift,
                               const std::vector<ChannelCovariance>& channels,
                               const Eigen::MatrixXd& initial, const EnsembleOptions& options) {
  if (options.steps < 1) throw InvalidSpec("ensemble needs at least one step");
  if (!(options.dt > 0.0)) throw InvalidSpec("ensemble step must be positive");
  const Index paths = initial.rows();
  const int n = static_cast<int>(initial.cols());
  if (paths < 1) throw InvalidSpec("ensemble needs at least one path");
  if (static_cast<int>(channels.size()) != n) {
    throw InvalidSpec("one channel covariance per coordinate is required");
  }
  if (n > 4) throw InvalidSpec("at most four coordinates are supported");
  if (options.ring && n != 1) throw InvalidSpec("ring ensembles are one-dimensional");
  if (!initial.allFinite()) throw InvalidSpec("initial positions are not finite");

  std::vector<ComplexNoise> noise;
  noise.reserve(channels.size());
  for (const auto& cov : channels) noise.emplace_back(cov, options.seed);

  PathEnsemble out;
  out.paths = paths;
  out.dimension = n;
  out.steps = options.steps;
  out.dt = options.dt;
  out.direction = options.direction;
  out.seed = options.seed;
  out.mode = options.mode;
  out.ring = options.ring;
  out.snapshotSteps = options.snapshots;
  std::sort(out.snapshotSteps.begin(), out.snapshotSteps.end());
  out.snapshotSteps.erase(std::unique(out.snapshotSteps.begin(), out.snapshotSteps.end()),
                          out.snapshotSteps.end());
  for (Index k : out.snapshotSteps) {
    if (k < 0 || k > options.steps) throw InvalidSpec("snapshot step outside the run");
  }
  const double s = static_cast<double>(sign(options.direction));
  for (Index k : out.snapshotSteps) {
    out.snapshotTimes.push_back(options.startTime + s * static_cast<double>(k) * options.dt);
  }
  out.positions.assign(out.snapshotSteps.size(), Eigen::MatrixXd(paths, n));
  if (options.trackImaginary) out.imaginary.assign(out.snapshotSteps.size(), Eigen::MatrixXd(paths, n));
  out.squaredIncrements = Eigen::MatrixXd::Zero(paths, n);
  out.windings = Eigen::VectorXi::Zero(options.ring ? paths : 0);
  if (options.keepPaths) {
    out.fullPaths.assign(static_cast<std::size_t>(paths * (options.steps + 1) * n), 0.0);
  }

  const double sqrtDt = std::sqrt(options.dt);
  auto run_range = [&](Index begin, Index end) {
    Point x(n);
    Point y(n);
    Point b(n);
    Point increment(n);
    for (Index p = begin; p < end; ++p) {
      x = initial.row(p).transpose();
      y.setZero();
      int winding = 0;
      if (options.ring) winding += wrap_periodic(x(0), *options.ring);
      double t = options.startTime;
      std::size_t next = 0;
      auto record = [&](Index k) {
        while (next < out.snapshotSteps.size() && out.snapshotSteps[next] == k) {
          out.positions[next].row(p) = x.transpose();
          if (options.trackImaginary) out.imaginary[next].row(p) = y.transpose();
          ++next;
        }
        if (options.keepPaths) {
          const auto base = static_cast<std::size_t>((p * (options.steps + 1) + k) * n);
          for (int c = 0; c < n; ++c) out.fullPaths[base + static_cast<std::size_t>(c)] = x(c);
        }
      };
      record(0);
      for (Index k = 0; k < options.steps; ++k) {
        drift(x, t, b);
        for (int c = 0; c < n; ++c) {
          const Complex dm = noise[static_cast<std::size_t>(c)].increment(
              static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(k),
              static_cast<std::uint32_t>(c), sqrtDt);
          increment(c) = s * b(c) * options.dt + dm.real();
          y(c) += dm.imag();
        }
        if (!increment.allFinite()) {
          throw NumericalGuard("drift produced a non-finite increment at t = " + std::to_string(t));
        }
        x += increment;
        out.squaredIncrements.row(p) += increment.cwiseAbs2().transpose();
        if (options.ring) winding += wrap_periodic(x(0), *options.ring);
        t += s * options.dt;
        record(k + 1);
      }
      if (options.ring) out.windings(p) = winding;
    }
  };

  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(paths)));
  if (threads == 1) {
    run_range(0, paths);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    const Index chunk = (paths + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      const Index begin = std::min(paths, w * chunk);
      const Index end = std::min(paths, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          run_range(begin, end);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return out;
}

Eigen::MatrixXd draw_initial_positions(const DensityField& density, Index count,
                                       std::uint64_t seed) {
  if (count < 1) throw InvalidSpec("need at least one initial position");
  const GridSpec& grid = density.grid();
  const Eigen::VectorXd& w = density.values();
  const double total = w.sum();
  if (!(total > 0.0) || !std::isfinite(total)) throw InvalidSpec("density is not normalizable");
  std::vector<double> cdf(static_cast<std::size_t>(w.size()));
  double acc = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    acc += w(i) / total;
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  cdf.back() = 1.0;
  const GaussianField rng(seed);
  const int n = grid.dimension();
  Eigen::MatrixXd out(count, n);
  for (Index p = 0; p < count; ++p) {
    const double u = rng.uniform(static_cast<std::uint64_t>(p), 0, 0);
    auto cell = static_cast<Index>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    // Skip empty cells that share a CDF value with their predecessor.
    while (w(cell) == 0.0 && cell + 1 < w.size()) ++cell;
    for (int a = 0; a < n; ++a) {
      const Axis& ax = grid.axis(a);
      const double jitter = rng.uniform(static_cast<std::uint64_t>(p), 0, static_cast<std::uint32_t>(a + 1)) - 0.5;
      double x = grid.coordinate(cell, a) + jitter * ax.spacing();
      if (ax.periodic) wrap_periodic(x, ax);
      out(p, a) = x;
    }
  }
  return out;
}

Eigen::MatrixXd point_mass_positions(const Point& x0, Index count) {
  if (count < 1) throw InvalidSpec("need at least one initial position");
  Eigen::MatrixXd out(count, x0.size());
  for (Index p = 0; p < count; ++p) out.row(p) = x0.transpose();
  return out;
}

void write_paths_binary(const PathEnsemble& ensemble, const std::string& path) {
  if (ensemble.fullPaths.empty()) throw InvalidSpec("ensemble was run without full-path storage");
  static_assert(std::endian::native == std::endian::little, "binary export assumes little endian");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  const std::uint64_t header[3] = {static_cast<std::uint64_t>(ensemble.paths),
                                   static_cast<std::uint64_t>(ensemble.steps),
                                   static_cast<std::uint64_t>(ensemble.dimension)};
  os.write(reinterpret_cast<const char*>(header), sizeof(header));
  os.write(reinterpret_cast<const char*>(&ensemble.dt), sizeof(double));
  os.write(reinterpret_cast<const char*>(&ensemble.seed), sizeof(std::uint64_t));
  os.write(reinterpret_cast<const char*>(ensemble.fullPaths.data()),
           static_cast<std::streamsize>(ensemble.fullPaths.size() * sizeof(double)));
}

}  // namespace cdiff
