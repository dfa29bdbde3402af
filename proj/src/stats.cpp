#include "cdiff/stats.hpp"

#include <cmath>
#include <limits>

#include "cdiff/moments.hpp"

namespace cdiff {

namespace {

// Cell index along axis a, or -1 outside a bounded axis.
Index cell_of(const Axis& ax, double x) {
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

}  // namespace

DensityField empirical_density(const PathEnsemble& ensemble, std::size_t snapshot,
                               const GridSpec& grid) {
  if (ensemble.paths < 1) throw InvalidSpec("empirical density of an empty ensemble");
  if (snapshot >= ensemble.positions.size()) throw InvalidSpec("snapshot index out of range");
  if (grid.dimension() > ensemble.dimension) throw InvalidSpec("histogram grid has too many axes");
  const Eigen::MatrixXd& x = ensemble.positions[snapshot];
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(grid.size());
  double inside = 0.0;
  for (Index p = 0; p < ensemble.paths; ++p) {
    Index flat = 0;
    bool ok = true;
    for (int a = 0; a < grid.dimension() && ok; ++a) {
      const Index c = cell_of(grid.axis(a), x(p, a));
      if (c < 0) ok = false;
      flat += c * grid.stride(a);
    }
    if (!ok) continue;
    counts(flat) += 1.0;
    inside += 1.0;
  }
  if (inside == 0.0) throw InvalidSpec("no samples fall inside the histogram grid");
  return {grid, counts / (inside * grid.cell_volume()), NormConvention::L2};
}

ComparisonReport compare_densities(const DensityField& a, const DensityField& b) {
  if (!(a.grid() == b.grid())) throw InvalidSpec("compared densities live on different grids");
  const double vol = a.grid().cell_volume();
  ComparisonReport r;
  const Eigen::VectorXd diff = a.values() - b.values();
  r.l1Distance = diff.cwiseAbs().sum() * vol;
  r.maxAbs = diff.cwiseAbs().maxCoeff();
  double kl = 0.0;
  for (Index i = 0; i < a.values().size(); ++i) {
    const double p = a.values()(i);
    if (p <= 0.0) continue;
    kl += p * std::log(p / std::max(b.values()(i), kKlFloor));
  }
  r.klDivergence = std::max(0.0, kl * vol);
  return r;
}

ItoVelocityEstimate estimate_ito_velocity(const PathEnsemble& ensemble, Direction which,
                                          const GridSpec& bins, Index minCount) {
  if (bins.dimension() != 1) throw InvalidSpec("Ito velocity bins are one-dimensional");
  const Axis& ax = bins.axis(0);
  const Index nb = bins.size();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(nb);
  Eigen::VectorXd sumSq = Eigen::VectorXd::Zero(nb);
  Eigen::VectorXi count = Eigen::VectorXi::Zero(nb);
  const double dt = ensemble.dt;
  const bool forwardRun = ensemble.direction == Direction::Forward;
  Index pairs = 0;
  for (std::size_t s = 0; s + 1 < ensemble.snapshotSteps.size(); ++s) {
    if (ensemble.snapshotSteps[s + 1] != ensemble.snapshotSteps[s] + 1) continue;
    ++pairs;
    // Order the pair in physical time.
    const Eigen::MatrixXd& early = forwardRun ? ensemble.positions[s] : ensemble.positions[s + 1];
    const Eigen::MatrixXd& late = forwardRun ? ensemble.positions[s + 1] : ensemble.positions[s];
    for (Index p = 0; p < ensemble.paths; ++p) {
      double dx = late(p, 0) - early(p, 0);
      if (ensemble.ring) {
        const double l = ensemble.ring->length();
        dx -= l * std::round(dx / l);
      }
      const double anchor = which == Direction::Forward ? early(p, 0) : late(p, 0);
      const Index c = cell_of(ax, anchor);
      if (c < 0) continue;
      const double rate = dx / dt;
      sum(c) += rate;
      sumSq(c) += rate * rate;
      count(c) += 1;
    }
  }
  if (pairs == 0) throw InvalidSpec("Ito velocity needs consecutive snapshot pairs");
  ItoVelocityEstimate est;
  for (Index c = 0; c < nb; ++c) {
    if (count(c) < minCount) {
      if (count(c) > 0) ++est.droppedBins;
      continue;
    }
    const double k = static_cast<double>(count(c));
    const double mean = sum(c) / k;
    const double var = std::max(0.0, (sumSq(c) / k - mean * mean) * k / (k - 1.0));
    est.centers.push_back(bins.coordinate(c, 0));
    est.values.push_back(mean);
    est.standardErrors.push_back(std::sqrt(var / k));
    est.counts.push_back(count(c));
  }
  return est;
}

LinearFit fit_line(const ItoVelocityEstimate& e) {
  double w = 0.0;
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < e.centers.size(); ++i) {
    const auto wi = static_cast<double>(e.counts[i]);
    w += wi;
    sx += wi * e.centers[i];
    sy += wi * e.values[i];
  }
  if (e.centers.size() < 2 || w == 0.0) throw InvalidSpec("line fit needs at least two bins");
  const double mx = sx / w;
  const double my = sy / w;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < e.centers.size(); ++i) {
    const auto wi = static_cast<double>(e.counts[i]);
    sxx += wi * (e.centers[i] - mx) * (e.centers[i] - mx);
    sxy += wi * (e.centers[i] - mx) * (e.values[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

UncertaintyReport uncertainty_product(const WaveField& psi) {
  const OperatorMoments m = operator_moments(psi);
  const DiffusionConstant& alpha = psi.alpha();
  UncertaintyReport r;
  r.varX = m.varX;
  r.varP = m.varP.real();
  r.product = r.varP > 0.0 ? std::sqrt(r.varX * r.varP) : std::numeric_limits<double>::quiet_NaN();
  r.bound = 0.5 * alpha.magnitude() * (1.0 + std::cos(alpha.phase()));
  r.asserted = std::abs(std::cos(alpha.phase())) < 1e-12;
  if (r.asserted) r.satisfied = r.product >= r.bound - 1e-8;
  return r;
}

CausalityReport causality_statistics(const std::function<Point(const Point&)>& velocity,
                                     const PathEnsemble& ensemble, const RelativisticSpec& spec,
                                     const DiffusionConstant& alpha,
                                     const std::vector<double>& windows, double anchor) {
  if (windows.empty()) throw InvalidSpec("causality statistics need at least one window");
  if (ensemble.paths < 2) throw InvalidSpec("causality statistics need an ensemble");
  const int dim = ensemble.dimension;
  const std::size_t a = ensemble.snapshot_at(anchor);
  const Eigen::MatrixXd& x0 = ensemble.positions[a];

  CausalityReport r;
  r.target = -spec.epsilon * spec.epsilon * spec.mass * spec.mass;
  r.threshold = (dim - 1) * alpha.magnitude() * (1.0 + std::cos(alpha.phase())) / (2.0 * spec.mass);
  double sum = 0.0;
  double sumSq = 0.0;
  for (Index p = 0; p < ensemble.paths; ++p) {
    const Point w = velocity(x0.row(p).transpose());
    const double e = -w(0) * w(0) + w.tail(dim - 1).squaredNorm();
    sum += e;
    sumSq += e * e;
  }
  const auto np = static_cast<double>(ensemble.paths);
  r.energyMomentum = sum / np;
  r.energyMomentumError = std::sqrt(std::max(0.0, sumSq / np - r.energyMomentum * r.energyMomentum) / (np - 1.0));

  for (double win : windows) {
    if (!(win > 0.0)) throw InvalidSpec("causality windows must be positive");
    const Eigen::MatrixXd& x1 = ensemble.positions[ensemble.snapshot_at(anchor + win)];
    Index spacelike = 0;
    for (Index p = 0; p < ensemble.paths; ++p) {
      const Eigen::RowVectorXd d = x1.row(p) - x0.row(p);
      if (-d(0) * d(0) + d.tail(dim - 1).squaredNorm() > 0.0) ++spacelike;
    }
    r.windows.push_back(win);
    r.violationFractions.push_back(static_cast<double>(spacelike) / np);
  }
  return r;
}

Eigen::VectorXd ensemble_quadratic_variation(const PathEnsemble& ensemble, Index minimumSteps) {
  if (ensemble.steps < 2) throw InvalidSpec("quadratic variation needs more than one step");
  if (ensemble.steps < minimumSteps) {
    throw InvalidSpec("quadratic variation needs at least " + std::to_string(minimumSteps) +
                      " steps");
  }
  return ensemble.squaredIncrements.colwise().mean().transpose() / ensemble.elapsed();
}

}  // namespace cdiff
