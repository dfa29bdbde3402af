#include "cdiff/relativistic.hpp"

#include <algorithm>
#include <cmath>

namespace cdiff {

RelativisticSpec fix_epsilon_gauge(const ParticleSpec& particle, int massSquaredSign,
                                   double affineStep) {
  particle.validate(true);
  if (!(affineStep > 0.0)) throw InvalidSpec("affine step must be positive");
  RelativisticSpec spec;
  spec.mass = particle.mass;
  spec.massSquaredSign = massSquaredSign;
  spec.affineStep = affineStep;
  switch (massSquaredSign) {
    case 1:
      if (particle.mass == 0.0) throw InvalidSpec("m^2 > 0 requires a nonzero mass");
      spec.epsilon = 1.0 / particle.mass;
      spec.affineParameter = "proper time";
      break;
    case 0:
      if (particle.mass != 0.0) throw InvalidSpec("m^2 = 0 requires zero mass");
      spec.epsilon = 1.0;
      spec.affineParameter = "normalized momentum";
      break;
    case -1:
      if (particle.mass == 0.0) throw InvalidSpec("m^2 < 0 requires a nonzero |m|");
      spec.epsilon = 1.0 / particle.mass;
      spec.affineParameter = "proper length";
      spec.sampleable = false;
      break;
    default:
      throw InvalidSpec("mass-squared sign must be +1, 0 or -1");
  }
  return spec;
}

std::vector<ChannelCovariance> relativistic_channels(const DiffusionConstant& alpha,
                                                     const RelativisticSpec& spec,
                                                     int spatialDim) {
  if (!spec.sampleable) {
    throw InvalidSpec("the m^2 < 0 branch fixes the gauge only; it is not sampled");
  }
  std::vector<ChannelCovariance> out;
  out.push_back(build_channel_covariance(alpha, spec.epsilon, -1));
  for (int i = 0; i < spatialDim; ++i) out.push_back(build_channel_covariance(alpha, spec.epsilon, 1));
  return out;
}

SpacetimeDriftTable::SpacetimeDriftTable(const KleinGordonModes& modes, double x0Lower,
                                         double x0Upper, Index slices)
    : spatial_(modes.spatial_grid()),
      x0Lower_(x0Lower),
      dx0_(0.0),
      slices_(slices),
      n_(modes.spatial_grid().dimension()),
      epsilon_(modes.epsilon()) {
  if (slices < 2 || !(x0Upper > x0Lower)) throw InvalidSpec("drift table needs >= 2 slices");
  if (n_ > 3) throw InvalidSpec("at most three spatial dimensions");
  dx0_ = (x0Upper - x0Lower) / static_cast<double>(slices - 1);

  Index dominant = 0;
  double best = -1.0;
  for (Index j = 0; j < spatial_.size(); ++j) {
    const double weight = std::abs(modes.positive()(j)) + std::abs(modes.negative()(j));
    if (weight > best) {
      best = weight;
      dominant = j;
    }
  }
  const bool positive = std::abs(modes.positive()(dominant)) >= std::abs(modes.negative()(dominant));
  carrier_.resize(n_ + 1);
  carrier_(0) = (positive ? -1.0 : 1.0) * modes.frequency(dominant);
  carrier_.tail(n_) = modes.wavevector(dominant);

  table_.reserve(static_cast<std::size_t>(slices));
  for (Index s = 0; s < slices; ++s) {
    const double x0 = x0Lower + static_cast<double>(s) * dx0_;
    const Eigen::VectorXcd phi = modes.field_at(x0);
    Eigen::MatrixXcd grad = modes.gradient_at(x0);
    for (Index i = 0; i < spatial_.size(); ++i) {
      if (phi(i) == Complex(0.0)) throw NumericalGuard("Klein-Gordon field vanishes on the table");
      for (int mu = 0; mu <= n_; ++mu) {
        grad(i, mu) = grad(i, mu) / phi(i) - Complex(0.0, carrier_(mu));
      }
    }
    table_.push_back(std::move(grad));
  }
}

void SpacetimeDriftTable::log_gradient(const Point& x,
                                       Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, 4, 1>& out) const {
  double u = (x(0) - x0Lower_) / dx0_;
  u = std::clamp(u, 0.0, static_cast<double>(slices_ - 1));
  auto s0 = static_cast<Index>(std::floor(u));
  if (s0 > slices_ - 2) s0 = slices_ - 2;
  const double ft = u - static_cast<double>(s0);

  Index lo[3];
  Index hi[3];
  double frac[3];
  for (int a = 0; a < n_; ++a) {
    const Axis& ax = spatial_.axis(a);
    const double cells = static_cast<double>(ax.cells);
    double v = (x(a + 1) - ax.lower) / ax.spacing();
    v -= cells * std::floor(v / cells);
    auto j = static_cast<Index>(std::floor(v));
    if (j >= ax.cells) j = ax.cells - 1;
    lo[a] = j;
    hi[a] = (j + 1) % ax.cells;
    frac[a] = v - static_cast<double>(j);
  }
  out.setZero(n_ + 1);
  for (int corner = 0; corner < (1 << n_); ++corner) {
    double weight = 1.0;
    Index flat = 0;
    for (int a = 0; a < n_; ++a) {
      const bool upper = (corner >> a) & 1;
      weight *= upper ? frac[a] : 1.0 - frac[a];
      flat += (upper ? hi[a] : lo[a]) * spatial_.stride(a);
    }
    if (weight == 0.0) continue;
    const auto& a0 = table_[static_cast<std::size_t>(s0)];
    const auto& a1 = table_[static_cast<std::size_t>(s0 + 1)];
    out += weight * ((1.0 - ft) * a0.row(flat).transpose() + ft * a1.row(flat).transpose());
  }
  for (int mu = 0; mu <= n_; ++mu) out(mu) += Complex(0.0, carrier_(mu));
}

Point SpacetimeDriftTable::current_velocity(const Point& x) const {
  Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, 4, 1> g;
  log_gradient(x, g);
  Point v(n_ + 1);
  v(0) = -epsilon_ * g(0).imag();
  for (int a = 1; a <= n_; ++a) v(a) = epsilon_ * g(a).imag();
  return v;
}

Point SpacetimeDriftTable::density_gradient(const Point& x) const {
  Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, 4, 1> g;
  log_gradient(x, g);
  Point d(n_ + 1);
  for (int mu = 0; mu <= n_; ++mu) d(mu) = 2.0 * g(mu).real();
  return d;
}

DriftFunction relativistic_drift(const SpacetimeDriftTable& table, double sigma2, DriftMode mode,
                                 Direction direction) {
  const double s = static_cast<double>(sign(direction));
  return [&table, sigma2, mode, s](const Point& x, double, Point& out) {
    Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, 4, 1> g;
    table.log_gradient(x, g);
    const int dim = table.dimension();
    out.resize(dim);
    const double eps = table.epsilon();
    for (int mu = 0; mu < dim; ++mu) {
      out(mu) = (mu == 0 ? -eps : eps) * g(mu).imag();
      if (mode == DriftMode::DensityConsistent) out(mu) += s * sigma2 * g(mu).real();
    }
  };
}

}  // namespace cdiff
