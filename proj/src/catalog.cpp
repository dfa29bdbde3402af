#include "cdiff/catalog.hpp"

#include <cmath>
#include <sstream>

namespace cdiff {

namespace {

constexpr double kPi = std::numbers::pi;

// Normalized Hermite functions phi_k(xi), stable three-term recurrence.
double hermite_function(int k, double xi) {
  double prev = 0.0;
  double cur = std::pow(kPi, -0.25) * std::exp(-0.5 * xi * xi);
  for (int j = 0; j < k; ++j) {
    const double next = std::sqrt(2.0 / (j + 1.0)) * xi * cur - std::sqrt(j / (j + 1.0)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// Time factor of an eigenstate: e^{E t / alpha} on the minus branch (the form
// alpha dPsi/dt = H Psi), e^{-E t / alpha} on the plus branch.
Complex eigen_phase(Complex energy, Complex alpha, Branch branch, double t) {
  return std::exp(-static_cast<double>(sign(branch)) * energy * t / alpha);
}

std::pair<std::string, std::optional<int>> split_level(const std::string& name) {
  for (const std::string base : {"harmonic-excited", "ring-eigenstate"}) {
    if (name.rfind(base + "-", 0) == 0 && name.size() > base.size() + 1) {
      const std::string tail = name.substr(base.size() + 1);
      try {
        std::size_t used = 0;
        const int k = std::stoi(tail, &used);
        if (used == tail.size()) return {base, k};
      } catch (const std::exception&) {
      }
      throw InvalidSpec("cannot parse level suffix in catalog key '" + name + "'");
    }
  }
  return {name, std::nullopt};
}

bool alpha_squared_is_real(const DiffusionConstant& alpha) {
  return std::abs(std::sin(2.0 * alpha.phase())) < 1e-12;
}

WaveField sample_state(const GridSpec& grid, const std::function<Complex(const Point&, double)>& f,
                       Branch branch, double t, const DiffusionConstant& alpha) {
  Eigen::VectorXcd amps(grid.size());
  for (Index i = 0; i < grid.size(); ++i) amps(i) = f(grid.point(i), t);
  return {grid, amps, branch, t, alpha};
}

std::string describe(const StateParams& p) {
  std::ostringstream os;
  os << "mass=" << p.mass << " omega=" << p.omega << " sigma=" << p.sigma
     << " center=" << p.center << " momentum=" << p.momentum << " level=" << p.level
     << " branch=" << to_string(p.branch);
  return os.str();
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {"free-gaussian-packet", "harmonic-excited-k", "harmonic-ground", "kg-packet",
          "kg-plane-wave",        "plane-wave",         "ring-eigenstate-k"};
}

CatalogState analytic_state(const std::string& rawName, const GridSpec& grid,
                            const DiffusionConstant& alpha, const StateParams& params) {
  const auto [name, suffixLevel] = split_level(rawName);
  const int level = suffixLevel.value_or(params.level);
  const bool kg = name == "kg-plane-wave" || name == "kg-packet";
  ParticleSpec particle{params.mass, 0.0, kg ? grid.dimension() - 1 : grid.dimension()};
  particle.validate(kg);

  const Complex a = alpha.value();
  const double m = params.mass;
  const Branch branch = params.branch;
  const double s = static_cast<double>(sign(branch));

  PotentialSet potential = PotentialSet::none();
  std::optional<Complex> energy;
  std::function<Complex(const Point&, double)> exact;

  if (name == "free-gaussian-packet") {
    if (grid.topology() != Topology::Line) {
      throw InvalidSpec("free-gaussian-packet lives on a line grid");
    }
    if (!(params.sigma > 0.0)) throw InvalidSpec("packet width sigma must be positive");
    // Psi(y, 0) = N exp(-y^2/(2c) + b y) with c = 2 sigma^2 and b = -p/alpha;
    // the Gaussian widens as c_t = c + 2 D t with D = -/+ alpha / 2m.
    const double c = 2.0 * params.sigma * params.sigma;
    const Complex b = -params.momentum / a;
    const Complex diff = -s * a / (2.0 * m);
    const double norm = std::pow(2.0 * kPi * params.sigma * params.sigma, -0.25);
    const double x0 = params.center;
    exact = [=](const Point& x, double t) {
      const Complex ct = c + 2.0 * diff * t;
      const Complex shift = x(0) - x0 - b * c;
      return norm * std::sqrt(c / ct) * std::exp(0.5 * b * b * c - shift * shift / (2.0 * ct));
    };
  } else if (name == "harmonic-ground" || name == "harmonic-excited") {
    if (grid.topology() != Topology::Line && grid.topology() != Topology::Box) {
      throw InvalidSpec(name + " needs a line or box grid");
    }
    if (!alpha_squared_is_real(alpha)) {
      throw InvalidSpec(name + " needs a real alpha^2 so that the paired potential is real");
    }
    if (name == "harmonic-excited" && (level < 0 || grid.dimension() != 1)) {
      throw InvalidSpec("harmonic-excited-k needs k >= 0 on a 1D grid");
    }
    if (!(params.omega > 0.0)) throw InvalidSpec("oscillator frequency must be positive");
    const int k = name == "harmonic-ground" ? 0 : level;
    const int n = grid.dimension();
    // H = alpha^2/2m d^2 + U = -cos(2 phi) [ -|alpha|^2/2m d^2 + m w^2 x^2 / 2 ]
    // when U = -cos(2 phi) m w^2 x^2 / 2, so eigenpairs follow from the
    // oscillator with hbar -> |alpha|.
    const double s2 = std::cos(2.0 * alpha.phase()) > 0 ? 1.0 : -1.0;
    const double beta = m * params.omega / alpha.magnitude();
    const Complex level_energy = -s2 * alpha.magnitude() * params.omega * (k + 0.5 * n);
    energy = level_energy;
    potential = PotentialSet::quadratic(-s2 * 0.5 * m * params.omega * params.omega);
    const double scale = std::pow(beta, 0.25);
    exact = [=](const Point& x, double t) {
      double amp = 1.0;
      for (int d = 0; d < n; ++d) {
        amp *= scale * hermite_function(d == 0 ? k : 0, std::sqrt(beta) * x(d));
      }
      return amp * eigen_phase(level_energy, a, branch, t);
    };
  } else if (name == "ring-eigenstate") {
    if (grid.topology() != Topology::Ring) {
      throw InvalidSpec("ring-eigenstate-k needs ring topology");
    }
    const double length = grid.axis(0).length();
    const double lower = grid.axis(0).lower;
    const double kappa = 2.0 * kPi * level / length;
    const Complex level_energy = -a * a * kappa * kappa / (2.0 * m);
    energy = level_energy;
    const double norm = 1.0 / std::sqrt(length);
    exact = [=](const Point& x, double t) {
      return norm * std::exp(Complex(0.0, kappa * (x(0) - lower))) *
             eigen_phase(level_energy, a, branch, t);
    };
  } else if (name == "plane-wave") {
    if (grid.dimension() != 1) throw InvalidSpec("plane-wave is one-dimensional");
    const double p = params.momentum;
    const double lower = grid.axis(0).lower;
    if (grid.topology() == Topology::Ring) {
      // Periodicity requires -p L / alpha in 2 pi i Z.
      const Complex turns = -p * grid.axis(0).length() / a / Complex(0.0, 2.0 * kPi);
      if (std::abs(turns.imag()) > 1e-9 || std::abs(turns.real() - std::round(turns.real())) > 1e-9) {
        throw InvalidSpec("plane-wave momentum is not quantized on this ring");
      }
    }
    const Complex level_energy = p * p / (2.0 * m);
    energy = level_energy;
    const double norm = 1.0 / std::sqrt(grid.axis(0).length());
    exact = [=](const Point& x, double t) {
      return norm * std::exp(-p * (x(0) - lower) / a) * eigen_phase(level_energy, a, branch, t);
    };
  } else if (kg) {
    if (grid.topology() != Topology::SpacetimeBox) {
      throw InvalidSpec(name + " needs a spacetime-box grid");
    }
    const int n = grid.dimension() - 1;
    Eigen::VectorXd pc = Eigen::VectorXd::Zero(n);
    if (!params.spatialMomentum.empty()) {
      if (static_cast<int>(params.spatialMomentum.size()) != n) {
        throw InvalidSpec("spatial momentum has wrong dimension");
      }
      for (int i = 0; i < n; ++i) pc(i) = params.spatialMomentum[static_cast<std::size_t>(i)];
    }
    auto shell = [m](const Eigen::VectorXd& p) { return std::sqrt(m * m + p.squaredNorm()); };
    if (name == "kg-plane-wave") {
      // Phi = exp(-p_mu x^mu / alpha) with p_0 = -p^0.
      const double p0 = params.energyOverride.value_or(shell(pc));
      exact = [=](const Point& x, double) {
        double phase = -(-p0) * x(0);
        for (int i = 0; i < n; ++i) phase -= pc(i) * x(i + 1);
        return std::exp(Complex(phase) / a);
      };
    } else {
      if (std::abs(alpha.phase() - kPi / 2) > 1e-12) {
        throw InvalidSpec("kg-packet is built from positive-energy modes at alpha = i");
      }
      if (!(params.packetWidth > 0.0) || params.packetModes < 1) {
        throw InvalidSpec("kg-packet needs a positive width and at least one mode");
      }
      // Gaussian momentum profile with amplitude std 1/(2 width), sampled on a
      // lattice whose recurrence length 2 pi / dp is far outside the grid.
      const double spread = 1.0 / (2.0 * params.packetWidth);
      const int half = params.packetModes;
      const double dp = 2.0 * spread / half;
      struct Mode { Eigen::VectorXd p; double p0; double weight; };
      std::vector<Mode> modes;
      const int per = 2 * half + 1;
      int total = 1;
      for (int i = 0; i < n; ++i) total *= per;
      for (int idx = 0; idx < total; ++idx) {
        Eigen::VectorXd p = pc;
        int rest = idx;
        for (int i = 0; i < n; ++i) {
          p(i) += dp * (rest % per - half);
          rest /= per;
        }
        const double w = std::exp(-(p - pc).squaredNorm() / (4.0 * spread * spread));
        modes.push_back({p, shell(p), w});
      }
      double wsum = 0.0;
      for (const auto& md : modes) wsum += md.weight;
      const double center = params.center;
      exact = [=](const Point& x, double) {
        Complex sum = 0.0;
        for (const auto& md : modes) {
          double phase = -md.p0 * x(0);
          for (int i = 0; i < n; ++i) phase += md.p(i) * (x(i + 1) - center);
          sum += md.weight * std::polar(1.0, phase);
        }
        return sum / wsum;
      };
    }
  } else {
    throw InvalidSpec("unknown catalog key '" + rawName + "'");
  }

  WaveField psi = sample_state(grid, exact, branch, kg ? 0.0 : params.time, alpha);
  CatalogInfo info;
  info.name = rawName;
  info.parameters = describe(params);
  info.hasEnergy = energy.has_value();
  if (energy) info.energy = *energy;
  info.potential = potential.description;
  psi.provenance = info;
  return {std::move(psi), std::move(potential), energy, std::move(exact), particle, kg};
}

double diffusion_residual(const std::function<Complex(const Point&, double)>& exact,
                          const GridSpec& grid, const DiffusionConstant& alpha,
                          const ParticleSpec& particle, const PotentialSet& potential,
                          Branch branch, double t) {
  const Complex a = alpha.value();
  const double s = static_cast<double>(sign(branch));
  const int n = grid.dimension();
  Eigen::VectorXcd psi(grid.size());
  Eigen::VectorXcd dt(grid.size());
  const double tau = 1e-3;
  for (Index i = 0; i < grid.size(); ++i) {
    const Point x = grid.point(i);
    psi(i) = exact(x, t);
    dt(i) = (-exact(x, t + 2 * tau) + 8.0 * exact(x, t + tau) - 8.0 * exact(x, t - tau) +
             exact(x, t - 2 * tau)) /
            (12.0 * tau);
  }
  const Eigen::VectorXd u = potential.scalar_on(grid, t);
  // (d - c A)^2 Psi = d^2 Psi - c (d(A Psi) + A dPsi) + c^2 A^2 Psi, c = +/- q/alpha.
  Eigen::VectorXcd kinetic = laplacian<Complex>(grid, psi);
  if (potential.has_vector()) {
    const Complex c = s * potential.charge / a;
    const Eigen::MatrixXd avec = potential.vector_on(grid, t);
    for (int d = 0; d < n; ++d) {
      const Eigen::VectorXcd ad = avec.col(d).cast<Complex>();
      const Eigen::VectorXcd apsi = ad.cwiseProduct(psi);
      kinetic -= c * (central_difference<Complex>(grid, apsi, d) +
                      ad.cwiseProduct(central_difference<Complex>(grid, psi, d)));
      kinetic += c * c * ad.cwiseProduct(ad).cwiseProduct(psi);
    }
  }
  const auto mask = interior_mask(grid, 1);
  double worst = 0.0;
  for (Index i = 0; i < grid.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const Complex lhs = -s * a * dt(i);
    const Complex rhs = a * a / (2.0 * particle.mass) * kinetic(i) + u(i) * psi(i);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

double klein_gordon_residual(const std::function<Complex(const Point&, double)>& exact,
                             const GridSpec& spacetime, double mass,
                             const DiffusionConstant& alpha) {
  if (spacetime.topology() != Topology::SpacetimeBox) {
    throw InvalidSpec("Klein-Gordon residual needs a spacetime grid");
  }
  const Complex a = alpha.value();
  const Eigen::VectorXcd phi = sample_on<Complex>(spacetime, [&](const Point& x) { return exact(x, 0.0); });
  Eigen::VectorXcd box = -second_difference<Complex>(spacetime, phi, 0);
  for (int d = 1; d < spacetime.dimension(); ++d) box += second_difference<Complex>(spacetime, phi, d);
  const Eigen::VectorXcd residual = box + (mass * mass / (a * a)) * phi;
  const auto mask = interior_mask(spacetime, 1);
  double worst = 0.0;
  for (Index i = 0; i < spacetime.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) worst = std::max(worst, std::abs(residual(i)));
  }
  return worst;
}

double catalog_residual(const CatalogState& state, const GridSpec& grid) {
  if (state.relativistic) {
    return klein_gordon_residual(state.exact, grid, state.particle.mass, state.psi.alpha());
  }
  return diffusion_residual(state.exact, grid, state.psi.alpha(), state.particle, state.potential,
                            state.psi.branch(), state.psi.time());
}

WaveField superpose(const std::vector<Complex>& coefficients,
                    const std::vector<CatalogState>& states, double t) {
  if (coefficients.size() != states.size() || states.empty()) {
    throw InvalidSpec("superpose needs one coefficient per state");
  }
  const GridSpec& grid = states.front().psi.grid();
  const DiffusionConstant alpha = states.front().psi.alpha();
  const Branch branch = states.front().psi.branch();
  Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(grid.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& st = states[k];
    if (!(st.psi.grid() == grid)) throw InvalidSpec("superposed states have mismatched grids");
    if (!(st.psi.alpha() == alpha) || st.psi.branch() != branch) {
      throw InvalidSpec("superposed states must share alpha and branch");
    }
    if (!st.energy) throw InvalidSpec("superpose needs eigenstates with known energies");
    for (Index i = 0; i < grid.size(); ++i) sum(i) += coefficients[k] * st.exact(grid.point(i), t);
  }
  if (!(sum.squaredNorm() > 0.0)) throw InvalidSpec("superposition vanishes identically");
  return {grid, sum, branch, t, alpha};
}

}  // namespace cdiff
