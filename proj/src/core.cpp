#include "cdiff/core.hpp"

#include <cmath>

namespace cdiff {

namespace {

double wrap_phase(double phase) {
  constexpr double pi = std::numbers::pi;
  double wrapped = std::remainder(phase, 2.0 * pi);
  if (wrapped <= -pi) wrapped += 2.0 * pi;
  return wrapped;
}

}  // namespace

DiffusionConstant::DiffusionConstant(double magnitude, double phase, double gamma)
    : magnitude_(magnitude), phase_(wrap_phase(phase)), gamma_(gamma) {
  if (!std::isfinite(magnitude) || !(magnitude > 0.0)) {
    throw InvalidSpec("diffusion constant magnitude must be positive, got " +
                      std::to_string(magnitude));
  }
  if (!std::isfinite(phase)) throw InvalidSpec("diffusion constant phase must be finite");
  if (!std::isfinite(gamma) || gamma < 0.0) {
    throw InvalidSpec("correlation offset gamma must be >= 0, got " + std::to_string(gamma));
  }
}

DiffusionConstant DiffusionConstant::from_complex(Complex alpha, double gamma) {
  return {std::abs(alpha), std::arg(alpha), gamma};
}

void ParticleSpec::validate(bool relativistic) const {
  if (!std::isfinite(mass) || mass < 0.0 || (!relativistic && mass == 0.0)) {
    throw InvalidSpec("particle mass must be " + std::string(relativistic ? ">= 0" : "> 0") +
                      ", got " + std::to_string(mass));
  }
  if (!std::isfinite(charge)) throw InvalidSpec("particle charge must be finite");
  if (dimension < 1 || dimension > 3) {
    throw InvalidSpec("spatial dimension must be in 1..3, got " + std::to_string(dimension));
  }
}

}  // namespace cdiff
