#ifndef CDIFF_CORE_HPP
#define CDIFF_CORE_HPP

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cdiff {

using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Points carried by the sampler: at most n = 3 spatial plus one time axis,
/// stored inline so per-step drift evaluations never touch the heap.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1>;

template <typename Scalar>
using GridFunction = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A physical parameter violated its type invariant.
class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical guard (stability, well-posedness, node, CFL) refused to run.
class NumericalGuard : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Branch { Plus, Minus };
enum class Direction { Forward, Backward };

constexpr int sign(Branch b) { return b == Branch::Plus ? 1 : -1; }
constexpr int sign(Direction d) { return d == Direction::Forward ? 1 : -1; }

inline std::string to_string(Branch b) { return b == Branch::Plus ? "+" : "-"; }
inline std::string to_string(Direction d) {
  return d == Direction::Forward ? "forward" : "backward";
}

/// alpha = |alpha| e^{i phi}, plus the extra real-part correlation gamma of the
/// mixed bracket d[M, conj M].
class DiffusionConstant {
 public:
  DiffusionConstant() = default;
  DiffusionConstant(double magnitude, double phase, double gamma = 0.0);

  static DiffusionConstant brownian(double magnitude = 1.0) {
    return {magnitude, 0.0};
  }
  static DiffusionConstant quantum(double magnitude = 1.0) {
    return {magnitude, std::numbers::pi / 2};
  }
  static DiffusionConstant from_complex(Complex alpha, double gamma = 0.0);

  double magnitude() const { return magnitude_; }
  double phase() const { return phase_; }
  double gamma() const { return gamma_; }
  Complex value() const { return std::polar(magnitude_, phase_); }

  bool operator==(const DiffusionConstant&) const = default;

 private:
  double magnitude_ = 1.0;
  double phase_ = 0.0;
  double gamma_ = 0.0;
};

struct ParticleSpec {
  double mass = 1.0;
  double charge = 0.0;
  int dimension = 1;

  /// Throws InvalidSpec; relativistic particles may have m = 0.
  void validate(bool relativistic = false) const;
};

}  // namespace cdiff

#endif  // CDIFF_CORE_HPP
