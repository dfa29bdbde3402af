#ifndef CDIFF_PHILOX_HPP
#define CDIFF_PHILOX_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace cdiff {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The output is a pure function of (counter, key); there is no hidden state.
/// Every draw in this library is addressed by the key (seed) and the counter
/// (path, step, channel), so results do not depend on thread count or on the
/// order in which paths are visited.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Two independent standard normals addressed by (seed, path, step, channel).
class GaussianField {
 public:
  explicit GaussianField(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  std::pair<double, double> normals(std::uint64_t path, std::uint64_t step,
                                    std::uint32_t channel) const {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(path),
                                  static_cast<std::uint32_t>(path >> 32),
                                  static_cast<std::uint32_t>(step),
                                  (static_cast<std::uint32_t>(step >> 32) << 8) ^ channel};
    const auto out = Philox4x32::generate(ctr, key_);
    const double u1 = to_unit(out[0], out[1]);
    const double u2 = to_unit(out[2], out[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(angle), r * std::sin(angle)};
  }

  /// Uniform variate in (0, 1) addressed the same way; used for initial draws.
  double uniform(std::uint64_t path, std::uint64_t step, std::uint32_t channel) const {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(path),
                                  static_cast<std::uint32_t>(path >> 32),
                                  static_cast<std::uint32_t>(step),
                                  ((static_cast<std::uint32_t>(step >> 32) << 8) ^ channel) ^
                                      0x80000000u};
    const auto out = Philox4x32::generate(ctr, key_);
    return to_unit(out[0], out[1]);
  }

 private:
  // 53 random bits, offset by half an ulp so 0 and 1 are never produced.
  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (std::uint64_t{hi} << 32 | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  Philox4x32::Key key_;
};

}  // namespace cdiff

#endif  // CDIFF_PHILOX_HPP
