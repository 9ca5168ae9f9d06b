#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "msde/linalg.hpp"

namespace msde {

/// Identifier recorded with every sampled noise path. The mt19937_64 output
/// sequence is fixed by the standard and the Box-Muller transform below is
/// spelled out explicitly, so streams are reproducible across toolchains
/// (std::normal_distribution would not be).
inline constexpr const char* kGeneratorId = "mt19937_64-boxmuller-v1";

/// Deterministic standard-normal stream over mt19937_64.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1) with 53 random mantissa bits.
  double next_uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - next_uniform();  // (0, 1], keeps the log finite
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Uniform point in the centered d-ball of the given radius.
  Vec next_in_ball(int dim, double radius) {
    Vec x(dim);
    double nrm2 = 0.0;
    do {
      for (int i = 0; i < dim; ++i) x[i] = next();
      nrm2 = x.squaredNorm();
    } while (nrm2 < 1e-300);
    const double u = next_uniform();
    x *= radius * std::pow(u, 1.0 / dim) / std::sqrt(nrm2);
    return x;
  }

  /// Uniform direction on the unit sphere.
  Vec next_direction(int dim) {
    Vec x = next_in_ball(dim, 1.0);
    return x / x.norm();
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace msde
