#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace multiscan {

// splitmix64 step: advances `state` and returns a well-mixed 64-bit value.
// Used only to derive stream keys, never as the sampling generator.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Key for an independent substream addressed by (a, b) under a base seed.
// Every parallel work unit gets its own key, so results never depend on
// thread count or evaluation order.
inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = seed;
  std::uint64_t z = splitmix64(s);
  s = z ^ a;
  z = splitmix64(s);
  s = z ^ b;
  return splitmix64(s);
}

// One addressable random stream with the handful of samplers the simulations
// need.  All draws route through the same mt19937_64, so a stream's output
// sequence is a pure function of its key.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : gen_(key) {}

  // Uniform on (0, 1]; never returns 0, so logs are safe.
  double uniform01() {
    return (double(gen_() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; generates pairs and caches the second.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform01()));
    const double a = 2.0 * std::numbers::pi * uniform01();
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Eigen::VectorXd normal_vector(int d) {
    Eigen::VectorXd z(d);
    for (int i = 0; i < d; ++i) z[i] = normal();
    return z;
  }

  // Gamma(shape, 1) via Marsaglia-Tsang squeeze; the shape < 1 case boosts
  // from shape + 1.
  double gamma_draw(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma_draw: shape must be positive");
    if (shape < 1.0)
      return gamma_draw(shape + 1.0) * std::pow(uniform01(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double x = normal();
      const double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      const double v = t * t * t;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_squared(double df) { return 2.0 * gamma_draw(0.5 * df); }

  double student_t(double df) { return normal() / std::sqrt(chi_squared(df) / df); }

  // Skew-t with slant `alpha` and `df` degrees of freedom: a skew-normal
  // draw delta*|W0| + sqrt(1-delta^2)*W1 divided by sqrt(chi^2_df / df).
  double skew_t(double alpha, double df) {
    const double delta = alpha / std::sqrt(1.0 + alpha * alpha);
    const double w0 = normal();
    const double w1 = normal();
    const double z = delta * std::abs(w0) + std::sqrt(1.0 - delta * delta) * w1;
    return z / std::sqrt(chi_squared(df) / df);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace multiscan
