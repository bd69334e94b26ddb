#ifndef PRIVLR_RANDOM_HPP
#define PRIVLR_RANDOM_HPP

// Seeded randomness with platform-independent output. The standard
// distributions are implementation-defined, so uniform, normal and shuffle
// draws are built directly on the 64-bit Mersenne Twister.

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace privlr {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Child seed from a root seed and an ordered list of tags, e.g.
/// derive_seed(root, {party_id, round}).
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52; }

  /// Uniform on [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Source of Laplace(0, scale) draws consumed by the privacy mechanisms.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;
  virtual double laplace(double scale) = 0;
};

/// Inverse CDF of Lap(0, b) at u in (-1/2, 1/2): -b sgn(u) ln(1 - 2|u|).
double laplace_inverse_cdf(double u, double scale);

/// Inverse-CDF Laplace sampler. The scale is supplied per draw so one
/// sampler can serve mechanisms that use several noise levels.
class LaplaceSampler final : public NoiseSource {
 public:
  explicit LaplaceSampler(std::uint64_t seed);

  /// Draws u from `centered_uniform`, which must return values in (-1/2, 1/2).
  explicit LaplaceSampler(std::function<double()> centered_uniform);

  double laplace(double scale) override;

 private:
  Rng rng_;
  std::function<double()> uniform_;
};

}  // namespace privlr

#endif  // PRIVLR_RANDOM_HPP
