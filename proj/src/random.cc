#include "privlr/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "privlr/error.hpp"

namespace privlr {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(root);
  for (std::uint64_t tag : tags) h = mix64(h ^ mix64(tag + 0x632be59bd9b4e019ULL));
  return h;
}

std::uint64_t Rng::below(std::uint64_t n) {
  // rejection sampling keeps the result exactly uniform
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double laplace_inverse_cdf(double u, double scale) {
  if (!(scale > 0.0)) throw InvalidArgument("laplace: scale must be > 0");
  if (u == 0.0) return 0.0;
  const double sign = u > 0.0 ? 1.0 : -1.0;
  return -scale * sign * std::log1p(-2.0 * std::abs(u));
}

LaplaceSampler::LaplaceSampler(std::uint64_t seed) : rng_(seed) {}

LaplaceSampler::LaplaceSampler(std::function<double()> centered_uniform)
    : rng_(0), uniform_(std::move(centered_uniform)) {}

double LaplaceSampler::laplace(double scale) {
  const double u = uniform_ ? uniform_() : rng_.uniform() - 0.5;
  return laplace_inverse_cdf(u, scale);
}

}  // namespace privlr
