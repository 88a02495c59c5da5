// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swbss/rng.hpp"

#include <cmath>

namespace swbss {
namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Rng::Rng(uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

Rng Rng::stream(std::string_view name) const {
  return Rng(splitmix64(seed_ ^ fnv1a64(name)));
}

uint64_t Rng::next_u64() { return gen_(); }

double Rng::uniform() {
  // 53 mantissa bits; value in [0, 1).
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  // One normal per call from a fresh uniform pair, so draw counts do not
  // depend on caller history.
  double u = uniform();
  double v = uniform();
  double r = std::sqrt(-2.0 * std::log1p(-u));
  return r * std::cos(2.0 * M_PI * v);
}

std::complex<double> Rng::complex_normal() {
  double re = normal();
  double im = normal();
  return {re * M_SQRT1_2, im * M_SQRT1_2};
}

}  // namespace swbss
