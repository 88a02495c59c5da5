// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace swbss {

// Deterministic PRNG with named substreams. All randomness of a run is
// funneled through one root seed; substreams keep the draw order of one
// module independent of what the others consume.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  // Child generator seeded from (root seed, name); independent of the
  // parent's draw position.
  Rng stream(std::string_view name) const;

  uint64_t next_u64();
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  double normal();                        // standard normal, Box-Muller
  std::complex<double> complex_normal();  // circular CN(0, 1)

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace swbss
