#pragma once

#include <cstdint>

namespace ganlink {

uint64_t splitmix64(uint64_t x);

// Independent stream seed derived from a base seed and a stream index.
uint64_t derive_seed(uint64_t base, uint64_t stream);

// Deterministic PRNG (xoshiro256++ seeded through splitmix64). Plain value
// type: copying snapshots the stream, identical seeds give bit-identical
// sample streams on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0);

  uint64_t next_u64();
  uint64_t below(uint64_t n);            // uniform in [0, n), n > 0
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double gaussian();                     // N(0, 1), Box-Muller

  // Fresh generator for an independent named stream; derivation uses the
  // original seed, not the current state.
  Rng derive(uint64_t stream) const;

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_ = 0;
  uint64_t s_[4] = {0, 0, 0, 0};
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ganlink
