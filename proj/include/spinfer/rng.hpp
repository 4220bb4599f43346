#pragma once

#include <cstdint>
#include <vector>

namespace spinfer {

// Splittable counter-based generator (SplitMix64 core). Every stochastic
// operation in the library takes an explicit seed or an Rng; child streams from
// split() are independent of the parent's future output, so replicate r can
// always use rng.split(r) regardless of evaluation order.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    // independent child stream keyed by `stream`
    Rng split(std::uint64_t stream) const;

    std::uint64_t next_u64();
    double uniform();          // [0, 1)
    double normal();           // standard normal, Box-Muller
    int rademacher();          // +1 or -1, fair
    int uniform_int(int n);    // {0, ..., n-1}

    std::vector<int> rademacher_vector(int n);

  private:
    std::uint64_t seed_;   // construction seed, the split() base
    std::uint64_t state_;  // advances with the output stream
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace spinfer
