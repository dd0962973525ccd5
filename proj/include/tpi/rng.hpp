#pragma once

#include <cstdint>
#include <random>

namespace tpi {

// Deterministic substream addressed by (seed, stream). mt19937_64 + seed_seq
// are bit-exact across platforms; the distribution transforms are hand-rolled
// because std::*_distribution algorithms are implementation-defined, which
// would break byte-identical reruns across toolchains.
class RandomStream {
  public:
    RandomStream(std::uint64_t seed, std::uint64_t stream);

    double uniform();                 // [0, 1), 53-bit
    double normal();                  // standard normal, Box-Muller (cached pair)
    // Normal(mean, sigma) conditioned on > lower, by rejection.
    double truncated_normal(double mean, double sigma, double lower);
    // Knuth multiplication, chunked as sums of Poisson(lambda/m) with
    // lambda/m <= 30 so exp() never underflows (exact by additivity).
    long long poisson(double lambda);

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace tpi
