#include "tpi/rng.hpp"

#include <cmath>
#include <string>

#include "tpi/constants.hpp"
#include "tpi/errors.hpp"

namespace tpi {

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream) {
    // seed_seq consumes 32-bit words; split both ids so no entropy is dropped.
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_ = std::mt19937_64(seq);
}

double RandomStream::uniform() {
    // Top 53 bits to a double in [0, 1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * kPi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

double RandomStream::truncated_normal(double mean, double sigma, double lower) {
    if (!(sigma > 0.0)) return std::max(mean, lower);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        const double x = mean + sigma * normal();
        if (x > lower) return x;
    }
    throw NumericalError("truncated normal rejection failed; the window [" +
                         std::to_string(lower) + ", inf) has negligible mass");
}

long long RandomStream::poisson(double lambda) {
    if (!(lambda >= 0.0)) {
        throw ConfigError("poisson rate must be >= 0, got " + std::to_string(lambda));
    }
    if (lambda == 0.0) return 0;
    // Split the rate into chunks <= 30 so exp(-chunk) stays far from the
    // underflow floor; Poisson additivity keeps the sum exact.
    const int chunks = static_cast<int>(std::ceil(lambda / 30.0));
    const double rate = lambda / chunks;
    const double limit = std::exp(-rate);
    long long total = 0;
    for (int c = 0; c < chunks; ++c) {
        long long k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        total += k - 1;
    }
    return total;
}

}  // namespace tpi
