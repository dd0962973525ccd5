#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tpi/types.hpp"

namespace tpi {

struct CoincidenceHistogram {
    std::vector<double> bin_centers;     // s, uniform, strictly increasing
    std::vector<long long> counts;       // >= 0
    double baseline_expected = 0.0;      // expected counts per bin at g2 = 1

    double bin_width() const;
    void validate() const;               // throws ConfigError
};

struct ContrastFit {
    double c_hat = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double g2_zero_hat = 0.0;            // C (g2_model(0) - 1) + 1 at c_hat
    double log_likelihood = 0.0;
    double baseline_used = 0.0;
    bool boundary_warning = false;       // c_hat or a CI edge hit a search bound
};

struct ContrastFitOptions {
    double c_min = 0.0;
    double c_max = 1.5;
    double ci_delta_lnl = 0.5;           // profile drop; 0.5 ~ 68%, 1.9207 ~ 95%
    bool fit_baseline_jointly = false;   // profile out A via its closed form
    std::optional<double> baseline_override;
};

// counts_i ~ Poisson(baseline * g2_i), one substream per (seed, bin).
CoincidenceHistogram synth_histogram(const std::vector<double>& bin_centers,
                                     const std::vector<double>& model_g2,
                                     double baseline, std::uint64_t seed);

// Baseline estimate: mean count over bins with gamma |tau| > 8 (g2 ~ 1 there).
double estimate_baseline(const CoincidenceHistogram& hist, double gamma_tot);

// 1-D Poisson MLE of C on [c_min, c_max] by golden section (concave lnL),
// profile CI at lnL_max - ci_delta_lnl per side. lambda_i clamped >= 1e-12.
// Throws NumericalError when model_g2 == 1 everywhere (flat likelihood).
ContrastFit mle_fit_contrast(const CoincidenceHistogram& hist,
                             const std::vector<double>& model_g2,
                             const ContrastFitOptions& options = {});

// counts / baseline_expected; throws ConfigError on zero baseline.
std::vector<double> g2_estimate_from_histogram(const CoincidenceHistogram& hist);

}  // namespace tpi
