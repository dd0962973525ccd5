#pragma once

#include <array>
#include <string>
#include <vector>

#include "tpi/types.hpp"

namespace tpi {

struct SaturationDataset {
    std::vector<double> power;         // W, strictly increasing
    std::vector<double> transmission;  // in (0, 1.05]
    std::string metadata;

    void validate() const;             // throws ConfigError
};

struct SaturationFit {
    double beta_hat = 0.0;
    double n_hat = 0.0;
    double p_sat_hat = 0.0;                         // hbar w_L gamma / (8 beta_hat)
    std::array<double, 4> covariance{};             // row-major 2x2 over (beta, N)
    double residual_norm = 0.0;
    int iterations = 0;
};

// Principal branch W0: W e^W = x, x >= -1/e. Piecewise initial guess
// (sqrt branch near -1/e, series near 0, log-log asymptote), Halley refinement.
double lambert_w0(double x);

// Saturation power hbar w_L gamma / (8 beta), w_L = 2 pi c / wavelength.
double saturation_power(const EmitterChainParams& params);

// Extended Beer-Lambert law: T = W(e^(-4 beta N + s) s)/s with s = P/P_sat.
// Evaluated analytically as e^(-4 beta N) below s = 1e-12 (0/0 guard).
double transmission_saturated(const EmitterChainParams& params, double n,
                              double input_power);

// Resonant attenuation exponent: OD = -N ln|t(0)|^2 (~ 4 beta N for small beta).
double od_from(const EmitterChainParams& params, double n);

// Levenberg-Marquardt least squares over (beta, N). Deterministic start:
// beta0 = prior.beta, N0 from OD inversion of the lowest-power point.
// weight_log_t switches the residual to log T (open choice in the source data).
SaturationFit fit_saturation(const SaturationDataset& data,
                             const EmitterChainParams& prior,
                             bool weight_log_t = false, int max_iterations = 200);

}  // namespace tpi
