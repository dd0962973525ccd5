#pragma once

#include <string>
#include <vector>

#include "tpi/core_model.hpp"
#include "tpi/types.hpp"

namespace tpi {

struct MatchingPoint {
    double detuning = 0.0;     // rad/s
    double tau_star = 0.0;     // s
    double n_match = 0.0;
    double residual = 0.0;     // |eta - 1| at n_match
};

struct FringePoint {
    double detuning = 0.0;
    double n_match = 0.0;
    double phase_zero = 0.0;        // Delta-phi(tau*) in (-pi, pi]
    double phase_unwrapped = 0.0;   // continuous along the scan
    double g2_at_tau_star = 0.0;
    bool ok = true;
    std::string error;
};

// Root of eta(tau*, N) = 1: geometric x2 bracket from N = 1, then bisection
// on log eta. Driven to ~1e-10 so the phase-to-g2 identity holds at 1e-6.
// Throws NumericalError if |detuning| exceeds the validity envelope or no
// crossing exists below n_cap.
MatchingPoint find_matching_n(const EmitterChainParams& params, double detuning,
                              double tau_star = 0.0, const QuadratureSpec& quad = {},
                              double n_cap = 1e5);

// Match then report (phase, g2) per detuning; failures are marked per point,
// never aborting the scan. Unwrapped phase accumulates the nearest-2pi branch
// along the scan order, anchored to +pi when the first point sits at -pi
// (the matched resonant ratio is exactly -1, so arg() is sign-unstable there).
std::vector<FringePoint> fringe_scan(const EmitterChainParams& params,
                                     const std::vector<double>& detunings,
                                     double tau_star = 0.0,
                                     const QuadratureSpec& quad = {});

// Literal small-detuning phase law: pi + 8 N0 Delta / gamma, unwrapped.
double approx_phase_linear(const EmitterChainParams& params, double n_match_resonant,
                           double detuning);

// Literal amplitude law |t(Delta)^2|^(N_match - N); equals 1 at N = N_match.
double approx_eta_exponential(const EmitterChainParams& params, double detuning,
                              double n, double n_match);

// Michelson contrast (max - min)/(max + min); throws ConfigError when empty.
double visibility(const std::vector<double>& g2_values);

}  // namespace tpi
