#pragma once

#include <complex>
#include <optional>
#include <vector>

namespace tpi {

// Fixed stage of the interferometer: the emitter chain medium.
struct EmitterChainParams {
    double beta = 0.0;              // guided-mode coupling fraction, 0 < beta < 0.5
    double gamma_tot = 0.0;         // total linewidth, angular (rad/s)
    double probe_wavelength = 852e-9;  // m

    void validate() const;          // throws ConfigError on violation
};

// Operating point: the interferometer knobs.
struct DriveConfig {
    double detuning = 0.0;          // angular (rad/s)
    double atom_number = 0.0;       // continuous N >= 0
    std::optional<double> probe_power;  // W; if set, s = P/P_sat must be < 0.1

    void validate(const EmitterChainParams& params) const;
};

// Symmetric uniform delay grid. num_samples counts intervals (must be even),
// so the grid holds num_samples+1 points including tau = 0 and both edges.
struct DelayGrid {
    double tau_max = 0.0;           // s
    int num_samples = 0;

    int points() const { return num_samples + 1; }
    double spacing() const { return 2.0 * tau_max / num_samples; }
    double tau(int i) const { return -tau_max + i * spacing(); }
    int index_of(double t) const;   // nearest grid index; throws if off-grid
    void validate(double gamma_tot) const;
};

// Frequency-grid controls for the inverse transform of phi(omega).
struct QuadratureSpec {
    double omega_span = 40.0;       // half-width in units of gamma_tot
    int num_samples = 16384;        // intervals across [-span, +span]; even

    void validate() const;
};

// The interferometer's two arms: coherent amplitude and sampled phi(tau).
struct TwoPhotonState {
    std::complex<double> coherent_amp;            // alpha^2/2
    std::vector<std::complex<double>> phi_tau;    // on `grid`
    DelayGrid grid;
};

}  // namespace tpi
