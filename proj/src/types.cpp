#include "tpi/types.hpp"

#include <cmath>
#include <string>

#include "tpi/errors.hpp"
#include "tpi/saturation.hpp"

namespace tpi {

void EmitterChainParams::validate() const {
    if (!(beta > 0.0) || !(beta < 0.5)) {
        throw ConfigError("beta must lie in (0, 0.5), got " + std::to_string(beta));
    }
    if (!(gamma_tot > 0.0)) {
        throw ConfigError("gamma_tot must be positive, got " + std::to_string(gamma_tot));
    }
    if (!(probe_wavelength > 0.0)) {
        throw ConfigError("probe_wavelength must be positive, got " +
                          std::to_string(probe_wavelength));
    }
}

void DriveConfig::validate(const EmitterChainParams& params) const {
    if (!std::isfinite(detuning)) {
        throw ConfigError("detuning must be finite");
    }
    if (!(atom_number >= 0.0) || !std::isfinite(atom_number)) {
        throw ConfigError("atom_number must be >= 0, got " + std::to_string(atom_number));
    }
    if (probe_power) {
        if (!(*probe_power > 0.0)) {
            throw ConfigError("probe_power must be positive when set");
        }
        const double s = *probe_power / saturation_power(params);
        if (!(s < 0.1)) {
            throw ConfigError("probe_power implies s = P/P_sat = " + std::to_string(s) +
                              "; the two-photon model assumes s < 0.1");
        }
    }
}

int DelayGrid::index_of(double t) const {
    const double h = spacing();
    const long i = std::lround((t + tau_max) / h);
    if (i < 0 || i > num_samples || std::fabs(tau(static_cast<int>(i)) - t) > 0.25 * h) {
        throw ConfigError("tau = " + std::to_string(t) + " s is not a grid point");
    }
    return static_cast<int>(i);
}

void DelayGrid::validate(double gamma_tot) const {
    if (!(tau_max > 0.0)) {
        throw ConfigError("grid tau_max must be positive");
    }
    if (num_samples < 2 || num_samples % 2 != 0) {
        throw ConfigError("grid num_samples must be an even count >= 2, got " +
                          std::to_string(num_samples));
    }
    // phi decays as e^(-gamma tau / 2); below 10 linewidths the window cuts
    // visible correlations and the tail baseline estimate loses its footing.
    if (tau_max * gamma_tot < 10.0 - 1e-9) {
        throw ConfigError("grid must span at least 10 linewidths: tau_max * gamma_tot = " +
                          std::to_string(tau_max * gamma_tot));
    }
}

void QuadratureSpec::validate() const {
    if (!(omega_span > 0.0)) {
        throw ConfigError("quadrature omega_span must be positive");
    }
    if (num_samples < 2 || num_samples % 2 != 0) {
        throw ConfigError("quadrature num_samples must be an even count >= 2, got " +
                          std::to_string(num_samples));
    }
}

}  // namespace tpi
