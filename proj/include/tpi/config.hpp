#pragma once

#include <optional>
#include <string>

#include "tpi/imperfections.hpp"
#include "tpi/types.hpp"

namespace tpi {

// Experiment file: strict INI-style sections mirroring the type names.
// Frequencies cross this boundary as plain Hz (value = angular/2pi), times as
// seconds; conversion to angular rad/s happens here and only here.
//
//   [params]         beta, gamma_hz, probe_wavelength_m (optional)
//   [drive]          detuning_hz, atom_number, probe_power_w (optional)
//   [grid]           tau_max_s, num_samples
//   [quadrature]     omega_span_gamma, num_samples          (optional section)
//   [imperfections]  od_bin_width, sigma_detuning_hz, sigma_beta,
//                    trials, seed                           (optional section)
//   [output]         path                                   (optional section)
//
// Unknown sections/keys and duplicate keys are hard errors with line numbers.
struct ExperimentConfig {
    EmitterChainParams params;
    DriveConfig drive;
    DelayGrid grid;
    QuadratureSpec quadrature;
    std::optional<ImperfectionConfig> imperfections;
    std::string output_path;

    void validate() const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& filename);
ExperimentConfig load_config(const std::string& path);

// Inverse of parse_config up to formatting: parse(serialize(c)) == c field-wise.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace tpi
