#pragma once

#include <string>
#include <vector>

#include "tpi/estimation.hpp"
#include "tpi/imperfections.hpp"
#include "tpi/matcher.hpp"
#include "tpi/saturation.hpp"
#include "tpi/types.hpp"

namespace tpi {

// %.17g: fixed, locale-free, round-trips doubles, byte-stable across reruns.
std::string format_double(double value);

// Pinned output schemas. Every writer throws IoError on filesystem failure.
//   g2:         tau_seconds,g2,phi_real,phi_imag,delta_phi
//   fringe:     detuning_hz,n_match,delta_phi_unwrapped,g2
//   montecarlo: detuning_hz,mean_g2,std_g2,trials
//   visibility: sigma_detuning_hz,visibility
//   saturation: power_watts,transmission
//   histogram:  tau_seconds,counts  (+ sidecar JSON with baseline/bin width)
void write_g2_csv(const std::string& path, const TwoPhotonState& state);
void write_fringe_csv(const std::string& path, const std::vector<FringePoint>& points);
void write_montecarlo_csv(const std::string& path,
                          const std::vector<AveragedFringePoint>& points);
void write_visibility_csv(const std::string& path,
                          const std::vector<VisibilityPoint>& points);
void write_saturation_csv(const std::string& path, const SaturationDataset& data);
void write_histogram_csv(const std::string& path, const CoincidenceHistogram& hist);
void write_histogram_sidecar(const std::string& path, const CoincidenceHistogram& hist);

// Readers enforce the exact header and report violations with row numbers
// (ConfigError); unreadable files raise IoError.
SaturationDataset read_saturation_csv(const std::string& path);
CoincidenceHistogram read_histogram_csv(const std::string& csv_path,
                                        const std::string& sidecar_path);

}  // namespace tpi
