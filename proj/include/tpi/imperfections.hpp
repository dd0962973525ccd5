#pragma once

#include <cstdint>
#include <vector>

#include "tpi/constants.hpp"
#include "tpi/types.hpp"

namespace tpi {

struct ImperfectionConfig {
    double od_bin_width = 1.7;                    // flat OD distribution width
    double sigma_detuning = 2 * kPi * 200e3;      // rad/s
    double sigma_beta = 0.002;                    // truncated at beta > 1e-4
    int trials = 2000;
    std::uint64_t seed = 0;

    void validate() const;                        // throws ConfigError
};

struct OperatingPoint {
    double beta = 0.0;
    double atom_number = 0.0;
    double detuning = 0.0;
};

struct AveragedFringePoint {
    double detuning = 0.0;
    double mean_g2 = 0.0;
    double std_g2 = 0.0;
    int trials_used = 0;
    bool ok = true;
};

// MC quadrature default: coarser omega grid than the matcher's; the
// tail-split keeps its error orders below the trial-to-trial spread.
QuadratureSpec mc_quadrature();

// One perturbed (beta, N, Delta) draw around the nominal operating point:
// OD ~ U[OD0 +- w/2] inverted through od_from at the drawn beta,
// Delta ~ N(Delta0, sigma), beta ~ N(beta0, sigma_beta) truncated > 1e-4.
// Deterministic per (cfg.seed, draw_index); draw order inside the stream is
// fixed (uniform, normal, then the beta rejection loop) so a family sharing
// seeds stays draw-aligned across different sigma values.
OperatingPoint sample_operating_point(const EmitterChainParams& params,
                                      const DriveConfig& nominal,
                                      const ImperfectionConfig& cfg,
                                      std::uint64_t draw_index);

// Per detuning: match, then mean/std of g2(0) over perturbed trials.
// All widths zero reproduces the ideal fringe (same quadrature) to 1e-9.
std::vector<AveragedFringePoint> averaged_fringe(const EmitterChainParams& params,
                                                 const std::vector<double>& detunings,
                                                 const ImperfectionConfig& cfg,
                                                 const QuadratureSpec& quad = mc_quadrature());

struct VisibilityPoint {
    double sigma_detuning = 0.0;
    double visibility = 0.0;
};

// Visibility of the averaged fringe for each sigma in the family; the base
// config's seed feeds every member (common random numbers).
std::vector<VisibilityPoint> visibility_vs_sigma(const EmitterChainParams& params,
                                                 const std::vector<double>& detunings,
                                                 const ImperfectionConfig& base,
                                                 const std::vector<double>& sigmas,
                                                 const QuadratureSpec& quad = mc_quadrature());

}  // namespace tpi
