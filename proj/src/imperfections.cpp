#include "tpi/imperfections.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tpi/core_model.hpp"
#include "tpi/errors.hpp"
#include "tpi/matcher.hpp"
#include "tpi/rng.hpp"
#include "tpi/saturation.hpp"

namespace tpi {

namespace {

constexpr double kBetaFloor = 1e-4;

}  // namespace

void ImperfectionConfig::validate() const {
    if (!(od_bin_width >= 0.0)) {
        throw ConfigError("od_bin_width must be >= 0");
    }
    if (!(sigma_detuning >= 0.0)) {
        throw ConfigError("sigma_detuning must be >= 0");
    }
    if (!(sigma_beta >= 0.0)) {
        throw ConfigError("sigma_beta must be >= 0");
    }
    if (trials < 1) {
        throw ConfigError("trials must be >= 1, got " + std::to_string(trials));
    }
}

QuadratureSpec mc_quadrature() {
    // Coarser than the matcher default: the tail-split transform error is
    // orders below the draw-to-draw spread, and trial counts dominate cost.
    return QuadratureSpec{40.0, 2048};
}

OperatingPoint sample_operating_point(const EmitterChainParams& params,
                                      const DriveConfig& nominal,
                                      const ImperfectionConfig& cfg,
                                      std::uint64_t draw_index) {
    params.validate();
    nominal.validate(params);
    cfg.validate();

    RandomStream rs(cfg.seed, draw_index);
    // Fixed draw order (uniform, normal, beta rejection): families that share
    // a seed stay draw-aligned when only the widths differ.
    const double u = rs.uniform();
    const double z = rs.normal();

    OperatingPoint op;
    op.beta = cfg.sigma_beta > 0.0
                  ? rs.truncated_normal(params.beta, cfg.sigma_beta, kBetaFloor)
                  : params.beta;

    if (cfg.od_bin_width == 0.0 && cfg.sigma_beta == 0.0) {
        op.atom_number = nominal.atom_number;  // exact, no OD round trip
    } else {
        const double od_nominal = od_from(params, nominal.atom_number);
        const double od = std::max(od_nominal + cfg.od_bin_width * (u - 0.5), 0.0);
        EmitterChainParams drawn = params;
        drawn.beta = op.beta;
        op.atom_number = od / od_from(drawn, 1.0);
    }

    op.detuning = nominal.detuning + cfg.sigma_detuning * z;
    return op;
}

std::vector<AveragedFringePoint> averaged_fringe(const EmitterChainParams& params,
                                                 const std::vector<double>& detunings,
                                                 const ImperfectionConfig& cfg,
                                                 const QuadratureSpec& quad) {
    params.validate();
    cfg.validate();
    quad.validate();

    std::vector<AveragedFringePoint> out;
    out.reserve(detunings.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();

    for (size_t i = 0; i < detunings.size(); ++i) {
        AveragedFringePoint pt;
        pt.detuning = detunings[i];
        double n_match = 0.0;
        try {
            n_match = find_matching_n(params, detunings[i], 0.0, quad).n_match;
        } catch (const Error&) {
            pt.ok = false;
            pt.mean_g2 = nan;
            pt.std_g2 = nan;
            pt.trials_used = 0;
            out.push_back(pt);
            continue;
        }

        DriveConfig nominal;
        nominal.detuning = detunings[i];
        nominal.atom_number = n_match;

        // Welford accumulation: immune to the cancellation that makes
        // sum-of-squares variance go negative (or nonzero for identical
        // trials, which the zero-width configuration produces).
        double mean = 0.0;
        double m2 = 0.0;
        for (int t = 0; t < cfg.trials; ++t) {
            // Index by (detuning, trial) so scans are draw-independent across
            // detunings while a family sharing cfg.seed reuses every draw.
            const std::uint64_t draw =
                static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(cfg.trials) +
                static_cast<std::uint64_t>(t);
            const OperatingPoint op = sample_operating_point(params, nominal, cfg, draw);
            EmitterChainParams drawn = params;
            drawn.beta = op.beta;
            const EnsembleAmplitude ea(drawn, op.detuning, quad);
            const double g = ea.g2(op.atom_number, 0.0);
            const double delta = g - mean;
            mean += delta / static_cast<double>(t + 1);
            m2 += delta * (g - mean);
        }
        pt.mean_g2 = mean;
        pt.std_g2 = cfg.trials > 1
                        ? std::sqrt(std::max(m2 / (static_cast<double>(cfg.trials) - 1.0), 0.0))
                        : 0.0;
        pt.trials_used = cfg.trials;
        out.push_back(pt);
    }
    return out;
}

std::vector<VisibilityPoint> visibility_vs_sigma(const EmitterChainParams& params,
                                                 const std::vector<double>& detunings,
                                                 const ImperfectionConfig& base,
                                                 const std::vector<double>& sigmas,
                                                 const QuadratureSpec& quad) {
    base.validate();
    std::vector<VisibilityPoint> out;
    out.reserve(sigmas.size());
    for (double sigma : sigmas) {
        if (!(sigma >= 0.0)) {
            throw ConfigError("sigma_detuning values must be >= 0");
        }
        ImperfectionConfig cfg = base;
        cfg.sigma_detuning = sigma;
        const auto fringe = averaged_fringe(params, detunings, cfg, quad);
        std::vector<double> means;
        means.reserve(fringe.size());
        for (const auto& pt : fringe) {
            if (pt.ok) means.push_back(pt.mean_g2);
        }
        if (means.empty()) {
            throw NumericalError("no fringe point could be matched; visibility undefined");
        }
        out.push_back({sigma, visibility(means)});
    }
    return out;
}

}  // namespace tpi
