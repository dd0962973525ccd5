#include "tpi/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tpi/errors.hpp"
#include "tpi/rng.hpp"

namespace tpi {

namespace {

constexpr double kLambdaFloor = 1e-12;

struct Likelihood {
    const CoincidenceHistogram& hist;
    const std::vector<double>& model_g2;
    const ContrastFitOptions& opts;
    double fixed_baseline;

    // Poisson lnL(C) up to the Sum ln(n_i!) constant; profiles A out through
    // its closed-form maximizer when the joint fit is requested.
    double operator()(double c, double* baseline_out = nullptr) const {
        double a = fixed_baseline;
        if (opts.fit_baseline_jointly) {
            double sum_counts = 0.0;
            double sum_shape = 0.0;
            for (size_t i = 0; i < model_g2.size(); ++i) {
                sum_counts += static_cast<double>(hist.counts[i]);
                sum_shape += std::max(c * (model_g2[i] - 1.0) + 1.0, 1e-15);
            }
            a = std::max(sum_counts / sum_shape, kLambdaFloor);
        }
        if (baseline_out) *baseline_out = a;
        double lnl = 0.0;
        for (size_t i = 0; i < model_g2.size(); ++i) {
            const double shape = c * (model_g2[i] - 1.0) + 1.0;
            const double lambda = std::max(a * shape, kLambdaFloor);
            lnl += static_cast<double>(hist.counts[i]) * std::log(lambda) - lambda;
        }
        return lnl;
    }
};

}  // namespace

double CoincidenceHistogram::bin_width() const {
    if (bin_centers.size() < 2) {
        throw ConfigError("histogram needs at least 2 bins to define a width");
    }
    return bin_centers[1] - bin_centers[0];
}

void CoincidenceHistogram::validate() const {
    if (bin_centers.empty()) {
        throw ConfigError("histogram is empty");
    }
    if (bin_centers.size() != counts.size()) {
        throw ConfigError("histogram: bin and count lengths differ");
    }
    if (!(baseline_expected >= 0.0)) {
        throw ConfigError("histogram baseline_expected must be >= 0");
    }
    if (bin_centers.size() >= 2) {
        const double w = bin_centers[1] - bin_centers[0];
        if (!(w > 0.0)) {
            throw ConfigError("histogram bins must be strictly increasing");
        }
        for (size_t i = 1; i < bin_centers.size(); ++i) {
            const double d = bin_centers[i] - bin_centers[i - 1];
            if (std::fabs(d - w) > 1e-6 * w) {
                throw ConfigError("histogram bins must be uniform (bin " +
                                  std::to_string(i + 1) + ")");
            }
        }
    }
    for (size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] < 0) {
            throw ConfigError("histogram counts must be >= 0 (bin " +
                              std::to_string(i + 1) + ")");
        }
    }
}

CoincidenceHistogram synth_histogram(const std::vector<double>& bin_centers,
                                     const std::vector<double>& model_g2,
                                     double baseline, std::uint64_t seed) {
    if (bin_centers.size() != model_g2.size()) {
        throw ConfigError("synth_histogram: bin and model lengths differ");
    }
    if (!(baseline >= 0.0)) {
        throw ConfigError("synth_histogram baseline must be >= 0");
    }
    CoincidenceHistogram hist;
    hist.bin_centers = bin_centers;
    hist.baseline_expected = baseline;
    hist.counts.resize(bin_centers.size());
    for (size_t i = 0; i < bin_centers.size(); ++i) {
        if (!(model_g2[i] >= 0.0)) {
            throw ConfigError("model g2 must be >= 0 (bin " + std::to_string(i + 1) + ")");
        }
        // One substream per (seed, bin): counts are reproducible bin-by-bin
        // and independent of evaluation order.
        RandomStream rs(seed, static_cast<std::uint64_t>(i));
        hist.counts[i] = rs.poisson(baseline * model_g2[i]);
    }
    hist.validate();
    return hist;
}

double estimate_baseline(const CoincidenceHistogram& hist, double gamma_tot) {
    hist.validate();
    if (!(gamma_tot > 0.0)) {
        throw ConfigError("gamma_tot must be positive");
    }
    double sum = 0.0;
    long long used = 0;
    for (size_t i = 0; i < hist.bin_centers.size(); ++i) {
        if (std::fabs(hist.bin_centers[i]) * gamma_tot > 8.0) {
            sum += static_cast<double>(hist.counts[i]);
            ++used;
        }
    }
    if (used == 0) {
        throw ConfigError("no histogram bins beyond 8 linewidths; cannot estimate a "
                          "baseline");
    }
    return sum / static_cast<double>(used);
}

ContrastFit mle_fit_contrast(const CoincidenceHistogram& hist,
                             const std::vector<double>& model_g2,
                             const ContrastFitOptions& options) {
    hist.validate();
    if (model_g2.size() != hist.counts.size()) {
        throw ConfigError("model g2 length does not match the histogram");
    }
    if (!(options.c_min < options.c_max)) {
        throw ConfigError("contrast search bounds must satisfy c_min < c_max");
    }
    if (!(options.ci_delta_lnl > 0.0)) {
        throw ConfigError("ci_delta_lnl must be positive");
    }

    double deviation = 0.0;
    for (double g : model_g2) deviation = std::max(deviation, std::fabs(g - 1.0));
    if (deviation < 1e-12) {
        throw NumericalError("model g2 is 1 everywhere; the likelihood carries no "
                             "contrast information");
    }

    double fixed = options.baseline_override.value_or(hist.baseline_expected);
    if (!options.fit_baseline_jointly && !(fixed > 0.0)) {
        throw ConfigError("contrast fit needs a positive baseline (got " +
                          std::to_string(fixed) + ")");
    }
    const Likelihood lnl{hist, model_g2, options, fixed};

    // Golden-section maximization; lnL is concave in C (log of affine rates).
    const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = options.c_min;
    double b = options.c_max;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = lnl(x1);
    double f2 = lnl(x2);
    while (b - a > 1e-6) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = lnl(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = lnl(x1);
        }
    }

    ContrastFit fit;
    fit.c_hat = 0.5 * (a + b);
    fit.log_likelihood = lnl(fit.c_hat, &fit.baseline_used);
    fit.boundary_warning = (fit.c_hat - options.c_min <= 1e-5) ||
                           (options.c_max - fit.c_hat <= 1e-5);

    // Profile interval: walk each side down to lnL_max - ci_delta_lnl.
    const double target = fit.log_likelihood - options.ci_delta_lnl;
    const auto profile_edge = [&](double inner, double outer) {
        if (lnl(outer) >= target) {
            fit.boundary_warning = true;  // interval is clipped by the bound
            return outer;
        }
        double hi = inner;  // lnL(hi) >= target
        double lo = outer;  // lnL(lo) < target
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (hi + lo);
            (lnl(mid) >= target ? hi : lo) = mid;
        }
        return 0.5 * (hi + lo);
    };
    fit.ci_lower = profile_edge(fit.c_hat, options.c_min);
    fit.ci_upper = profile_edge(fit.c_hat, options.c_max);

    size_t i0 = 0;
    for (size_t i = 1; i < hist.bin_centers.size(); ++i) {
        if (std::fabs(hist.bin_centers[i]) < std::fabs(hist.bin_centers[i0])) i0 = i;
    }
    fit.g2_zero_hat = fit.c_hat * (model_g2[i0] - 1.0) + 1.0;
    return fit;
}

std::vector<double> g2_estimate_from_histogram(const CoincidenceHistogram& hist) {
    hist.validate();
    if (!(hist.baseline_expected > 0.0)) {
        throw ConfigError("g2 estimate needs a positive baseline_expected");
    }
    std::vector<double> out(hist.counts.size());
    for (size_t i = 0; i < hist.counts.size(); ++i) {
        out[i] = static_cast<double>(hist.counts[i]) / hist.baseline_expected;
    }
    return out;
}

}  // namespace tpi
