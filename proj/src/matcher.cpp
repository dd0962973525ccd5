#include "tpi/matcher.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tpi/constants.hpp"
#include "tpi/errors.hpp"

namespace tpi {

namespace {

double wrap_principal(double p) {
    if (p <= -kPi) p += 2.0 * kPi;
    return p;
}

}  // namespace

MatchingPoint find_matching_n(const EmitterChainParams& params, double detuning,
                              double tau_star, const QuadratureSpec& quad, double n_cap) {
    params.validate();
    quad.validate();
    if (!(tau_star >= 0.0)) {
        throw ConfigError("tau_star must be >= 0, got " + std::to_string(tau_star));
    }
    if (!(n_cap > 1.0)) {
        throw ConfigError("n_cap must exceed 1");
    }
    if (std::fabs(detuning) > kMatcherMaxDetuningGamma * params.gamma_tot * (1.0 + 1e-12)) {
        throw NumericalError(
            "matching point requested outside the weak-coupling validity envelope: "
            "|detuning| = " +
            std::to_string(std::fabs(detuning) / params.gamma_tot) +
            " linewidths, limit " + std::to_string(kMatcherMaxDetuningGamma));
    }

    const EnsembleAmplitude ea(params, detuning, quad);
    const auto eta_at = [&](double n) { return ea.eta(n, tau_star); };

    // eta(0) = 0 and eta grows without bound (the coherent arm attenuates
    // faster than phi), so a geometric ladder always brackets the crossing
    // unless the cap intervenes.
    double lo = 0.0;
    double hi = 1.0;
    while (eta_at(hi) < 1.0) {
        if (hi >= n_cap) {
            throw NumericalError("eta(tau*) stays below 1 for all N <= " +
                                 std::to_string(n_cap));
        }
        lo = hi;
        hi = std::min(2.0 * hi, n_cap);
    }

    for (int it = 0; it < 100 && (hi - lo) > 1e-12 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (eta_at(mid) < 1.0 ? lo : hi) = mid;
    }

    MatchingPoint mp;
    mp.detuning = detuning;
    mp.tau_star = tau_star;
    mp.n_match = 0.5 * (lo + hi);
    mp.residual = std::fabs(eta_at(mp.n_match) - 1.0);
    if (!(mp.residual < 1e-6)) {
        throw NumericalError("matching residual |eta - 1| = " + std::to_string(mp.residual) +
                             " exceeds 1e-6");
    }
    return mp;
}

std::vector<FringePoint> fringe_scan(const EmitterChainParams& params,
                                     const std::vector<double>& detunings,
                                     double tau_star, const QuadratureSpec& quad) {
    std::vector<FringePoint> out;
    out.reserve(detunings.size());

    const double nan = std::numeric_limits<double>::quiet_NaN();
    bool have_prev = false;
    double prev_principal = 0.0;
    double prev_unwrapped = 0.0;

    for (double detuning : detunings) {
        FringePoint fp;
        fp.detuning = detuning;
        try {
            const MatchingPoint mp = find_matching_n(params, detuning, tau_star, quad);
            const EnsembleAmplitude ea(params, detuning, quad);
            const cplx r = ea.ratio(mp.n_match, tau_star);
            fp.n_match = mp.n_match;
            fp.phase_zero = wrap_principal(std::arg(r));
            fp.g2_at_tau_star = std::norm(1.0 + r);
        } catch (const Error& e) {
            fp.ok = false;
            fp.error = e.what();
            fp.n_match = nan;
            fp.phase_zero = nan;
            fp.phase_unwrapped = nan;
            fp.g2_at_tau_star = nan;
            out.push_back(fp);
            continue;
        }

        if (!have_prev) {
            // A matched point has ratio exactly -1 on resonance, where arg()
            // flips sign with the rounding of the imaginary part; the (-pi, pi]
            // wrap pins that to +pi, so the scan-start branch is reproducible.
            fp.phase_unwrapped = fp.phase_zero;
        } else {
            const double step = std::remainder(fp.phase_zero - prev_principal, 2.0 * kPi);
            fp.phase_unwrapped = prev_unwrapped + step;
        }
        have_prev = true;
        prev_principal = fp.phase_zero;
        prev_unwrapped = fp.phase_unwrapped;
        out.push_back(fp);
    }
    return out;
}

double approx_phase_linear(const EmitterChainParams& params, double n_match_resonant,
                           double detuning) {
    return kPi + 8.0 * n_match_resonant * detuning / params.gamma_tot;
}

double approx_eta_exponential(const EmitterChainParams& params, double detuning, double n,
                              double n_match) {
    const double t2 = std::norm(single_atom_transmission(params, detuning));
    return std::pow(t2, n_match - n);
}

double visibility(const std::vector<double>& g2_values) {
    if (g2_values.empty()) {
        throw ConfigError("visibility needs at least one g2 value");
    }
    double lo = g2_values.front();
    double hi = g2_values.front();
    for (double v : g2_values) {
        if (!(v >= 0.0)) {
            throw ConfigError("g2 values must be nonnegative, got " + std::to_string(v));
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double denom = hi + lo;
    if (denom == 0.0) return 0.0;  // flat dark fringe
    return (hi - lo) / denom;
}

}  // namespace tpi
