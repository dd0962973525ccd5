#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "tpi/constants.hpp"
#include "tpi/core_model.hpp"
#include "tpi/errors.hpp"
#include "tpi/matcher.hpp"

using namespace tpi;

namespace {

const double kGamma = 2.0 * kPi * 5.22e6;

EmitterChainParams cesium(double beta = 0.007) {
    EmitterChainParams p;
    p.beta = beta;
    p.gamma_tot = kGamma;
    return p;
}

std::vector<double> descending_scan_rad(double from_hz, double to_hz, int points) {
    std::vector<double> out;
    for (int i = 0; i < points; ++i) {
        const double hz = from_hz + (to_hz - from_hz) * i / (points - 1);
        out.push_back(2.0 * kPi * hz);
    }
    return out;
}

}  // namespace

TEST_CASE("resonant matching point") {
    const EmitterChainParams p = cesium();
    const MatchingPoint mp = find_matching_n(p, 0.0);

    CHECK(mp.n_match == doctest::Approx(222.102808).epsilon(1e-5));
    CHECK(mp.residual < 1e-6);

    const EnsembleAmplitude ea(p, 0.0);
    CHECK(ea.eta(mp.n_match, 0.0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(ea.g2(mp.n_match, 0.0) < 1e-12);

    // Deterministic: the bisection path has no state.
    const MatchingPoint again = find_matching_n(p, 0.0);
    CHECK(again.n_match == mp.n_match);
}

TEST_CASE("matching with a delayed crossing point") {
    const EmitterChainParams p = cesium();
    const double n0 = find_matching_n(p, 0.0, 0.0).n_match;
    const double n1 = find_matching_n(p, 0.0, 1.0 / kGamma).n_match;
    const double n2 = find_matching_n(p, 0.0, 2.0 / kGamma).n_match;

    CHECK(n1 == doctest::Approx(314.191).epsilon(5e-3));
    CHECK(n2 == doctest::Approx(294.928).epsilon(5e-3));
    CHECK(n1 > n0);
    CHECK(n2 > n0);

    // Monotone over the early-delay grid (the trend reverses past ~0.8
    // linewidths of delay, so the coarse grid stops there).
    double prev = n0;
    for (double tau_star : {0.25 / kGamma, 0.5 / kGamma, 0.75 / kGamma}) {
        const double n = find_matching_n(p, 0.0, tau_star).n_match;
        CHECK(n >= prev);
        prev = n;
    }
}

TEST_CASE("matcher guard rails") {
    const EmitterChainParams p = cesium();

    CHECK_THROWS_AS(find_matching_n(p, 2.5 * kGamma), NumericalError);
    CHECK_THROWS_AS(find_matching_n(p, 0.0, -1.0 / kGamma), ConfigError);
    CHECK_THROWS_AS(find_matching_n(p, 0.0, 0.0, QuadratureSpec{}, 0.5), ConfigError);

    // A cap below the crossing reports no solution rather than extrapolating.
    const EmitterChainParams weak = cesium(0.001);
    CHECK_THROWS_AS(find_matching_n(weak, 1.9 * kGamma, 0.0, QuadratureSpec{}, 10.0),
                    NumericalError);
}

TEST_CASE("fringe scan from resonance downward") {
    const EmitterChainParams p = cesium();
    const auto detunings = descending_scan_rad(0.0, -2.4e6, 21);
    const auto fringe = fringe_scan(p, detunings);

    REQUIRE(fringe.size() == detunings.size());
    for (const auto& pt : fringe) CHECK(pt.ok);

    // Resonance anchors the unwrapped branch at +pi.
    CHECK(fringe.front().phase_unwrapped == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(fringe.front().g2_at_tau_star < 1e-6);

    for (size_t i = 1; i < fringe.size(); ++i) {
        CHECK(fringe[i].phase_unwrapped < fringe[i - 1].phase_unwrapped);
        CHECK(fringe[i].n_match > fringe.front().n_match);
    }

    for (const auto& pt : fringe) {
        CHECK(pt.g2_at_tau_star >= 0.0);
        CHECK(pt.g2_at_tau_star <= 4.0 + 1e-9);
        const double law = std::norm(1.0 + std::exp(cplx(0.0, pt.phase_zero)));
        CHECK(std::fabs(pt.g2_at_tau_star - law) < 1e-6);
    }
}

TEST_CASE("fringe is even in detuning") {
    const EmitterChainParams p = cesium();
    const std::vector<double> pair = {2.0 * kPi * -0.3e6, 2.0 * kPi * 0.3e6};
    const auto fringe = fringe_scan(p, pair);
    REQUIRE(fringe.size() == 2);
    CHECK(fringe[0].g2_at_tau_star ==
          doctest::Approx(fringe[1].g2_at_tau_star).epsilon(1e-9));
    CHECK(std::fabs(fringe[0].phase_zero) ==
          doctest::Approx(std::fabs(fringe[1].phase_zero)).epsilon(1e-9));
    CHECK(fringe[0].n_match == doctest::Approx(fringe[1].n_match).epsilon(1e-9));
}

TEST_CASE("fringe marks unmatched points without aborting") {
    const EmitterChainParams p = cesium();
    const std::vector<double> detunings = {0.0, 2.5 * kGamma, -0.5 * kGamma};
    const auto fringe = fringe_scan(p, detunings);
    REQUIRE(fringe.size() == 3);
    CHECK(fringe[0].ok);
    CHECK_FALSE(fringe[1].ok);
    CHECK(!fringe[1].error.empty());
    CHECK(std::isnan(fringe[1].g2_at_tau_star));
    CHECK(fringe[2].ok);
}

TEST_CASE("small-detuning approximations") {
    const EmitterChainParams p = cesium();
    const double n0 = find_matching_n(p, 0.0).n_match;

    CHECK(approx_phase_linear(p, n0, 0.0) == kPi);
    CHECK(approx_phase_linear(p, n0, -0.01 * kGamma) < kPi);

    CHECK(approx_eta_exponential(p, 0.0, n0, n0) == 1.0);
    CHECK(approx_eta_exponential(p, 0.0, 0.5 * n0, n0) < 1.0);
    CHECK(approx_eta_exponential(p, 0.0, 1.5 * n0, n0) > 1.0);

    // The exact fringe phase is close to linear well inside a linewidth.
    const auto detunings = descending_scan_rad(0.0, -0.2 * kGamma / (2.0 * kPi), 11);
    const auto fringe = fringe_scan(p, detunings);
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double n = static_cast<double>(fringe.size());
    for (const auto& pt : fringe) {
        sx += pt.detuning;
        sy += pt.phase_unwrapped;
        sxx += pt.detuning * pt.detuning;
        sxy += pt.detuning * pt.phase_unwrapped;
        syy += pt.phase_unwrapped * pt.phase_unwrapped;
    }
    const double r_num = n * sxy - sx * sy;
    const double r2 = r_num * r_num / ((n * sxx - sx * sx) * (n * syy - sy * sy));
    CHECK(r2 > 0.99);
}

TEST_CASE("visibility") {
    CHECK(visibility({0.0, 4.0}) == doctest::Approx(1.0));
    CHECK(visibility({1.0, 1.0}) == doctest::Approx(0.0));
    CHECK(visibility({0.4, 2.7}) == doctest::Approx(0.7419354838709677).epsilon(1e-15));
    CHECK(visibility({0.0, 0.0}) == 0.0);
    CHECK_THROWS_AS(visibility({}), ConfigError);
    CHECK_THROWS_AS(visibility({1.0, -0.2}), ConfigError);
}
