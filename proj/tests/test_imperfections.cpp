#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "tpi/constants.hpp"
#include "tpi/errors.hpp"
#include "tpi/imperfections.hpp"
#include "tpi/matcher.hpp"
#include "tpi/saturation.hpp"

using namespace tpi;

namespace {

EmitterChainParams chain() {
    EmitterChainParams p;
    p.beta = 0.007;
    p.gamma_tot = 2.0 * kPi * 5.22e6;
    return p;
}

std::vector<double> fringe_window(int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) {
        out[i] = 2.0 * kPi * (-2.4e6 + 2.4e6 * i / (count - 1));
    }
    return out;
}

}  // namespace

TEST_CASE("zero widths reproduce the nominal point exactly") {
    const auto params = chain();
    DriveConfig nominal;
    nominal.detuning = 0.3 * params.gamma_tot;
    nominal.atom_number = 137.25;

    ImperfectionConfig cfg;
    cfg.od_bin_width = 0.0;
    cfg.sigma_detuning = 0.0;
    cfg.sigma_beta = 0.0;
    cfg.seed = 11;

    for (std::uint64_t i = 0; i < 50; ++i) {
        const OperatingPoint op = sample_operating_point(params, nominal, cfg, i);
        CHECK(op.beta == params.beta);
        CHECK(op.atom_number == nominal.atom_number);
        CHECK(op.detuning == nominal.detuning);
    }
}

TEST_CASE("flat OD jitter has the right variance") {
    const auto params = chain();
    DriveConfig nominal;
    nominal.atom_number = 100.0;

    ImperfectionConfig cfg;
    cfg.od_bin_width = 1.7;
    cfg.sigma_detuning = 0.0;
    cfg.sigma_beta = 0.0;
    cfg.seed = 3;

    const double kappa = od_from(params, 1.0);
    const int n = 10000;
    double mean = 0.0;
    double var = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        const OperatingPoint op = sample_operating_point(params, nominal, cfg, i);
        CHECK(op.detuning == nominal.detuning);
        const double od = op.atom_number * kappa;
        mean += od;
        var += od * od;
    }
    mean /= n;
    var = var / n - mean * mean;
    CHECK(mean == doctest::Approx(nominal.atom_number * kappa).epsilon(0.01));
    CHECK(var == doctest::Approx(1.7 * 1.7 / 12.0).epsilon(0.05));
}

TEST_CASE("coupling jitter stays above the truncation floor") {
    const auto params = chain();
    DriveConfig nominal;
    nominal.atom_number = 100.0;

    ImperfectionConfig cfg;
    cfg.od_bin_width = 0.0;
    cfg.sigma_detuning = 0.0;
    cfg.sigma_beta = 0.004;
    cfg.seed = 7;

    double mean = 0.0;
    bool any_moved = false;
    for (std::uint64_t i = 0; i < 5000; ++i) {
        const OperatingPoint op = sample_operating_point(params, nominal, cfg, i);
        CHECK(op.beta > 1e-4);
        if (op.beta != params.beta) any_moved = true;
        mean += op.beta;
    }
    CHECK(any_moved);
    // The floor sits 1.7 sigma below the mean, so truncation biases up ~5%.
    CHECK(mean / 5000.0 == doctest::Approx(params.beta).epsilon(0.09));
}

TEST_CASE("draws are deterministic in (seed, index)") {
    const auto params = chain();
    DriveConfig nominal;
    nominal.atom_number = 222.0;

    ImperfectionConfig cfg;  // default widths, all active
    cfg.seed = 99;

    const OperatingPoint a = sample_operating_point(params, nominal, cfg, 1234);
    const OperatingPoint b = sample_operating_point(params, nominal, cfg, 1234);
    CHECK(a.beta == b.beta);
    CHECK(a.atom_number == b.atom_number);
    CHECK(a.detuning == b.detuning);

    const OperatingPoint c = sample_operating_point(params, nominal, cfg, 1235);
    CHECK(a.atom_number != c.atom_number);
}

TEST_CASE("degenerate ensemble average equals the ideal fringe") {
    const auto params = chain();
    const auto detunings = fringe_window(5);

    ImperfectionConfig cfg;
    cfg.od_bin_width = 0.0;
    cfg.sigma_detuning = 0.0;
    cfg.sigma_beta = 0.0;
    cfg.trials = 3;
    cfg.seed = 0;

    const auto averaged = averaged_fringe(params, detunings, cfg);
    const auto ideal = fringe_scan(params, detunings, 0.0, mc_quadrature());
    REQUIRE(averaged.size() == ideal.size());
    for (size_t i = 0; i < averaged.size(); ++i) {
        REQUIRE(averaged[i].ok);
        REQUIRE(ideal[i].ok);
        CHECK(averaged[i].mean_g2 ==
              doctest::Approx(ideal[i].g2_at_tau_star).epsilon(1e-9));
        CHECK(averaged[i].std_g2 == 0.0);
        CHECK(averaged[i].trials_used == 3);
    }
}

TEST_CASE("OD jitter inflates the fringe peak and fills the dip") {
    // eta enters g2 exponentially in the atom-number error, so a symmetric
    // OD distribution pushes the mean peak above the ideal value of 4
    // (convexity) while the dip mean stays small but strictly positive.
    const auto params = chain();
    const std::vector<double> detunings = {2.0 * kPi * -1.2035e6, 0.0};

    ImperfectionConfig cfg;
    cfg.od_bin_width = 1.7;
    cfg.sigma_detuning = 0.0;
    cfg.sigma_beta = 0.0;
    cfg.trials = 400;
    cfg.seed = 12;

    const auto pts = averaged_fringe(params, detunings, cfg);
    REQUIRE(pts.size() == 2);
    REQUIRE(pts[0].ok);
    REQUIRE(pts[1].ok);

    const AveragedFringePoint& peak = pts[0];  // ideal phase crossing ~0
    const AveragedFringePoint& dip = pts[1];   // ideal phase pi, g2 ~ 0
    CHECK(peak.mean_g2 > 4.0);
    CHECK(peak.mean_g2 < 6.0);
    CHECK(dip.mean_g2 > 0.0);
    CHECK(dip.mean_g2 < 0.5);
    CHECK(peak.std_g2 > 0.0);
}

TEST_CASE("trial spread shrinks as one over sqrt trials") {
    const auto params = chain();
    const std::vector<double> detunings = {0.0};

    auto spread_of_mean = [&](int trials) {
        double s = 0.0;
        double s2 = 0.0;
        const int reps = 30;
        for (int rep = 0; rep < reps; ++rep) {
            ImperfectionConfig cfg;
            cfg.od_bin_width = 1.7;
            cfg.sigma_detuning = 0.0;
            cfg.sigma_beta = 0.0;
            cfg.trials = trials;
            cfg.seed = 1000 + static_cast<std::uint64_t>(rep);
            const auto pts = averaged_fringe(params, detunings, cfg);
            REQUIRE(pts[0].ok);
            s += pts[0].mean_g2;
            s2 += pts[0].mean_g2 * pts[0].mean_g2;
        }
        s /= reps;
        return std::sqrt(s2 / reps - s * s);
    };

    const double wide = spread_of_mean(50);
    const double tight = spread_of_mean(800);
    CHECK(wide / tight == doctest::Approx(4.0).epsilon(0.35));
}

TEST_CASE("detuning noise lowers the averaged visibility") {
    const auto params = chain();
    const auto detunings = fringe_window(5);

    ImperfectionConfig base;
    base.od_bin_width = 1.7;
    base.sigma_beta = 0.0;
    base.trials = 300;
    base.seed = 4;

    const std::vector<double> sigmas = {0.0, 2.0 * kPi * 200e3};
    const auto family = visibility_vs_sigma(params, detunings, base, sigmas);
    REQUIRE(family.size() == 2);
    CHECK(family[0].sigma_detuning == 0.0);
    CHECK(family[0].visibility > family[1].visibility);
    CHECK(family[0].visibility > 0.0);
    CHECK(family[1].visibility < 1.0);
}

TEST_CASE("coupling jitter alone barely moves the visibility") {
    const auto params = chain();
    const auto detunings = fringe_window(5);

    ImperfectionConfig quiet;
    quiet.od_bin_width = 0.0;
    quiet.sigma_detuning = 0.0;
    quiet.sigma_beta = 0.0;
    quiet.trials = 300;
    quiet.seed = 8;

    ImperfectionConfig beta_only = quiet;
    beta_only.sigma_beta = 0.002;

    auto vis = [](const std::vector<AveragedFringePoint>& pts) {
        std::vector<double> means;
        for (const auto& p : pts)
            if (p.ok) means.push_back(p.mean_g2);
        return visibility(means);
    };

    const double v0 = vis(averaged_fringe(params, detunings, quiet));
    const double vb = vis(averaged_fringe(params, detunings, beta_only));
    CHECK(std::fabs(vb - v0) < 0.05);
}

TEST_CASE("imperfection config validation") {
    ImperfectionConfig cfg;
    cfg.od_bin_width = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = ImperfectionConfig{};
    cfg.trials = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = ImperfectionConfig{};
    cfg.sigma_detuning = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
