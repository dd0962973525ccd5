// Command-line front end: every subcommand loads one experiment config, writes
// its data products into an output directory, and drops a manifest.json with
// checksums beside them. Exit codes: 0 ok, 2 config error, 3 numerical error,
// 4 I/O error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tpi/config.hpp"
#include "tpi/constants.hpp"
#include "tpi/core_model.hpp"
#include "tpi/csv.hpp"
#include "tpi/errors.hpp"
#include "tpi/estimation.hpp"
#include "tpi/imperfections.hpp"
#include "tpi/manifest.hpp"
#include "tpi/matcher.hpp"
#include "tpi/saturation.hpp"
#include "tpi/types.hpp"

namespace {

using tpi::kPi;

struct DetuningRange {
    std::string list;       // comma-separated Hz values
    double from_hz = 0.0;
    double to_hz = 0.0;
    int points = 0;
    bool has_from = false;
    bool has_to = false;
};

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    size_t start = 0;
    while (start <= text.size()) {
        const size_t comma = text.find(',', start);
        const std::string field = comma == std::string::npos
                                      ? text.substr(start)
                                      : text.substr(start, comma - start);
        char* end = nullptr;
        const double v = std::strtod(field.c_str(), &end);
        if (field.empty() || end != field.c_str() + field.size()) {
            throw tpi::ConfigError(flag + ": expected a comma-separated number list, got '" +
                                   field + "'");
        }
        out.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) {
        throw tpi::ConfigError(flag + ": empty list");
    }
    return out;
}

// Detunings in rad/s from either an explicit list or a linear range, all Hz
// at the flag boundary.
std::vector<double> resolve_detunings(const DetuningRange& range) {
    std::vector<double> hz;
    if (!range.list.empty()) {
        hz = parse_double_list(range.list, "--detunings-hz");
    } else if (range.has_from || range.has_to || range.points > 0) {
        if (!range.has_from || !range.has_to || range.points < 1) {
            throw tpi::ConfigError(
                "a detuning range needs --from-hz, --to-hz and --points >= 1");
        }
        if (range.points == 1) {
            hz.push_back(range.from_hz);
        } else {
            for (int i = 0; i < range.points; ++i) {
                hz.push_back(range.from_hz + (range.to_hz - range.from_hz) * i /
                                                 (range.points - 1));
            }
        }
    } else {
        throw tpi::ConfigError(
            "no detunings given: use --detunings-hz or --from-hz/--to-hz/--points");
    }
    std::vector<double> angular;
    angular.reserve(hz.size());
    for (double f : hz) angular.push_back(2.0 * kPi * f);
    return angular;
}

std::string out_directory(const std::string& cli_out, const tpi::ExperimentConfig& cfg) {
    std::string dir = !cli_out.empty() ? cli_out
                      : !cfg.output_path.empty() ? cfg.output_path
                                                 : std::string(".");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw tpi::IoError("cannot create output directory '" + dir + "': " + ec.message());
    }
    return dir;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw tpi::IoError("cannot open for writing: " + path);
    }
    out << j.dump(2) << '\n';
    out.flush();
    if (!out.good()) {
        throw tpi::IoError("write failed: " + path);
    }
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

int run(int argc, char** argv) {
    CLI::App app{"two-photon interferometer toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir_flag;
    std::optional<std::uint64_t> seed_flag;
    app.add_option("--config", config_path, "experiment config (INI)")->required();
    app.add_option("--out", out_dir_flag, "output directory (default: [output] path or .)");
    app.add_option("--seed", seed_flag, "override the RNG seed for stochastic commands");

    auto* cmd_g2 = app.add_subcommand("g2", "correlation function over the delay grid");

    auto* cmd_fringe = app.add_subcommand("fringe", "matched fringe over a detuning scan");
    DetuningRange fringe_range;
    double fringe_tau_star = 0.0;
    cmd_fringe->add_option("--detunings-hz", fringe_range.list, "explicit detuning list");
    cmd_fringe->add_option("--from-hz", fringe_range.from_hz, "scan start")
        ->each([&](const std::string&) { fringe_range.has_from = true; });
    cmd_fringe->add_option("--to-hz", fringe_range.to_hz, "scan end")
        ->each([&](const std::string&) { fringe_range.has_to = true; });
    cmd_fringe->add_option("--points", fringe_range.points, "scan length");
    cmd_fringe->add_option("--tau-star-s", fringe_tau_star, "matching delay (s)");

    auto* cmd_match = app.add_subcommand("match", "matching atom number at one detuning");
    double match_tau_star = 0.0;
    cmd_match->add_option("--tau-star-s", match_tau_star, "matching delay (s)");

    auto* cmd_fit_sat =
        app.add_subcommand("fit-saturation", "fit (beta, N) to a transmission curve");
    std::string sat_data_path;
    bool sat_weight_log = false;
    cmd_fit_sat->add_option("--data", sat_data_path, "power_watts,transmission CSV")
        ->required();
    cmd_fit_sat->add_flag("--weight-log-t", sat_weight_log, "fit residuals in log T");

    auto* cmd_synth = app.add_subcommand("synth-histogram",
                                         "Poisson coincidence histogram from the model");
    double synth_baseline = 0.0;
    double synth_contrast = 1.0;
    cmd_synth->add_option("--baseline", synth_baseline, "expected counts per bin at g2=1")
        ->required();
    cmd_synth->add_option("--contrast", synth_contrast, "fringe contrast C applied to g2");

    auto* cmd_fit_contrast =
        app.add_subcommand("fit-contrast", "MLE of the contrast from a histogram");
    std::string hist_path;
    std::string sidecar_path;
    tpi::ContrastFitOptions fit_opts;
    bool fit_baseline_jointly = false;
    std::optional<double> baseline_override;
    cmd_fit_contrast->add_option("--histogram", hist_path, "tau_seconds,counts CSV")
        ->required();
    cmd_fit_contrast->add_option("--sidecar", sidecar_path,
                                 "histogram sidecar JSON (default: CSV path with .json)");
    cmd_fit_contrast->add_option("--ci-delta-lnl", fit_opts.ci_delta_lnl,
                                 "profile-likelihood drop for the CI");
    cmd_fit_contrast->add_option("--c-min", fit_opts.c_min, "contrast search lower bound");
    cmd_fit_contrast->add_option("--c-max", fit_opts.c_max, "contrast search upper bound");
    cmd_fit_contrast->add_flag("--fit-baseline", fit_baseline_jointly,
                               "profile the baseline out of the likelihood");
    cmd_fit_contrast->add_option("--baseline", baseline_override,
                                 "fixed baseline override (counts per bin)");

    auto* cmd_mc = app.add_subcommand("montecarlo",
                                      "fringe averaged over experimental imperfections");
    DetuningRange mc_range;
    cmd_mc->add_option("--detunings-hz", mc_range.list, "explicit detuning list");
    cmd_mc->add_option("--from-hz", mc_range.from_hz, "scan start")
        ->each([&](const std::string&) { mc_range.has_from = true; });
    cmd_mc->add_option("--to-hz", mc_range.to_hz, "scan end")
        ->each([&](const std::string&) { mc_range.has_to = true; });
    cmd_mc->add_option("--points", mc_range.points, "scan length");

    auto* cmd_vis = app.add_subcommand("visibility",
                                       "averaged-fringe visibility vs detuning jitter");
    DetuningRange vis_range;
    std::string vis_sigmas;
    cmd_vis->add_option("--detunings-hz", vis_range.list, "explicit detuning list");
    cmd_vis->add_option("--from-hz", vis_range.from_hz, "scan start")
        ->each([&](const std::string&) { vis_range.has_from = true; });
    cmd_vis->add_option("--to-hz", vis_range.to_hz, "scan end")
        ->each([&](const std::string&) { vis_range.has_to = true; });
    cmd_vis->add_option("--points", vis_range.points, "scan length");
    cmd_vis->add_option("--sigmas-hz", vis_sigmas, "comma-separated jitter sigmas (Hz)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // bad usage is a config error
    }

    const tpi::ExperimentConfig cfg = tpi::load_config(config_path);
    const std::string dir = out_directory(out_dir_flag, cfg);

    tpi::RunManifest manifest;
    manifest.config_echo = tpi::serialize_config(cfg);

    if (cmd_g2->parsed()) {
        manifest.command = "g2";
        const tpi::TwoPhotonState state =
            tpi::phi_ensemble_time(cfg.params, cfg.drive, cfg.grid, cfg.quadrature);
        tpi::write_g2_csv(join_path(dir, "g2.csv"), state);
        manifest.outputs.push_back({"g2.csv", "", 0});
        manifest.write(dir);
        std::cout << "wrote " << join_path(dir, "g2.csv") << " (" << state.grid.points()
                  << " delays)\n";
        return 0;
    }

    if (cmd_fringe->parsed()) {
        manifest.command = "fringe";
        const std::vector<double> detunings = resolve_detunings(fringe_range);
        const auto points =
            tpi::fringe_scan(cfg.params, detunings, fringe_tau_star, cfg.quadrature);
        int failed = 0;
        for (const auto& pt : points) {
            if (!pt.ok) {
                ++failed;
                manifest.warnings.push_back(
                    "detuning_hz=" + tpi::format_double(pt.detuning / (2.0 * kPi)) + ": " +
                    pt.error);
            }
        }
        tpi::write_fringe_csv(join_path(dir, "fringe.csv"), points);
        manifest.outputs.push_back({"fringe.csv", "", 0});
        manifest.write(dir);
        std::cout << "wrote " << join_path(dir, "fringe.csv") << " (" << points.size()
                  << " detunings, " << failed << " unmatched)\n";
        return 0;
    }

    if (cmd_match->parsed()) {
        manifest.command = "match";
        const tpi::MatchingPoint mp = tpi::find_matching_n(
            cfg.params, cfg.drive.detuning, match_tau_star, cfg.quadrature);
        nlohmann::json j;
        j["detuning_hz"] = mp.detuning / (2.0 * kPi);
        j["n_match"] = mp.n_match;
        j["residual"] = mp.residual;
        j["tau_star_s"] = mp.tau_star;
        write_json(join_path(dir, "match.json"), j);
        manifest.outputs.push_back({"match.json", "", 0});
        manifest.write(dir);
        std::cout << "matched N = " << mp.n_match << " at "
                  << mp.detuning / (2.0 * kPi) << " Hz\n";
        return 0;
    }

    if (cmd_fit_sat->parsed()) {
        manifest.command = "fit-saturation";
        const tpi::SaturationDataset data = tpi::read_saturation_csv(sat_data_path);
        const tpi::SaturationFit fit =
            tpi::fit_saturation(data, cfg.params, sat_weight_log);
        nlohmann::json j;
        j["beta_hat"] = fit.beta_hat;
        j["covariance"] = fit.covariance;
        j["iterations"] = fit.iterations;
        j["n_hat"] = fit.n_hat;
        j["p_sat_hat_w"] = fit.p_sat_hat;
        j["residual_norm"] = fit.residual_norm;
        write_json(join_path(dir, "saturation_fit.json"), j);

        // Fitted model sampled on a dense log grid across the data range.
        tpi::SaturationDataset curve;
        tpi::EmitterChainParams fitted = cfg.params;
        fitted.beta = fit.beta_hat;
        const int n_curve = 200;
        for (int i = 0; i < n_curve; ++i) {
            const double f = static_cast<double>(i) / (n_curve - 1);
            const double p =
                data.power.front() * std::pow(data.power.back() / data.power.front(), f);
            curve.power.push_back(p);
            curve.transmission.push_back(
                tpi::transmission_saturated(fitted, fit.n_hat, p));
        }
        tpi::write_saturation_csv(join_path(dir, "saturation_fit_curve.csv"), curve);

        manifest.outputs.push_back({"saturation_fit.json", "", 0});
        manifest.outputs.push_back({"saturation_fit_curve.csv", "", 0});
        manifest.write(dir);
        std::cout << "fit: beta = " << fit.beta_hat << ", N = " << fit.n_hat << " ("
                  << fit.iterations << " steps)\n";
        return 0;
    }

    if (cmd_synth->parsed()) {
        manifest.command = "synth-histogram";
        const std::uint64_t seed = seed_flag.value_or(0);
        manifest.seed = seed;
        const tpi::TwoPhotonState state =
            tpi::phi_ensemble_time(cfg.params, cfg.drive, cfg.grid, cfg.quadrature);
        const std::vector<double> g2 = tpi::g2_of_tau(state);
        std::vector<double> centers(static_cast<size_t>(cfg.grid.points()));
        for (int i = 0; i < cfg.grid.points(); ++i) {
            centers[static_cast<size_t>(i)] = cfg.grid.tau(i);
        }
        std::vector<double> target(g2.size());
        int clipped = 0;
        for (size_t i = 0; i < g2.size(); ++i) {
            target[i] = synth_contrast * (g2[i] - 1.0) + 1.0;
            if (target[i] < 0.0) {
                target[i] = 0.0;
                ++clipped;
            }
        }
        if (clipped > 0) {
            manifest.warnings.push_back("target g2 clipped at 0 for " +
                                        std::to_string(clipped) + " bins");
        }
        const tpi::CoincidenceHistogram hist =
            tpi::synth_histogram(centers, target, synth_baseline, seed);
        tpi::write_histogram_csv(join_path(dir, "histogram.csv"), hist);
        tpi::write_histogram_sidecar(join_path(dir, "histogram.json"), hist);
        manifest.outputs.push_back({"histogram.csv", "", 0});
        manifest.outputs.push_back({"histogram.json", "", 0});
        manifest.write(dir);
        std::cout << "wrote " << join_path(dir, "histogram.csv") << " ("
                  << hist.counts.size() << " bins, seed " << seed << ")\n";
        return 0;
    }

    if (cmd_fit_contrast->parsed()) {
        manifest.command = "fit-contrast";
        if (sidecar_path.empty()) {
            std::filesystem::path p(hist_path);
            p.replace_extension(".json");
            sidecar_path = p.string();
        }
        const tpi::CoincidenceHistogram hist =
            tpi::read_histogram_csv(hist_path, sidecar_path);
        fit_opts.fit_baseline_jointly = fit_baseline_jointly;
        fit_opts.baseline_override = baseline_override;

        const tpi::EnsembleAmplitude ea(cfg.params, cfg.drive.detuning, cfg.quadrature);
        std::vector<double> model(hist.bin_centers.size());
        for (size_t i = 0; i < hist.bin_centers.size(); ++i) {
            model[i] = ea.g2(cfg.drive.atom_number, hist.bin_centers[i]);
        }
        const tpi::ContrastFit fit = tpi::mle_fit_contrast(hist, model, fit_opts);
        if (fit.boundary_warning) {
            manifest.warnings.push_back("contrast estimate or CI hit a search bound");
        }
        nlohmann::json j;
        j["baseline_used"] = fit.baseline_used;
        j["boundary_warning"] = fit.boundary_warning;
        j["c_hat"] = fit.c_hat;
        j["ci_delta_lnl"] = fit_opts.ci_delta_lnl;
        j["ci_lower"] = fit.ci_lower;
        j["ci_upper"] = fit.ci_upper;
        j["g2_zero_hat"] = fit.g2_zero_hat;
        j["log_likelihood"] = fit.log_likelihood;
        write_json(join_path(dir, "contrast_fit.json"), j);
        manifest.outputs.push_back({"contrast_fit.json", "", 0});
        manifest.write(dir);
        std::cout << "contrast = " << fit.c_hat << " [" << fit.ci_lower << ", "
                  << fit.ci_upper << "]\n";
        return 0;
    }

    if (cmd_mc->parsed()) {
        manifest.command = "montecarlo";
        if (!cfg.imperfections) {
            throw tpi::ConfigError("montecarlo needs an [imperfections] section in " +
                                   config_path);
        }
        tpi::ImperfectionConfig icfg = *cfg.imperfections;
        if (seed_flag) icfg.seed = *seed_flag;
        manifest.seed = icfg.seed;
        const std::vector<double> detunings = resolve_detunings(mc_range);
        const auto points = tpi::averaged_fringe(cfg.params, detunings, icfg);
        for (const auto& pt : points) {
            if (!pt.ok) {
                manifest.warnings.push_back(
                    "detuning_hz=" + tpi::format_double(pt.detuning / (2.0 * kPi)) +
                    ": no matching point");
            }
        }
        tpi::write_montecarlo_csv(join_path(dir, "montecarlo.csv"), points);
        manifest.outputs.push_back({"montecarlo.csv", "", 0});
        manifest.write(dir);
        std::cout << "wrote " << join_path(dir, "montecarlo.csv") << " (" << points.size()
                  << " detunings x " << icfg.trials << " trials)\n";
        return 0;
    }

    if (cmd_vis->parsed()) {
        manifest.command = "visibility";
        if (!cfg.imperfections) {
            throw tpi::ConfigError("visibility needs an [imperfections] section in " +
                                   config_path);
        }
        tpi::ImperfectionConfig base = *cfg.imperfections;
        if (seed_flag) base.seed = *seed_flag;
        manifest.seed = base.seed;
        const std::vector<double> detunings = resolve_detunings(vis_range);
        std::vector<double> sigmas;
        for (double hz : parse_double_list(vis_sigmas, "--sigmas-hz")) {
            sigmas.push_back(2.0 * kPi * hz);
        }
        const auto points =
            tpi::visibility_vs_sigma(cfg.params, detunings, base, sigmas);
        tpi::write_visibility_csv(join_path(dir, "visibility.csv"), points);
        manifest.outputs.push_back({"visibility.csv", "", 0});
        manifest.write(dir);
        std::cout << "wrote " << join_path(dir, "visibility.csv") << " (" << points.size()
                  << " sigmas)\n";
        return 0;
    }

    throw tpi::ConfigError("no subcommand dispatched");
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const tpi::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const tpi::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const tpi::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
