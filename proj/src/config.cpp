#include "tpi/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "tpi/constants.hpp"
#include "tpi/csv.hpp"
#include "tpi/errors.hpp"

namespace tpi {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& filename, int line, const std::string& msg) {
    throw ConfigError(filename + ":" + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& filename, int line, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size() || value.empty() || errno == ERANGE) {
        fail(filename, line, "expected a number, got '" + value + "'");
    }
    return v;
}

long long parse_int(const std::string& filename, int line, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (end != value.c_str() + value.size() || value.empty() || errno == ERANGE) {
        fail(filename, line, "expected an integer, got '" + value + "'");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& filename, int line, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (end != value.c_str() + value.size() || value.empty() || errno == ERANGE ||
        value.front() == '-') {
        fail(filename, line, "expected an unsigned integer, got '" + value + "'");
    }
    return v;
}

// section -> allowed keys
const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"params", {"beta", "gamma_hz", "probe_wavelength_m"}},
        {"drive", {"detuning_hz", "atom_number", "probe_power_w"}},
        {"grid", {"tau_max_s", "num_samples"}},
        {"quadrature", {"omega_span_gamma", "num_samples"}},
        {"imperfections",
         {"od_bin_width", "sigma_detuning_hz", "sigma_beta", "trials", "seed"}},
        {"output", {"path"}},
    };
    return s;
}

}  // namespace

void ExperimentConfig::validate() const {
    params.validate();
    drive.validate(params);
    grid.validate(params.gamma_tot);
    quadrature.validate();
    if (imperfections) imperfections->validate();
}

ExperimentConfig parse_config(const std::string& text, const std::string& filename) {
    std::map<std::string, std::pair<int, std::string>> values;  // "sec.key" -> (line, raw)
    std::set<std::string> sections_seen;

    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s.front() == '#' || s.front() == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(filename, line, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (schema().find(section) == schema().end()) {
                fail(filename, line, "unknown section [" + section + "]");
            }
            sections_seen.insert(section);
            continue;
        }
        const size_t eq = s.find('=');
        if (eq == std::string::npos) {
            fail(filename, line, "expected 'key = value', got '" + s + "'");
        }
        if (section.empty()) fail(filename, line, "key outside of any [section]");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        const auto& allowed = schema().at(section);
        if (allowed.find(key) == allowed.end()) {
            fail(filename, line, "unknown key '" + key + "' in [" + section + "]");
        }
        const std::string qualified = section + "." + key;
        if (values.count(qualified)) {
            fail(filename, line, "duplicate key '" + qualified + "' (first at line " +
                                     std::to_string(values[qualified].first) + ")");
        }
        values[qualified] = {line, value};
    }

    const auto take = [&](const std::string& qualified) -> std::optional<std::pair<int, std::string>> {
        auto it = values.find(qualified);
        if (it == values.end()) return std::nullopt;
        return it->second;
    };
    const auto require = [&](const std::string& qualified) {
        auto v = take(qualified);
        if (!v) throw ConfigError(filename + ": missing required key '" + qualified + "'");
        return *v;
    };

    ExperimentConfig cfg;

    auto beta = require("params.beta");
    cfg.params.beta = parse_double(filename, beta.first, beta.second);
    auto gamma = require("params.gamma_hz");
    cfg.params.gamma_tot = 2.0 * kPi * parse_double(filename, gamma.first, gamma.second);
    if (auto v = take("params.probe_wavelength_m")) {
        cfg.params.probe_wavelength = parse_double(filename, v->first, v->second);
    }

    if (auto v = take("drive.detuning_hz")) {
        cfg.drive.detuning = 2.0 * kPi * parse_double(filename, v->first, v->second);
    }
    if (auto v = take("drive.atom_number")) {
        cfg.drive.atom_number = parse_double(filename, v->first, v->second);
    }
    if (auto v = take("drive.probe_power_w")) {
        cfg.drive.probe_power = parse_double(filename, v->first, v->second);
    }

    const auto tau_max = take("grid.tau_max_s");
    const auto num = take("grid.num_samples");
    if (tau_max.has_value() != num.has_value()) {
        throw ConfigError(filename + ": [grid] needs both tau_max_s and num_samples");
    }
    if (tau_max) {
        cfg.grid.tau_max = parse_double(filename, tau_max->first, tau_max->second);
        cfg.grid.num_samples =
            static_cast<int>(parse_int(filename, num->first, num->second));
    } else {
        // Default window: 12 linewidths at 480 intervals, comfortably past the
        // 10-linewidth floor and fine enough for the correlation features.
        cfg.grid.tau_max = 12.0 / cfg.params.gamma_tot;
        cfg.grid.num_samples = 480;
    }

    if (auto v = take("quadrature.omega_span_gamma")) {
        cfg.quadrature.omega_span = parse_double(filename, v->first, v->second);
    }
    if (auto v = take("quadrature.num_samples")) {
        cfg.quadrature.num_samples =
            static_cast<int>(parse_int(filename, v->first, v->second));
    }

    if (sections_seen.count("imperfections")) {
        ImperfectionConfig imp;
        if (auto v = take("imperfections.od_bin_width")) {
            imp.od_bin_width = parse_double(filename, v->first, v->second);
        }
        if (auto v = take("imperfections.sigma_detuning_hz")) {
            imp.sigma_detuning = 2.0 * kPi * parse_double(filename, v->first, v->second);
        }
        if (auto v = take("imperfections.sigma_beta")) {
            imp.sigma_beta = parse_double(filename, v->first, v->second);
        }
        if (auto v = take("imperfections.trials")) {
            imp.trials = static_cast<int>(parse_int(filename, v->first, v->second));
        }
        if (auto v = take("imperfections.seed")) {
            imp.seed = parse_u64(filename, v->first, v->second);
        }
        cfg.imperfections = imp;
    }

    if (auto v = take("output.path")) {
        cfg.output_path = v->second;
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read config file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string serialize_config(const ExperimentConfig& config) {
    std::ostringstream out;
    out << "[params]\n";
    out << "beta = " << format_double(config.params.beta) << "\n";
    out << "gamma_hz = " << format_double(config.params.gamma_tot / (2.0 * kPi)) << "\n";
    out << "probe_wavelength_m = " << format_double(config.params.probe_wavelength)
        << "\n";
    out << "\n[drive]\n";
    out << "detuning_hz = " << format_double(config.drive.detuning / (2.0 * kPi)) << "\n";
    out << "atom_number = " << format_double(config.drive.atom_number) << "\n";
    if (config.drive.probe_power) {
        out << "probe_power_w = " << format_double(*config.drive.probe_power) << "\n";
    }
    out << "\n[grid]\n";
    out << "tau_max_s = " << format_double(config.grid.tau_max) << "\n";
    out << "num_samples = " << config.grid.num_samples << "\n";
    out << "\n[quadrature]\n";
    out << "omega_span_gamma = " << format_double(config.quadrature.omega_span) << "\n";
    out << "num_samples = " << config.quadrature.num_samples << "\n";
    if (config.imperfections) {
        const ImperfectionConfig& imp = *config.imperfections;
        out << "\n[imperfections]\n";
        out << "od_bin_width = " << format_double(imp.od_bin_width) << "\n";
        out << "sigma_detuning_hz = " << format_double(imp.sigma_detuning / (2.0 * kPi))
            << "\n";
        out << "sigma_beta = " << format_double(imp.sigma_beta) << "\n";
        out << "trials = " << imp.trials << "\n";
        out << "seed = " << imp.seed << "\n";
    }
    if (!config.output_path.empty()) {
        out << "\n[output]\n";
        out << "path = " << config.output_path << "\n";
    }
    return out.str();
}

}  // namespace tpi
