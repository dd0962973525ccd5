#include "tpi/csv.hpp"

#include <cerrno>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tpi/constants.hpp"
#include "tpi/core_model.hpp"
#include "tpi/errors.hpp"

#include <json.hpp>

namespace tpi {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out.good()) {
        throw IoError("write failed: " + path);
    }
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for reading: " + path);
    }
    return in;
}

void expect_header(std::ifstream& in, const std::string& path, const std::string& header) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError(path + ":1: empty file, expected header '" + header + "'");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) {
        throw ConfigError(path + ":1: expected header '" + header + "', got '" + line +
                          "'");
    }
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        const size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

double parse_field_double(const std::string& path, int line, const std::string& field) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size() || errno == ERANGE) {
        throw ConfigError(path + ":" + std::to_string(line) + ": expected a number, got '" +
                          field + "'");
    }
    return v;
}

long long parse_field_int(const std::string& path, int line, const std::string& field) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(field.c_str(), &end, 10);
    if (field.empty() || end != field.c_str() + field.size() || errno == ERANGE) {
        throw ConfigError(path + ":" + std::to_string(line) +
                          ": expected an integer count, got '" + field + "'");
    }
    return v;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_g2_csv(const std::string& path, const TwoPhotonState& state) {
    const std::vector<double> g2 = g2_of_tau(state);
    auto out = open_out(path);
    out << "tau_seconds,g2,phi_real,phi_imag,delta_phi\n";
    for (int i = 0; i < state.grid.points(); ++i) {
        const std::complex<double> phi = state.phi_tau[static_cast<size_t>(i)];
        double dphi = std::arg(phi / state.coherent_amp);  // 0 where phi vanishes
        if (dphi <= -kPi) dphi += 2.0 * kPi;
        out << format_double(state.grid.tau(i)) << ',' << format_double(g2[i]) << ','
            << format_double(phi.real()) << ',' << format_double(phi.imag()) << ','
            << format_double(dphi) << '\n';
    }
    finish(out, path);
}

void write_fringe_csv(const std::string& path, const std::vector<FringePoint>& points) {
    auto out = open_out(path);
    out << "detuning_hz,n_match,delta_phi_unwrapped,g2\n";
    for (const auto& pt : points) {
        out << format_double(pt.detuning / (2.0 * kPi)) << ','
            << format_double(pt.n_match) << ',' << format_double(pt.phase_unwrapped)
            << ',' << format_double(pt.g2_at_tau_star) << '\n';
    }
    finish(out, path);
}

void write_montecarlo_csv(const std::string& path,
                          const std::vector<AveragedFringePoint>& points) {
    auto out = open_out(path);
    out << "detuning_hz,mean_g2,std_g2,trials\n";
    for (const auto& pt : points) {
        out << format_double(pt.detuning / (2.0 * kPi)) << ',' << format_double(pt.mean_g2)
            << ',' << format_double(pt.std_g2) << ',' << pt.trials_used << '\n';
    }
    finish(out, path);
}

void write_visibility_csv(const std::string& path,
                          const std::vector<VisibilityPoint>& points) {
    auto out = open_out(path);
    out << "sigma_detuning_hz,visibility\n";
    for (const auto& pt : points) {
        out << format_double(pt.sigma_detuning / (2.0 * kPi)) << ','
            << format_double(pt.visibility) << '\n';
    }
    finish(out, path);
}

void write_saturation_csv(const std::string& path, const SaturationDataset& data) {
    auto out = open_out(path);
    out << "power_watts,transmission\n";
    for (size_t i = 0; i < data.power.size(); ++i) {
        out << format_double(data.power[i]) << ',' << format_double(data.transmission[i])
            << '\n';
    }
    finish(out, path);
}

void write_histogram_csv(const std::string& path, const CoincidenceHistogram& hist) {
    auto out = open_out(path);
    out << "tau_seconds,counts\n";
    for (size_t i = 0; i < hist.bin_centers.size(); ++i) {
        out << format_double(hist.bin_centers[i]) << ',' << hist.counts[i] << '\n';
    }
    finish(out, path);
}

void write_histogram_sidecar(const std::string& path, const CoincidenceHistogram& hist) {
    nlohmann::json j;
    j["baseline_expected"] = hist.baseline_expected;
    j["bin_width_seconds"] = hist.bin_width();
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    finish(out, path);
}

SaturationDataset read_saturation_csv(const std::string& path) {
    auto in = open_in(path);
    expect_header(in, path, "power_watts,transmission");
    SaturationDataset data;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 2) {
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected 2 fields, got " + std::to_string(fields.size()));
        }
        data.power.push_back(parse_field_double(path, lineno, fields[0]));
        data.transmission.push_back(parse_field_double(path, lineno, fields[1]));
    }
    data.metadata = path;
    data.validate();
    return data;
}

CoincidenceHistogram read_histogram_csv(const std::string& csv_path,
                                        const std::string& sidecar_path) {
    auto in = open_in(csv_path);
    expect_header(in, csv_path, "tau_seconds,counts");
    CoincidenceHistogram hist;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 2) {
            throw ConfigError(csv_path + ":" + std::to_string(lineno) +
                              ": expected 2 fields, got " + std::to_string(fields.size()));
        }
        hist.bin_centers.push_back(parse_field_double(csv_path, lineno, fields[0]));
        hist.counts.push_back(parse_field_int(csv_path, lineno, fields[1]));
    }

    auto side = open_in(sidecar_path);
    std::ostringstream buf;
    buf << side.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(sidecar_path + ": invalid JSON: " + e.what());
    }
    if (!j.contains("baseline_expected") || !j["baseline_expected"].is_number()) {
        throw ConfigError(sidecar_path + ": missing numeric 'baseline_expected'");
    }
    if (!j.contains("bin_width_seconds") || !j["bin_width_seconds"].is_number()) {
        throw ConfigError(sidecar_path + ": missing numeric 'bin_width_seconds'");
    }
    hist.baseline_expected = j["baseline_expected"].get<double>();
    const double width = j["bin_width_seconds"].get<double>();
    hist.validate();
    if (hist.bin_centers.size() >= 2 &&
        std::fabs(hist.bin_width() - width) > 1e-6 * std::fabs(width)) {
        throw ConfigError(sidecar_path + ": bin_width_seconds disagrees with the bin "
                          "spacing in " + csv_path);
    }
    return hist;
}

}  // namespace tpi
