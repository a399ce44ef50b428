#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slowfast/errors.hpp"
#include "slowfast/models.hpp"

namespace slowfast {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// --- CSV --------------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline void write_csv(const std::filesystem::path& path, const CsvTable& t,
                      const std::vector<std::string>& meta_comments = {}) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string());
    for (const auto& c : meta_comments) os << "# " << c << "\n";
    for (std::size_t i = 0; i < t.header.size(); ++i)
        os << (i ? "," : "") << t.header[i];
    os << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << fmt_double(row[i]);
        os << "\n";
    }
    if (!os) throw IoError("write failed: " + path.string());
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!have_header) {
            t.header = cells;
            have_header = true;
            continue;
        }
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(std::stod(c));
        if (row.size() != t.header.size())
            throw SchemaMismatch("csv row width mismatch in " + path.string());
        t.rows.push_back(std::move(row));
    }
    return t;
}

// --- key = value configuration ---------------------------------------------

// Sections per model plus a [run] section; unknown keys are rejected.
struct Config {
    std::string model = "rotator";
    PitchforkParams pitchfork{};
    TanhParams tanh_model{};
    RotatorParams rotator{};
    NetworkParams network{{-4.0, -4.6}, 1.0, 10.0, kPi / 2, 0.1};

    // run settings
    long long trials = 10000;
    std::uint64_t seed = 1;
    int resolution = 256;
    int threads = 1;
    double mu_lo = -10.0, mu_hi = 3.0;
    double fast_lo = 0.0, fast_hi = kTwoPi;
    double mu_threshold = 9.0;
    double horizon = 0.0;  // 0 = 10/eps
    double rel_tol = 1e-10, abs_tol = 1e-10;
    std::vector<double> eps_list{0.05, 1.0 / 15.0, 0.08, 0.1, 2.0 / 15.0, 0.2};
    std::string format = "csv";
    std::string out_dir = "out";

    void validate() const {
        if (model != "pitchfork" && model != "tanh" && model != "rotator" &&
            model != "network")
            throw UsageError("unknown model: " + model);
        pitchfork.validate();
        tanh_model.validate();
        rotator.validate();
        network.validate();
        if (trials < 1) throw UsageError("M must be >= 1");
        if (resolution < 2) throw UsageError("resolution must be >= 2");
        if (format != "csv" && format != "json")
            throw UsageError("format must be csv or json");
        if (!(rel_tol > 0) || !(abs_tol > 0))
            throw UsageError("tolerances must be > 0");
    }

    SlowFastSystem make_system() const {
        if (model == "pitchfork") return make_pitchfork(pitchfork);
        if (model == "tanh") return make_tanh(tanh_model);
        if (model == "rotator") return make_rotator(rotator);
        return make_network(network);
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (!cell.empty()) out.push_back(std::stod(cell));
    }
    return out;
}

inline std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + fmt_double(v[i]);
    return s;
}

}  // namespace detail

inline void apply_config_entry(Config& c, const std::string& section,
                               const std::string& key,
                               const std::string& value) {
    auto num = [&]() {
        try {
            return std::stod(value);
        } catch (...) {
            throw UsageError("bad numeric value for " + section + "." + key);
        }
    };
    auto bad = [&]() -> double {
        throw UsageError("unknown key: " + section + "." + key);
    };
    if (section == "pitchfork") {
        if (key == "a") c.pitchfork.a = num();
        else if (key == "b") c.pitchfork.b = num();
        else if (key == "eps") c.pitchfork.eps = num();
        else bad();
    } else if (section == "tanh") {
        if (key == "a") c.tanh_model.a = num();
        else if (key == "b") c.tanh_model.b = num();
        else if (key == "eps") c.tanh_model.eps = num();
        else bad();
    } else if (section == "rotator") {
        if (key == "omega") c.rotator.omega = num();
        else if (key == "eta") c.rotator.eta = num();
        else if (key == "alpha") c.rotator.alpha = num();
        else if (key == "eps") c.rotator.eps = num();
        else bad();
    } else if (section == "network") {
        if (key == "omegas") c.network.omegas = detail::parse_double_list(value);
        else if (key == "kappa") c.network.kappa = num();
        else if (key == "eta") c.network.eta = num();
        else if (key == "alpha") c.network.alpha = num();
        else if (key == "eps") c.network.eps = num();
        else bad();
    } else if (section == "run") {
        if (key == "model") c.model = value;
        else if (key == "M") c.trials = static_cast<long long>(num());
        else if (key == "seed") c.seed = static_cast<std::uint64_t>(num());
        else if (key == "resolution") c.resolution = static_cast<int>(num());
        else if (key == "threads") c.threads = static_cast<int>(num());
        else if (key == "mu_lo") c.mu_lo = num();
        else if (key == "mu_hi") c.mu_hi = num();
        else if (key == "fast_lo") c.fast_lo = num();
        else if (key == "fast_hi") c.fast_hi = num();
        else if (key == "mu_threshold") c.mu_threshold = num();
        else if (key == "horizon") c.horizon = num();
        else if (key == "rel_tol") c.rel_tol = num();
        else if (key == "abs_tol") c.abs_tol = num();
        else if (key == "eps_list") c.eps_list = detail::parse_double_list(value);
        else if (key == "format") c.format = value;
        else if (key == "out_dir") c.out_dir = value;
        else bad();
    } else {
        throw UsageError("unknown section: [" + section + "]");
    }
}

inline Config parse_config_text(const std::string& text, Config base = {}) {
    std::stringstream ss(text);
    std::string line, section = "run";
    while (std::getline(ss, line)) {
        line = detail::trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line without '=': " + line);
        apply_config_entry(base, section, detail::trim(line.substr(0, eq)),
                           detail::trim(line.substr(eq + 1)));
    }
    return base;
}

inline Config parse_config_file(const std::filesystem::path& path,
                                Config base = {}) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str(), base);
}

inline std::string emit_config(const Config& c) {
    std::ostringstream os;
    os << "[run]\n";
    os << "model = " << c.model << "\n";
    os << "M = " << c.trials << "\n";
    os << "seed = " << c.seed << "\n";
    os << "resolution = " << c.resolution << "\n";
    os << "threads = " << c.threads << "\n";
    os << "mu_lo = " << fmt_double(c.mu_lo) << "\n";
    os << "mu_hi = " << fmt_double(c.mu_hi) << "\n";
    os << "fast_lo = " << fmt_double(c.fast_lo) << "\n";
    os << "fast_hi = " << fmt_double(c.fast_hi) << "\n";
    os << "mu_threshold = " << fmt_double(c.mu_threshold) << "\n";
    os << "horizon = " << fmt_double(c.horizon) << "\n";
    os << "rel_tol = " << fmt_double(c.rel_tol) << "\n";
    os << "abs_tol = " << fmt_double(c.abs_tol) << "\n";
    os << "eps_list = " << detail::join_doubles(c.eps_list) << "\n";
    os << "format = " << c.format << "\n";
    os << "out_dir = " << c.out_dir << "\n";
    os << "[pitchfork]\n";
    os << "a = " << fmt_double(c.pitchfork.a) << "\n";
    os << "b = " << fmt_double(c.pitchfork.b) << "\n";
    os << "eps = " << fmt_double(c.pitchfork.eps) << "\n";
    os << "[tanh]\n";
    os << "a = " << fmt_double(c.tanh_model.a) << "\n";
    os << "b = " << fmt_double(c.tanh_model.b) << "\n";
    os << "eps = " << fmt_double(c.tanh_model.eps) << "\n";
    os << "[rotator]\n";
    os << "omega = " << fmt_double(c.rotator.omega) << "\n";
    os << "eta = " << fmt_double(c.rotator.eta) << "\n";
    os << "alpha = " << fmt_double(c.rotator.alpha) << "\n";
    os << "eps = " << fmt_double(c.rotator.eps) << "\n";
    os << "[network]\n";
    os << "omegas = " << detail::join_doubles(c.network.omegas) << "\n";
    os << "kappa = " << fmt_double(c.network.kappa) << "\n";
    os << "eta = " << fmt_double(c.network.eta) << "\n";
    os << "alpha = " << fmt_double(c.network.alpha) << "\n";
    os << "eps = " << fmt_double(c.network.eps) << "\n";
    return os.str();
}

// FNV-1a over the raw bytes of a file; used for run records.
inline std::uint64_t file_content_hash(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::uint64_t h = 1469598103934665603ull;
    char buf[4096];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        for (std::streamsize i = 0; i < is.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (is.eof()) break;
    }
    return h;
}

}  // namespace slowfast
