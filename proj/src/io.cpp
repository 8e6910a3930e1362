#include "cvsim/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cvsim {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

std::string write_cm(const GaussianState& s) {
    std::ostringstream out;
    out << "modes=" << s.modes << " convention=" << (s.conv == Convention::VacuumOne ? "one" : "half")
        << "\n";
    const int n2 = 2 * s.modes;
    for (int i = 0; i < n2; ++i) {
        for (int j = 0; j < n2; ++j) {
            if (j) out << ' ';
            out << fmt17(s.v(i, j));
        }
        out << '\n';
    }
    bool displaced = false;
    for (double x : s.d)
        if (x != 0.0) displaced = true;
    if (displaced) {
        out << "d=";
        for (int i = 0; i < n2; ++i) out << ' ' << fmt17(s.d[static_cast<size_t>(i)]);
        out << '\n';
    }
    return out.str();
}

GaussianState read_cm(const std::string& text) {
    std::istringstream in(text);
    std::string header;
    if (!std::getline(in, header)) throw IoError("read_cm: empty input");
    GaussianState s;
    {
        std::istringstream h(header);
        std::string tok;
        bool got_modes = false, got_conv = false;
        while (h >> tok) {
            if (tok.rfind("modes=", 0) == 0) {
                s.modes = std::stoi(tok.substr(6));
                got_modes = true;
            } else if (tok.rfind("convention=", 0) == 0) {
                const std::string c = tok.substr(11);
                if (c == "one") s.conv = Convention::VacuumOne;
                else if (c == "half") s.conv = Convention::VacuumHalf;
                else throw IoError("read_cm: unknown convention '" + c + "'");
                got_conv = true;
            }
        }
        if (!got_modes || !got_conv) throw IoError("read_cm: header must carry modes= and convention=");
    }
    if (s.modes <= 0 || s.modes > 8) throw IoError("read_cm: unsupported mode count");
    const int n2 = 2 * s.modes;
    s.v = RMat(n2, n2);
    for (int i = 0; i < n2; ++i) {
        std::string line;
        if (!std::getline(in, line)) throw IoError("read_cm: truncated matrix");
        std::istringstream row(line);
        for (int j = 0; j < n2; ++j) {
            if (!(row >> s.v(i, j))) throw IoError("read_cm: bad matrix entry");
        }
    }
    s.d.assign(static_cast<size_t>(n2), 0.0);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line.rfind("d=", 0) == 0) {
            std::istringstream row(line.substr(2));
            for (int i = 0; i < n2; ++i)
                if (!(row >> s.d[static_cast<size_t>(i)])) throw IoError("read_cm: bad displacement entry");
        }
    }
    return s;
}

GaussianState read_cm_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_cm_file: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_cm(buf.str());
}

void write_cm_file(const GaussianState& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_cm_file: cannot open " + path);
    out << write_cm(s);
}

ConfigMap parse_config(const std::string& text) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigParse("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigParse("config line " + std::to_string(lineno) + ": empty key or value");
        cfg[key] = val;
    }
    return cfg;
}

ConfigMap parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigParse("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_hash(const ConfigMap& cfg) {
    unsigned long long h = 1469598103934665603ull;
    auto mix = [&](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    for (const auto& [k, v] : cfg) {
        mix(k);
        mix("=");
        mix(v);
        mix("\n");
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", h);
    return buf;
}

double get_double(const ConfigMap& cfg, const std::string& key) {
    auto it = cfg.find(key);
    if (it == cfg.end()) throw ConfigParse("missing config key '" + key + "'");
    try {
        size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigParse("config key '" + key + "': not a number: " + it->second);
    }
}

double get_double_or(const ConfigMap& cfg, const std::string& key, double fallback) {
    return cfg.count(key) ? get_double(cfg, key) : fallback;
}

std::string get_string_or(const ConfigMap& cfg, const std::string& key, const std::string& fallback) {
    auto it = cfg.find(key);
    return it == cfg.end() ? fallback : it->second;
}

OptomechConfig optomech_from_config(const ConfigMap& cfg) {
    OptomechConfig oc;
    oc.omega_m = kTwoPi * get_double(cfg, "omega_m_hz");
    oc.quality = get_double(cfg, "Q");
    oc.mass = get_double(cfg, "mass_kg");
    oc.length = get_double(cfg, "length_m");
    oc.finesse = get_double(cfg, "finesse");
    oc.wavelength = get_double(cfg, "wavelength_m");
    oc.power = get_double(cfg, "power_w");
    const std::string mode = get_string_or(cfg, "detuning_mode", "effective");
    if (mode == "effective") oc.detuning_mode = DetuningMode::effective;
    else if (mode == "bare") oc.detuning_mode = DetuningMode::bare;
    else throw ConfigParse("detuning_mode must be 'effective' or 'bare'");
    oc.detuning = get_double(cfg, "detuning_over_omega_m") * oc.omega_m;
    oc.temperature = get_double(cfg, "temperature_k");
    return oc;
}

DualConfig dual_from_config(const ConfigMap& cfg) {
    DualConfig dc;
    dc.omega_m = kTwoPi * get_double(cfg, "omega_m_hz");
    dc.quality = get_double(cfg, "Q");
    dc.mass = get_double(cfg, "mass_kg");
    dc.length = get_double(cfg, "length_m");
    dc.finesse = get_double(cfg, "finesse");
    dc.temperature = get_double(cfg, "temperature_k");
    dc.power_a = get_double(cfg, "laser_a_power_w");
    dc.power_b = get_double(cfg, "laser_b_power_w");
    dc.wavelength_a = get_double(cfg, "laser_a_wavelength_m");
    dc.wavelength_b = get_double_or(cfg, "laser_b_wavelength_m", dc.wavelength_a);
    const std::string mode = get_string_or(cfg, "detuning_mode", "effective");
    if (mode == "effective") dc.detuning_mode = DetuningMode::effective;
    else if (mode == "bare") dc.detuning_mode = DetuningMode::bare;
    else throw ConfigParse("detuning_mode must be 'effective' or 'bare'");
    dc.detuning_a = get_double(cfg, "laser_a_detuning_over_omega_m") * dc.omega_m;
    dc.detuning_b = get_double(cfg, "laser_b_detuning_over_omega_m") * dc.omega_m;
    return dc;
}

} // namespace cvsim
