#pragma once

#include <map>
#include <string>

#include "cvsim/dual.hpp"
#include "cvsim/gaussian.hpp"

namespace cvsim {

/// Covariance-matrix text format. First line `modes=N convention=<one|half>`,
/// then 2N rows of 2N decimals, then an optional `d= ...` line. Values are
/// written with 17 significant digits so a write/read round trip is exact.
std::string write_cm(const GaussianState& s);
GaussianState read_cm(const std::string& text);
GaussianState read_cm_file(const std::string& path);
void write_cm_file(const GaussianState& s, const std::string& path);

/// Flat key-value configuration (one `key = value` per line, '#' comments).
using ConfigMap = std::map<std::string, std::string>;
ConfigMap parse_config(const std::string& text);
ConfigMap parse_config_file(const std::string& path);

/// FNV-1a hash of the canonicalized (sorted, trimmed) configuration.
std::string config_hash(const ConfigMap& cfg);

double get_double(const ConfigMap& cfg, const std::string& key);
double get_double_or(const ConfigMap& cfg, const std::string& key, double fallback);
std::string get_string_or(const ConfigMap& cfg, const std::string& key, const std::string& fallback);

/// Frequencies are given in Hz in the config and converted to rad/s;
/// detunings are multiples of omega_m.
OptomechConfig optomech_from_config(const ConfigMap& cfg);
DualConfig dual_from_config(const ConfigMap& cfg);

} // namespace cvsim
