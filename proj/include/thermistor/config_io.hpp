// JSON configuration parsing with hypothesis validation, and the
// deterministic output writer (field snapshots, estimate series, summary,
// hashed manifest).

#ifndef THERMISTOR_CONFIG_IO_HPP
#define THERMISTOR_CONFIG_IO_HPP

#include <string>
#include <utility>
#include <vector>

#include "thermistor/coupler.hpp"

namespace thermistor {

struct ParsedConfig {
    SolverConfig cfg;
    std::string canonical;  // normalized JSON with defaults materialized
};

// Parses and validates a config document. Collects every violation
// (schema, expression syntax, hypothesis failures such as a negative u0
// sample on the parabolic boundary or an out-of-range level exponent) and
// throws ConfigError carrying the full list. base_dir resolves relative
// paths (tabulated sigma CSV).
ParsedConfig parse_config(const std::string& text, const std::string& base_dir = ".");

// Reads a two-column CSV of (s, sigma) samples; a non-numeric first line
// is treated as a header.
std::pair<std::vector<double>, std::vector<double>> read_sigma_table(const std::string& path);

struct ManifestEntry {
    std::string name;
    std::string hash;  // fnv1a64 of the file bytes
    size_t bytes = 0;
};

struct FileManifest {
    std::vector<ManifestEntry> files;
};

// Writes states_XXXX.csv at the report cadence, estimates.csv,
// report.json, and manifest.json under dir. All formatting is fixed
// (%.17g) so reruns of the same trajectory are byte-identical.
FileManifest write_outputs(const Trajectory& traj, const SolverConfig& cfg,
                           const std::string& canonical_config, const std::string& dir);

// 64-bit FNV-1a, hex encoded; the manifest's content hash.
std::string fnv1a64_hex(const std::string& bytes);

}  // namespace thermistor

#endif
