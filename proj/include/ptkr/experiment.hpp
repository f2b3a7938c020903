#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ptkr/config.hpp"

namespace ptkr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitPartial = 4;

using Cell = std::variant<double, std::int64_t, std::string>;

/// One output table; `name` is the file stem (classical, quantum, ...).
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

/// In-memory outcome of one experiment: series tables plus the derived scalars
/// that go into summary rows. Missing derived values are NaN.
struct ExperimentResult {
    std::vector<Table> tables;
    std::vector<std::pair<std::string, double>> derived;
    std::vector<std::string> notes;
};

struct RunManifest {
    ConfigMap config;
    std::string config_hash;
    std::string version;
    std::vector<std::string> files;  ///< relative to the output directory
    double wall_seconds = 0.0;
    int exit_code = kExitOk;
    std::vector<std::string> errors;
    std::vector<std::string> notes;
};

/// Runs the module pipeline for `kind` without touching the filesystem.
/// Module errors propagate.
ExperimentResult compute_experiment(const ExperimentConfig& cfg, ExperimentKind kind);

/// Single experiment: writes <kind>.csv (or .json), summary, and manifest.json
/// into cfg.out_dir. Numerical failures are caught, recorded in the manifest and
/// reported with kExitNumerical.
RunManifest run_experiment(const ExperimentConfig& cfg);

/// Cartesian product of the sweep axes, each point run as cfg.sweep_kind, up to
/// cfg.jobs points at a time. Failed points are left out of summary and listed
/// in the manifest; any failure gives kExitPartial. Invalid points raise
/// ConfigError before anything runs.
RunManifest run_sweep(const ExperimentConfig& cfg);

/// Dispatches on cfg.kind.
RunManifest run(const ExperimentConfig& cfg);

/// Shortest text that parses back to the same double, or inf / -inf / nan.
std::string format_number(double v);
std::string format_cell(const Cell& c);

/// CSV text with a header row.
std::string table_to_csv(const Table& t);
/// {"columns": [...], "rows": [[...]]}, non-finite numbers as strings.
std::string table_to_json(const Table& t);

/// Writes via a temporary file in the same directory and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace ptkr
