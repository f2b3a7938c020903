#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ptkr/core.hpp"
#include "ptkr/otoc.hpp"

namespace ptkr {

enum class ExperimentKind { Classical, Quantum, Otoc, Spectrum, Sweep };
enum class OutputFormat { Csv, Json };
enum class InitialState { Uniform, Gaussian };

/// Raised for malformed or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Resolved key → value text, ordered by key. This is what gets hashed and
/// written to the manifest.
using ConfigMap = std::map<std::string, std::string>;

struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Classical;
    ExperimentKind sweep_kind = ExperimentKind::Classical;
    SystemParams params;
    EnsembleConfig ensemble;
    int t_max = 30;
    std::size_t dim = 4096;
    double sigma = 10.0;
    InitialState initial = InitialState::Uniform;
    BackwardMode backward = BackwardMode::Adjoint;
    bool checkpoint = false;
    double tail_guard = 1e-10;
    KickWindow window_r{0, -1};  ///< empty: default_fit_window
    KickWindow window_i{0, -1};
    KickWindow growth_window{1, 4};
    double pt_tol = 1e-6;
    double lambda_c_lo = 0.0;
    double lambda_c_hi = 0.0;  ///< 0: no λ_c search
    double lambda_c_tol = 1e-4;
    std::vector<SweepAxis> sweep;
    std::string out_dir = "out";
    OutputFormat format = OutputFormat::Csv;
    int jobs = 1;

    ConfigMap resolved;  ///< the key/value view this config was built from
};

/// Every recognised key with its default value.
const ConfigMap& default_config();

/// Parses `key = value` lines; '#' starts a comment. Throws ConfigError.
ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::string& path);

/// Applies `overrides` on top of `base`; both must only use known keys
/// (sweep.<key> entries are allowed for any known scalar key).
ConfigMap merge_config(ConfigMap base, const ConfigMap& overrides);

/// Typed view with validation for the chosen kind. Throws ConfigError.
ExperimentConfig make_experiment_config(const ConfigMap& resolved);

/// FNV-1a over the canonical `key=value\n` listing, excluding keys that cannot
/// change output bytes (out, jobs). 16 hex digits.
std::string config_hash(const ConfigMap& resolved);

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& text);

}  // namespace ptkr
