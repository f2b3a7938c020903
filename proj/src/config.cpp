#include "ptkr/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ptkr {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool is_known(const std::string& key) {
    const auto& d = default_config();
    if (d.count(key)) return true;
    if (key.rfind("sweep.", 0) == 0) {
        const std::string inner = key.substr(6);
        return d.count(inner) && inner != "kind" && inner != "sweep_kind" && inner != "out" && inner != "jobs" &&
               inner != "format";
    }
    return false;
}

double to_double(const ConfigMap& m, const std::string& key) {
    const std::string& v = m.at(key);
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

long long to_int(const ConfigMap& m, const std::string& key) {
    const std::string& v = m.at(key);
    try {
        std::size_t used = 0;
        const long long i = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return i;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
}

bool to_bool(const ConfigMap& m, const std::string& key) {
    const std::string& v = m.at(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

// "a:b" or "auto"
KickWindow to_window(const ConfigMap& m, const std::string& key) {
    const std::string& v = m.at(key);
    if (v == "auto") return {0, -1};
    const auto colon = v.find(':');
    if (colon == std::string::npos) throw ConfigError(key + ": expected 'first:last' or 'auto'");
    try {
        return {std::stoi(v.substr(0, colon)), std::stoi(v.substr(colon + 1))};
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected 'first:last', got '" + v + "'");
    }
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

const ConfigMap& default_config() {
    static const ConfigMap defaults = {
        {"kind", "classical"},
        {"sweep_kind", "classical"},
        {"K", "5"},
        {"lambda", "1e-10"},
        {"hbar", "1"},
        {"p_clamp", "1e152"},
        {"theta_i_guard", "700"},
        {"n_traj", "10000"},
        {"seed", "0"},
        {"t_max", "30"},
        {"dim", "4096"},
        {"sigma", "10"},
        {"initial", "auto"},
        {"backward", "adjoint"},
        {"checkpoint", "false"},
        {"tail_guard", "1e-10"},
        {"window_r", "auto"},
        {"window_i", "auto"},
        {"growth_window", "1:4"},
        {"pt_tol", "1e-6"},
        {"lambda_c_bracket", "none"},
        {"lambda_c_tol", "1e-4"},
        {"out", "out"},
        {"format", "csv"},
        {"jobs", "1"},
    };
    return defaults;
}

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap out;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!is_known(key)) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        out[key] = value;
    }
    return out;
}

ConfigMap load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

ConfigMap merge_config(ConfigMap base, const ConfigMap& overrides) {
    for (const auto& [k, v] : overrides) {
        if (!is_known(k)) throw ConfigError("unknown key '" + k + "'");
        base[k] = v;
    }
    return base;
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Classical: return "classical";
        case ExperimentKind::Quantum: return "quantum";
        case ExperimentKind::Otoc: return "otoc";
        case ExperimentKind::Spectrum: return "spectrum";
        case ExperimentKind::Sweep: return "sweep";
    }
    return "?";
}

ExperimentKind parse_kind(const std::string& text) {
    for (auto k : {ExperimentKind::Classical, ExperimentKind::Quantum, ExperimentKind::Otoc, ExperimentKind::Spectrum,
                   ExperimentKind::Sweep})
        if (to_string(k) == text) return k;
    throw ConfigError("kind: unknown experiment kind '" + text + "'");
}

ExperimentConfig make_experiment_config(const ConfigMap& given) {
    const ConfigMap m = merge_config(default_config(), given);
    ExperimentConfig c;
    c.resolved = m;
    c.kind = parse_kind(m.at("kind"));
    c.sweep_kind = parse_kind(m.at("sweep_kind"));
    if (c.sweep_kind == ExperimentKind::Sweep) throw ConfigError("sweep_kind: cannot be 'sweep'");

    c.params.K = to_double(m, "K");
    c.params.lambda = to_double(m, "lambda");
    c.params.hbar = to_double(m, "hbar");
    c.params.p_clamp = to_double(m, "p_clamp");
    c.params.theta_i_guard = to_double(m, "theta_i_guard");
    try {
        validate(c.params);
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }

    const long long n_traj = to_int(m, "n_traj");
    const long long t_max = to_int(m, "t_max");
    const long long seed = to_int(m, "seed");
    if (n_traj < 1) throw ConfigError("n_traj: must be >= 1");
    if (t_max < 1 || t_max > 1000000) throw ConfigError("t_max: must be in [1, 1e6]");
    if (seed < 0) throw ConfigError("seed: must be >= 0");
    c.t_max = static_cast<int>(t_max);
    c.ensemble = {n_traj, static_cast<std::uint64_t>(seed), c.t_max};

    const long long dim = to_int(m, "dim");
    if (dim < 2 || (dim & (dim - 1)) != 0) throw ConfigError("dim: must be a power of two >= 2");
    c.dim = static_cast<std::size_t>(dim);
    c.sigma = to_double(m, "sigma");
    if (!(c.sigma > 0.0)) throw ConfigError("sigma: must be > 0");

    const std::string& initial = m.at("initial");
    if (initial == "auto")
        c.initial = (c.kind == ExperimentKind::Otoc || c.sweep_kind == ExperimentKind::Otoc) &&
                            c.kind != ExperimentKind::Quantum
                        ? InitialState::Gaussian
                        : InitialState::Uniform;
    else if (initial == "uniform")
        c.initial = InitialState::Uniform;
    else if (initial == "gaussian")
        c.initial = InitialState::Gaussian;
    else
        throw ConfigError("initial: expected auto, uniform or gaussian");

    const std::string& backward = m.at("backward");
    if (backward == "adjoint")
        c.backward = BackwardMode::Adjoint;
    else if (backward == "inverse")
        c.backward = BackwardMode::Inverse;
    else
        throw ConfigError("backward: expected adjoint or inverse");

    c.checkpoint = to_bool(m, "checkpoint");
    c.tail_guard = to_double(m, "tail_guard");
    c.window_r = to_window(m, "window_r");
    c.window_i = to_window(m, "window_i");
    c.growth_window = to_window(m, "growth_window");
    c.pt_tol = to_double(m, "pt_tol");
    c.lambda_c_tol = to_double(m, "lambda_c_tol");
    if (const std::string& br = m.at("lambda_c_bracket"); br != "none") {
        const auto parts = split_list(br);
        if (parts.size() != 2) throw ConfigError("lambda_c_bracket: expected 'lo,hi' or 'none'");
        ConfigMap tmp{{"lo", parts[0]}, {"hi", parts[1]}};
        c.lambda_c_lo = to_double(tmp, "lo");
        c.lambda_c_hi = to_double(tmp, "hi");
        if (!(c.lambda_c_lo >= 0.0 && c.lambda_c_hi > c.lambda_c_lo))
            throw ConfigError("lambda_c_bracket: needs 0 <= lo < hi");
    }

    c.out_dir = m.at("out");
    const std::string& fmt = m.at("format");
    if (fmt == "csv")
        c.format = OutputFormat::Csv;
    else if (fmt == "json")
        c.format = OutputFormat::Json;
    else
        throw ConfigError("format: expected csv or json");
    const long long jobs = to_int(m, "jobs");
    if (jobs < 1) throw ConfigError("jobs: must be >= 1");
    c.jobs = static_cast<int>(jobs);

    for (const auto& [k, v] : m) {
        if (k.rfind("sweep.", 0) != 0) continue;
        SweepAxis axis{k.substr(6), split_list(v)};
        if (axis.values.empty()) throw ConfigError(k + ": sweep axis has no values");
        c.sweep.push_back(std::move(axis));
    }
    if (c.kind == ExperimentKind::Sweep && c.sweep.empty())
        throw ConfigError("sweep: at least one 'sweep.<key> = v1,v2,...' axis is required");
    if (c.kind == ExperimentKind::Spectrum || (c.kind == ExperimentKind::Sweep && c.sweep_kind == ExperimentKind::Spectrum)) {
        if (c.dim < 8 || c.dim > 512) throw ConfigError("dim: spectrum runs need dim in [8, 512]");
    }
    return c;
}

std::string config_hash(const ConfigMap& resolved) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [k, v] : resolved) {
        if (k == "out" || k == "jobs") continue;
        for (char ch : k + "=" + v + "\n") {
            h ^= static_cast<unsigned char>(ch);
            h *= 0x100000001b3ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace ptkr
