#include "ptkr/experiment.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ptkr/classical.hpp"
#include "ptkr/fit.hpp"
#include "ptkr/otoc.hpp"
#include "ptkr/quantum.hpp"
#include "ptkr/spectrum.hpp"

#ifndef PTKR_VERSION
#define PTKR_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace ptkr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double opt_value(const std::optional<int>& v) { return v ? static_cast<double>(*v) : kNaN; }
double opt_value(const std::optional<double>& v) { return v ? *v : kNaN; }

std::vector<std::string> derived_columns(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Classical: return {"tau", "t_c", "D", "alpha", "beta"};
        case ExperimentKind::Quantum:
            return {"mean_p", "mean_p2", "m2", "log_norm", "mean_p_slope", "truncation_kick"};
        case ExperimentKind::Otoc: return {"gamma", "t_star", "t_E"};
        case ExperimentKind::Spectrum: return {"max_eps_imag", "max_modulus_deviation", "pt_broken", "lambda_c"};
        case ExperimentKind::Sweep: break;
    }
    return {};
}

QuantumState initial_state(const ExperimentConfig& cfg) {
    return cfg.initial == InitialState::Gaussian ? init_gaussian_state(cfg.dim, cfg.sigma) : init_uniform_state(cfg.dim);
}

ExperimentResult classical_run(const ExperimentConfig& cfg) {
    ExperimentResult r;
    const auto series = evolve_ensemble(cfg.ensemble, cfg.params);
    Table t{"classical", {"t", "mean_pr", "mean_pi", "m2_r", "m2_i", "n_diverged"}, {}};
    for (const auto& row : series.rows)
        t.rows.push_back({std::int64_t{row.t}, row.moments.mean_pr, row.moments.mean_pi, row.moments.m2_r,
                          row.moments.m2_i, std::int64_t{row.n_diverged}});
    r.tables.push_back(std::move(t));

    const auto tau = detect_threshold_time(series);
    double t_c = kNaN;
    try {
        t_c = threshold_time_tc(cfg.params);
    } catch (const DomainError&) {
    }

    KickWindow wr = cfg.window_r, wi = cfg.window_i;
    if (wr.last < wr.first || wi.last < wi.first) {
        KickWindow w{2, cfg.t_max};
        if (std::isfinite(t_c)) w = default_fit_window(cfg.params);
        if (tau) w.last = std::min(w.last, *tau - 1);
        w.last = std::min(w.last, cfg.t_max);
        if (wr.last < wr.first) wr = w;
        if (wi.last < wi.first) wi = w;
    }
    double D = kNaN, alpha = kNaN, beta = kNaN;
    try {
        const auto fit = fit_diffusion(series, wr, wi);
        D = fit.D;
        alpha = fit.alpha;
        beta = fit.beta;
    } catch (const FitWindowError& e) {
        r.notes.push_back(std::string("diffusion fit skipped: ") + e.what());
    }
    r.derived = {{"tau", opt_value(tau)}, {"t_c", t_c}, {"D", D}, {"alpha", alpha}, {"beta", beta}};
    return r;
}

ExperimentResult quantum_run(const ExperimentConfig& cfg) {
    ExperimentResult r;
    QuantumState state = initial_state(cfg);
    Propagator prop(cfg.params, cfg.dim);
    const auto rec = evolve(state, prop, cfg.t_max, Direction::Forward, cfg.tail_guard);

    Table t{"quantum", {"t", "log_norm", "mean_p", "mean_p2", "m2"}, {}};
    for (std::size_t k = 0; k < rec.rows.size(); ++k) {
        const auto& o = rec.rows[k];
        t.rows.push_back({static_cast<std::int64_t>(k), o.log_norm, o.mean_p, o.mean_p2, o.m2});
    }
    r.tables.push_back(std::move(t));

    Table mom{"quantum_momentum", {"n", "prob"}, {}};
    for (const auto& [n, p] : momentum_distribution(state)) mom.rows.push_back({std::int64_t{n}, p});
    r.tables.push_back(std::move(mom));
    Table ang{"quantum_angle", {"theta", "density"}, {}};
    for (const auto& [th, d] : angular_distribution(state)) ang.rows.push_back({th, d});
    r.tables.push_back(std::move(ang));

    double slope = kNaN;
    const int first = std::max(1, cfg.t_max / 10);
    if (cfg.t_max - first >= 1) {
        std::vector<double> xs, ys;
        for (int k = first; k <= cfg.t_max; ++k) {
            xs.push_back(k);
            ys.push_back(rec.rows[static_cast<std::size_t>(k)].mean_p);
        }
        try {
            slope = fit_line(xs, ys).slope;
        } catch (const FitWindowError&) {
        }
    }
    if (rec.truncation_kick)
        r.notes.push_back("tail mass exceeded the guard at kick " + std::to_string(*rec.truncation_kick) +
                          " (max " + format_number(rec.max_tail_mass) + "); increase dim");
    const auto& last = rec.rows.back();
    r.derived = {{"mean_p", last.mean_p},         {"mean_p2", last.mean_p2},
                 {"m2", last.m2},                 {"log_norm", last.log_norm},
                 {"mean_p_slope", slope},         {"truncation_kick", opt_value(rec.truncation_kick)}};
    return r;
}

ExperimentResult otoc_run(const ExperimentConfig& cfg) {
    ExperimentResult r;
    OtocOptions opt;
    opt.mode = cfg.backward;
    opt.checkpoint = cfg.checkpoint;
    opt.growth_window = cfg.growth_window;
    const auto series = otoc_series(cfg.params, cfg.t_max, initial_state(cfg), opt);
    Table t{"otoc", {"t", "c_value", "finite"}, {}};
    for (std::size_t k = 0; k < series.values.size(); ++k) {
        const auto& v = series.values[k];
        t.rows.push_back({static_cast<std::int64_t>(k), v.value, std::int64_t{v.finite ? 1 : 0}});
    }
    r.tables.push_back(std::move(t));
    if (!series.gamma) r.notes.push_back("growth window not usable; gamma omitted");
    r.derived = {{"gamma", opt_value(series.gamma)},
                 {"t_star", opt_value(series.t_star)},
                 {"t_E", opt_value(series.t_ehrenfest)}};
    return r;
}

ExperimentResult spectrum_run(const ExperimentConfig& cfg) {
    ExperimentResult r;
    const auto qs = quasienergies(build_floquet_matrix(cfg.params, cfg.dim));
    Table t{"spectrum", {"index", "eps_real", "eps_imag", "eigenvalue_modulus"}, {}};
    for (std::size_t k = 0; k < qs.levels.size(); ++k) {
        const auto& q = qs.levels[k];
        t.rows.push_back({static_cast<std::int64_t>(k), q.real, q.imag, q.modulus});
    }
    r.tables.push_back(std::move(t));
    double lambda_c = kNaN;
    if (cfg.lambda_c_hi > 0.0)
        lambda_c = find_lambda_c(cfg.params, cfg.dim, cfg.lambda_c_lo, cfg.lambda_c_hi, cfg.lambda_c_tol, cfg.pt_tol)
                       .lambda_c;
    r.derived = {{"max_eps_imag", qs.max_abs_imag},
                 {"max_modulus_deviation", qs.max_modulus_deviation},
                 {"pt_broken", is_pt_broken(qs, cfg.pt_tol) ? 1.0 : 0.0},
                 {"lambda_c", lambda_c}};
    return r;
}

std::string table_file(const Table& t, OutputFormat fmt) {
    return t.name + (fmt == OutputFormat::Csv ? ".csv" : ".json");
}

void write_table(const Table& t, const fs::path& dir, OutputFormat fmt, RunManifest& m) {
    const std::string name = table_file(t, fmt);
    write_file_atomic((dir / name).string(), fmt == OutputFormat::Csv ? table_to_csv(t) : table_to_json(t));
    m.files.push_back(name);
}

Cell parse_cell(const std::string& s) {
    try {
        std::size_t used = 0;
        const double d = std::stod(s, &used);
        if (used == s.size()) return d;
    } catch (const std::exception&) {
    }
    return s;
}

void write_manifest(const fs::path& dir, RunManifest& m) {
    m.files.push_back("manifest.json");
    nlohmann::ordered_json j;
    j["version"] = m.version;
    j["config_hash"] = m.config_hash;
    j["config"] = m.config;
    j["files"] = m.files;
    j["wall_seconds"] = m.wall_seconds;
    j["exit_code"] = m.exit_code;
    j["errors"] = m.errors;
    j["notes"] = m.notes;
    write_file_atomic((dir / "manifest.json").string(), j.dump(2) + "\n");
}

RunManifest start_manifest(const ExperimentConfig& cfg) {
    RunManifest m;
    m.config = cfg.resolved;
    m.config_hash = config_hash(cfg.resolved);
    m.version = PTKR_VERSION;
    return m;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
    return std::string(buf, res.ptr);
}

std::string format_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

std::string table_to_csv(const Table& t) {
    std::string out;
    for (std::size_t k = 0; k < t.columns.size(); ++k) out += (k ? "," : "") + t.columns[k];
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) out += (k ? "," : "") + format_cell(row[k]);
        out += '\n';
    }
    return out;
}

std::string table_to_json(const Table& t) {
    nlohmann::ordered_json j;
    j["columns"] = t.columns;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        auto r = nlohmann::ordered_json::array();
        for (const auto& c : row) {
            if (const auto* d = std::get_if<double>(&c))
                std::isfinite(*d) ? r.push_back(*d) : r.push_back(format_number(*d));
            else if (const auto* i = std::get_if<std::int64_t>(&c))
                r.push_back(*i);
            else
                r.push_back(std::get<std::string>(c));
        }
        j["rows"].push_back(std::move(r));
    }
    return j.dump() + "\n";
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

ExperimentResult compute_experiment(const ExperimentConfig& cfg, ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Classical: return classical_run(cfg);
        case ExperimentKind::Quantum: return quantum_run(cfg);
        case ExperimentKind::Otoc: return otoc_run(cfg);
        case ExperimentKind::Spectrum: return spectrum_run(cfg);
        case ExperimentKind::Sweep: break;
    }
    throw ConfigError("kind: sweep has no single-run pipeline");
}

RunManifest run_experiment(const ExperimentConfig& cfg) {
    if (cfg.kind == ExperimentKind::Sweep) throw ConfigError("kind: use run_sweep for sweeps");
    const auto t0 = std::chrono::steady_clock::now();
    RunManifest m = start_manifest(cfg);
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    try {
        auto result = compute_experiment(cfg, cfg.kind);
        for (const auto& t : result.tables) write_table(t, dir, cfg.format, m);
        Table summary{"summary", {}, {{}}};
        for (const auto& [k, v] : result.derived) {
            summary.columns.push_back(k);
            summary.rows[0].push_back(v);
        }
        write_table(summary, dir, cfg.format, m);
        m.notes = std::move(result.notes);
    } catch (const ValidationError& e) {
        m.errors.push_back(e.what());
        m.exit_code = kExitConfig;
    } catch (const std::exception& e) {
        m.errors.push_back(e.what());
        m.exit_code = kExitNumerical;
    }
    m.wall_seconds = seconds_since(t0);
    write_manifest(dir, m);
    return m;
}

RunManifest run_sweep(const ExperimentConfig& cfg) {
    if (cfg.sweep.empty()) throw ConfigError("sweep: grid is empty");
    const auto t0 = std::chrono::steady_clock::now();

    // expand the grid, last axis fastest
    std::vector<ConfigMap> overrides(1);
    for (const auto& axis : cfg.sweep) {
        std::vector<ConfigMap> next;
        for (const auto& base : overrides)
            for (const auto& v : axis.values) {
                ConfigMap o = base;
                o[axis.key] = v;
                next.push_back(std::move(o));
            }
        overrides = std::move(next);
    }
    std::vector<ExperimentConfig> points;
    for (const auto& o : overrides) {
        ConfigMap m = cfg.resolved;
        for (auto it = m.begin(); it != m.end();) it = it->first.rfind("sweep.", 0) == 0 ? m.erase(it) : ++it;
        m["kind"] = to_string(cfg.sweep_kind);
        for (const auto& [k, v] : o) m[k] = v;
        try {
            points.push_back(make_experiment_config(m));
        } catch (const ConfigError& e) {
            std::string where;
            for (const auto& [k, v] : o) where += k + "=" + v + " ";
            throw ConfigError("sweep point " + where + ": " + e.what());
        }
    }

    const auto n = static_cast<std::int64_t>(points.size());
    std::vector<std::optional<ExperimentResult>> results(points.size());
    std::vector<std::string> failures(points.size());
#pragma omp parallel for num_threads(cfg.jobs) schedule(dynamic, 1)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            results[static_cast<std::size_t>(i)] = compute_experiment(points[static_cast<std::size_t>(i)], cfg.sweep_kind);
        } catch (const std::exception& e) {
            failures[static_cast<std::size_t>(i)] = e.what();
        }
    }

    RunManifest m = start_manifest(cfg);
    Table summary{"summary", {}, {}};
    for (const auto& axis : cfg.sweep) summary.columns.push_back(axis.key);
    for (const auto& c : derived_columns(cfg.sweep_kind)) summary.columns.push_back(c);
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::string where;
        for (const auto& [k, v] : overrides[i]) where += (where.empty() ? "" : " ") + k + "=" + v;
        if (!results[i]) {
            m.errors.push_back(where + ": " + failures[i]);
            continue;
        }
        std::vector<Cell> row;
        for (const auto& axis : cfg.sweep) row.push_back(parse_cell(overrides[i].at(axis.key)));
        for (const auto& [k, v] : results[i]->derived) row.push_back(v);
        summary.rows.push_back(std::move(row));
        for (const auto& note : results[i]->notes) m.notes.push_back(where + ": " + note);
    }
    const fs::path dir(cfg.out_dir);
    write_table(summary, dir, cfg.format, m);
    m.exit_code = m.errors.empty() ? kExitOk : kExitPartial;
    m.wall_seconds = seconds_since(t0);
    write_manifest(dir, m);
    return m;
}

RunManifest run(const ExperimentConfig& cfg) {
    return cfg.kind == ExperimentKind::Sweep ? run_sweep(cfg) : run_experiment(cfg);
}

}  // namespace ptkr
