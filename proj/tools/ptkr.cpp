// ptkr command line: one subcommand per experiment kind.
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ptkr/experiment.hpp"

namespace {

struct Options {
    std::string config_file;
    std::vector<std::string> sets;
    std::string out;
    std::string jobs;
    std::string seed;
    std::string format;
};

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config_file, "key = value config file");
    sub->add_option("--set", o.sets, "override, key=value (repeatable)");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--jobs", o.jobs, "parallel sweep points");
    sub->add_option("--seed", o.seed, "ensemble seed");
    sub->add_option("--format", o.format, "csv or json");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PT-symmetric kicked rotor experiments"};
    app.set_version_flag("--version", std::string(PTKR_VERSION));
    app.require_subcommand(1);
    Options opt;
    for (const char* name : {"classical", "quantum", "otoc", "spectrum", "sweep"})
        add_common(app.add_subcommand(name, std::string("run a ") + name + " experiment"), opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ptkr::kExitConfig;
    }

    try {
        ptkr::ConfigMap file;
        if (!opt.config_file.empty()) file = ptkr::load_config_file(opt.config_file);
        ptkr::ConfigMap cli;
        for (const auto& s : opt.sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos || eq == 0) throw ptkr::ConfigError("--set expects key=value, got '" + s + "'");
            cli[s.substr(0, eq)] = s.substr(eq + 1);
        }
        if (!opt.out.empty()) cli["out"] = opt.out;
        if (!opt.jobs.empty()) cli["jobs"] = opt.jobs;
        if (!opt.seed.empty()) cli["seed"] = opt.seed;
        if (!opt.format.empty()) cli["format"] = opt.format;
        cli["kind"] = app.get_subcommands().front()->get_name();

        const auto cfg = ptkr::make_experiment_config(ptkr::merge_config(file, cli));
        const auto manifest = ptkr::run(cfg);
        for (const auto& e : manifest.errors) std::cerr << "error: " << e << '\n';
        for (const auto& n : manifest.notes) std::cerr << "note: " << n << '\n';
        std::cout << cfg.out_dir << ": " << manifest.files.size() << " files, " << manifest.wall_seconds << " s\n";
        return manifest.exit_code;
    } catch (const ptkr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ptkr::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
