#include <cstdio>
#include <functional>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"
#include "output.hpp"

using namespace nfqed_cli;

namespace {

enum Exit { ok = 0, internal = 1, config = 2, physics = 3, cache = 4 };

int exit_for(nfqed_status s) {
    switch (s) {
        case NFQED_OK: return ok;
        case NFQED_ERR_CONFIG:
        case NFQED_ERR_INVALID_ARGUMENT: return config;
        case NFQED_ERR_CACHE: return cache;
        case NFQED_ERR_INTERNAL: return internal;
        default: return physics;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dipole-dipole couplings and transmission spectra of emitters near an optical nanofiber"};
    app.require_subcommand(1);

    std::string config_path, output, cache_dir, strategy, mode;
    int threads = -1;
    app.add_option("--config", config_path, "YAML run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--output", output, "output directory (overrides output_dir)");
    app.add_option("--cache", cache_dir, "spectral table cache directory (overrides cache_dir)");
    app.add_option("--threads", threads, "worker thread cap, 0 = hardware concurrency")->check(CLI::NonNegativeNumber);
    app.add_option("--strategy", strategy, "principal-value strategy")->check(CLI::IsMember({"direct", "averaged"}));
    app.add_option("--mode", mode, "spectrum provenance")->check(CLI::IsMember({"exact", "vacuum-approx", "both"}));
    app.fallthrough();

    const std::map<std::string, std::pair<std::string, std::function<void(const RunConfig&)>>> commands = {
        {"dispersion", {"HE11 dispersion table over a wavelength band", cmd_dispersion}},
        {"green-map", {"Im G diagonal component on a plane around a source point", cmd_green_map}},
        {"pair-interaction", {"radiation-mode and free-space pair couplings against separation", cmd_pair_interaction}},
        {"pv-benchmark", {"principal-value estimators against the closed-form free-space coupling", cmd_pv_benchmark}},
        {"spectrum", {"steady-state transmission of a driven emitter chain", cmd_spectrum}},
        {"check-config", {"print the resolved configuration and exit", cmd_check_config}},
    };
    for (const auto& [name, cmd] : commands) app.add_subcommand(name, cmd.first);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config;
    }

    try {
        RunConfig c = load_config(config_path);
        if (!output.empty()) c.output_dir = output;
        if (!cache_dir.empty()) c.cache_dir = cache_dir;
        if (threads >= 0) c.threads = threads;
        if (!strategy.empty()) c.pv.strategy = strategy;
        if (!mode.empty()) c.mode = mode;
        if (const nfqed_status s = nfqed_set_threads(c.threads); s != NFQED_OK)
            throw ApiError(s, std::string("threads: ") + nfqed_last_error());
        for (const auto& [name, cmd] : commands)
            if (app.got_subcommand(name)) cmd.second(c);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return config;
    } catch (const ApiError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_for(e.status);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return internal;
    }
    return ok;
}
