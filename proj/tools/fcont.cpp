// Command-line front end: run, verify, simulate, export.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fcont/config.hpp"
#include "fcont/error.hpp"
#include "fcont/parallel.hpp"
#include "fcont/pipeline.hpp"

namespace {

constexpr int kUsage = 2;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "experiment configuration (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "master RNG seed (overrides the config)");
    cmd->add_option("--out", c.out, "output directory (overrides the config)");
    cmd->add_option("--threads", c.threads, "worker threads (overrides FCONT_THREADS)")->check(CLI::PositiveNumber);
}

// flags > config file > defaults; the thread count also honours FCONT_THREADS
// ahead of the file.
fcont::ExperimentConfig resolve(const Common& c) {
    fcont::ExperimentConfig cfg = c.config.empty() ? fcont::ExperimentConfig{} : fcont::load_config(c.config);
    if (c.seed) cfg.generator.seed = *c.seed;
    if (!c.out.empty()) cfg.output = c.out;
    if (c.threads)
        fcont::set_thread_count(*c.threads);
    else if (!std::getenv("FCONT_THREADS") && cfg.threads)
        fcont::set_thread_count(*cfg.threads);
    return cfg;
}

int report(const fcont::RunReport& rep) {
    for (const auto& a : rep.assertions)
        std::printf("%-7s %s: %s\n", fcont::to_string(a.status), a.name.c_str(), a.reason.c_str());
    std::printf("%s\n", rep.ok() ? "overall: PASS" : "overall: FAIL");
    return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Factorable continuity of random fields: simulation, factorization and bounds"};
    app.require_subcommand(1);

    Common run_opts, verify_opts, sim_opts, export_opts;
    auto* run = app.add_subcommand("run", "run the configured pipelines");
    add_common(run, run_opts);

    auto* verify = app.add_subcommand("verify", "run a named acceptance suite");
    add_common(verify, verify_opts);
    std::string suite;
    bool reduced = false;
    verify->add_option("--suite", suite, "suite name (factorization, wiener-tails, entropy, kr, v-functional, "
                                         "rectangle, heavy-tail, transforms, all)")
        ->required();
    verify->add_flag("--reduced", reduced, "smaller problem sizes for smoke runs");

    auto* simulate = app.add_subcommand("simulate", "write ensemble.bin and ensemble.meta.json");
    add_common(simulate, sim_opts);

    auto* exp = app.add_subcommand("export", "write an ensemble and its space as CSV/JSON");
    add_common(exp, export_opts);
    std::string input;
    exp->add_option("--input", input, "ensemble.bin to convert (default: generate from the config)")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kUsage;
    }

    fcont::ExperimentConfig cfg;
    try {
        if (run->parsed()) cfg = resolve(run_opts);
        if (verify->parsed()) {
            if (suite.empty()) throw fcont::InvalidInput("--suite must name a suite");
            if (!fcont::is_suite(suite)) throw fcont::InvalidInput("unknown suite \"" + suite + "\"");
            cfg = resolve(verify_opts);
        }
        if (simulate->parsed()) cfg = resolve(sim_opts);
        if (exp->parsed()) cfg = resolve(export_opts);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kUsage;
    }

    try {
        if (run->parsed()) return report(fcont::run_experiment(cfg, cfg.output));
        if (verify->parsed()) {
            const auto sizes = reduced ? fcont::SuiteSizes::reduced() : fcont::SuiteSizes{};
            return report(fcont::verify_suite(cfg, suite, cfg.output, sizes));
        }
        if (simulate->parsed()) {
            fcont::simulate_to(cfg, cfg.output);
            std::printf("wrote %s/ensemble.bin\n", cfg.output.c_str());
            return 0;
        }
        fcont::export_to(cfg, input, cfg.output);
        std::printf("wrote %s/ensemble.csv\n", cfg.output.c_str());
        return 0;
    } catch (const fcont::DegenerateField& e) {
        std::fprintf(stderr, "degenerate field: %s\n", e.what());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
    }
    return 1;
}
