#include <CLI11.hpp>

#include <iostream>

#include "coupdate/commands.hpp"
#include "coupdate/types.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Multi-channel template co-updating for activity recognition"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    int jobs = 0;
    std::uint64_t seed = 0;

    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic multi-channel dataset");
    gen->add_option("--config", config, "Configuration file")->required();
    gen->add_option("--out", out, "Dataset file to write");
    gen->add_option("--seed-override", seed, "Replace generator.seed");

    auto* run = app.add_subcommand("run", "Run the configured experiments and write CSV reports");
    run->add_option("--config", config, "Configuration file")->required();
    run->add_option("--out", out, "Output directory");
    run->add_option("--jobs", jobs, "Parallel repetitions")->check(CLI::PositiveNumber);
    run->add_option("--seed-override", seed, "Replace experiment.seed");

    std::string run_dir;
    auto* report = app.add_subcommand("report", "Print the summary table of a finished run");
    report->add_option("run_dir", run_dir, "Directory written by 'run'")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    coupdate::RunOverrides overrides;
    if (!out.empty()) overrides.out = out;
    if (jobs > 0) overrides.jobs = jobs;
    if (app.got_subcommand(gen) ? gen->count("--seed-override") : run->count("--seed-override")) {
        overrides.seed = seed;
    }

    try {
        if (app.got_subcommand(gen)) {
            coupdate::cmd_gen_data(config, overrides, std::cerr);
        } else if (app.got_subcommand(run)) {
            coupdate::cmd_run(config, overrides, std::cerr);
        } else {
            coupdate::cmd_report(run_dir, std::cout);
        }
    } catch (const coupdate::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
