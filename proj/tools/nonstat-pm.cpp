#include <CLI11.hpp>
#include <iostream>

#include "nonstat_pm/config.hpp"
#include "nonstat_pm/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"nonstat-pm: time-dependent Pomeau-Manneville CLT laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    std::size_t threads_override = 0;
    std::string out_dir_override;

    auto* run = app.add_subcommand("run", "run an experiment from a config file");
    run->add_option("config", config_path, "config file (key = value with sections)")
        ->required();
    run->add_option("--seed", seed_override, "override experiment.seed")
        ->each([&](const std::string&) { seed_set = true; });
    run->add_option("--threads", threads_override,
                    "override worker count (default: NONSTAT_PM_THREADS or hardware)");
    run->add_option("--out-dir", out_dir_override, "override output.dir");

    auto* validate = app.add_subcommand("validate", "validate a config without running");
    validate->add_option("config", config_path, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    std::vector<nspm::Diagnostic> diags;
    nspm::ExperimentConfig config = nspm::load_config_file(config_path, diags);
    if (!diags.empty()) {
        std::cerr << nspm::format_diagnostics(diags);
        return 2;
    }

    if (validate->parsed()) {
        auto issues = nspm::validate_config(config);
        if (issues.empty()) {
            std::cout << "ok: " << config_path << " (config " << config.config_hash << ")\n";
            return 0;
        }
        std::cerr << nspm::format_diagnostics(issues);
        return 2;
    }

    if (seed_set) config.seed = seed_override;
    if (threads_override != 0) config.threads = threads_override;
    if (!out_dir_override.empty()) config.out_dir = out_dir_override;
    config.finalize_hash();

    try {
        return nspm::run_experiment(config, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
