#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "iscc/experiment.hpp"

namespace iexp = iscc::experiment;

int main(int argc, char** argv) {
    CLI::App app{"isccsim: sensing/computation/communication planning experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    int step_override = 0;
    std::string fit_input, fit_output = "classes.json";
    std::string solve_output = "plans.json";
    double explain_fs = 0.0;
    bool explain_fs_set = false;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
        cmd->add_option("--seed", seed_override, "override the config seed list with one seed")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--step", step_override, "override the sampling-rate stride");
    };

    auto* validate = app.add_subcommand("validate", "simulated detector vs the analytic model");
    add_common(validate);
    auto* sweep = app.add_subcommand("sweep", "scheme comparison over a parameter grid, to CSV");
    add_common(sweep);
    auto* fit = app.add_subcommand("fit", "fit per-class statistics from a power-sample CSV");
    add_common(fit);
    fit->add_option("--input", fit_input, "power-sample CSV")->required();
    fit->add_option("--output", fit_output, "class-set JSON to write");
    auto* solve = app.add_subcommand("solve", "solve one scenario with every configured scheme");
    add_common(solve);
    solve->add_option("--output", solve_output, "plan JSON to write");
    auto* explain = app.add_subcommand("explain", "gate-benefit condition and saving breakdown");
    add_common(explain);
    explain->add_option("--fs", explain_fs, "sampling rate to analyze")
        ->each([&](const std::string&) { explain_fs_set = true; });

    CLI11_PARSE(app, argc, argv);

    try {
        iexp::ExperimentConfig cfg = iexp::load_config(config_path);
        if (seed_set) cfg.seeds = {seed_override};
        if (step_override > 0) cfg.fs_step = step_override;
        if (explain_fs_set) cfg.explain_f_s = explain_fs;

        if (app.got_subcommand(validate)) return iexp::cmd_validate(cfg, std::cout);
        if (app.got_subcommand(sweep)) return iexp::cmd_sweep(cfg, std::cout);
        if (app.got_subcommand(fit)) return iexp::cmd_fit(cfg, fit_input, fit_output, std::cout);
        if (app.got_subcommand(solve)) return iexp::cmd_solve(cfg, solve_output, std::cout);
        if (app.got_subcommand(explain)) return iexp::cmd_explain(cfg, std::cout);
    } catch (const iexp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return iexp::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return iexp::kExitError;
    }
    return iexp::kExitError;
}
