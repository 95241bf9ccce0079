#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gbho/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Bilevel hyperparameter optimization experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    bool force = false;
    int workers = 0;
    std::uint64_t seed_offset = 0;
    auto* run_cmd = app.add_subcommand("run", "Execute a method x seed matrix from a config file");
    run_cmd->add_option("config", config_path, "JSON experiment config")->required();
    run_cmd->add_flag("--force", force, "Recompute cells even when a report exists");
    run_cmd->add_option("--workers", workers, "Parallel cells (0: config value)");
    run_cmd->add_option("--seed-offset", seed_offset, "Offset added to every seed");

    std::string table_dir;
    auto* table_cmd = app.add_subcommand("table", "Aggregate per-cell reports into a table");
    table_cmd->add_option("dir", table_dir, "Directory with report files")->required();

    std::string plots_dir;
    std::string plots_out;
    std::vector<std::string> plot_methods;
    auto* plots_cmd = app.add_subcommand("plots", "Emit plot-ready CSV data from reports");
    plots_cmd->add_option("dir", plots_dir, "Directory with report files")->required();
    plots_cmd->add_option("--out", plots_out, "Output directory (default: <dir>/plots)");
    plots_cmd->add_option("--method", plot_methods, "Restrict to these methods");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const auto config = gbho::parse_config(config_path);
            gbho::RunMatrixOptions options;
            options.force = force;
            options.workers = workers;
            options.seed_offset = seed_offset;
            const auto table = gbho::run_matrix(config, options);
            std::cout << gbho::format_table(table);
            return table.failures.empty() ? 0 : 2;
        }
        if (table_cmd->parsed()) {
            std::cout << gbho::format_table(gbho::collect_table(table_dir));
            return 0;
        }
        if (plots_cmd->parsed()) {
            const auto table = gbho::collect_table(plots_dir);
            gbho::emit_plots(table, plots_out.empty() ? plots_dir + "/plots" : plots_out,
                             plot_methods);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
