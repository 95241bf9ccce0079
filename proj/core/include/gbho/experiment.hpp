#pragma once

#include <string>
#include <vector>

#include "gbho/baselines.hpp"
#include "gbho/driver.hpp"

// Experiment runner: a config file describes one problem, a list of methods
// and a list of seeds; every (method, seed) cell is executed, persisted as a
// JSON report, and aggregated into a comparison table.
namespace gbho {

struct MethodConfig {
    std::string name; // gbho | grid | random | bayes | hyperband
    GbhoConfig gbho;
    int grid_points_per_dim = 10;
    std::uint64_t max_llo = 100;
    int n_warmup = 10;
    baselines::HyperbandSpec hyperband;
};

struct ProblemConfig {
    std::string type = "analytic"; // analytic | mnist_subset
    Eigen::Index n = 1000;         // subsample size for mnist_subset
    int hp_count = 1;
    double lambda_low = -10.0;
    double lambda_high = 0.0;
};

struct ExperimentConfig {
    ProblemConfig problem;
    std::vector<MethodConfig> methods;
    std::vector<std::uint64_t> seeds;
    std::string output_dir = "out";
    std::string data_dir; // empty: use the GBHO_DATA_DIR environment variable
    TrainBudget budget;   // per-training budget shared by all methods
    int workers = 1;
};

/// Parse and validate a JSON experiment config, filling documented defaults.
/// Throws ParseError (with line diagnostics) or ValidationError (naming the
/// offending field).
ExperimentConfig parse_config(const std::string& path);

struct ComparisonRow {
    std::string method;
    std::string problem;
    std::uint64_t seed = 0;
    double trl = 0.0; // unpenalized training loss at beta*
    double val = 0.0; // validation loss
    double tel = 0.0; // test loss (NaN without a test set)
    Eigen::VectorXd lambda;
    std::uint64_t llo = 0;
};

struct CellFailure {
    std::string method;
    std::uint64_t seed = 0;
    std::string message;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    std::vector<CellFailure> failures;
};

struct RunMatrixOptions {
    bool force = false;            // recompute cells with existing reports
    int workers = 0;               // 0: take the config value
    std::uint64_t seed_offset = 0; // added to every seed
};

/// Instantiate the problem for one seed. Seed derivation: data split uses
/// seed, weight initialization seed+1, search randomness seed+2.
Problem build_problem(const ExperimentConfig& config, std::uint64_t seed);

/// Execute one method on one problem instance.
RunReport run_method(const MethodConfig& method, const Problem& problem, std::uint64_t seed);

/// Execute every (method, seed) cell, skipping cells whose report file
/// already exists unless forced. Cell errors are recorded, not fatal.
ComparisonTable run_matrix(const ExperimentConfig& config, const RunMatrixOptions& options = {});

/// Per-cell report persistence (atomic write-temp-then-rename).
void write_report_file(const RunReport& report, const std::string& problem, std::uint64_t seed,
                       const std::string& path);
RunReport read_report_file(const std::string& path, std::string* problem = nullptr,
                           std::uint64_t* seed = nullptr);

/// Rebuild the aggregate table from the per-cell reports in a directory.
ComparisonTable collect_table(const std::string& dir);

std::string format_table(const ComparisonTable& table);

/// Write plot-ready CSV data: per-method mean test loss (bar_test_loss.csv)
/// and per-cell LLO vs test loss (llo_vs_test_loss.csv). An empty selection
/// after filtering is an error.
void emit_plots(const ComparisonTable& table, const std::string& out_dir,
                const std::vector<std::string>& method_filter = {});

} // namespace gbho
