#pragma once

#include "gbho/problem.hpp"
#include "gbho/report.hpp"

// Reference search methods compared against the surrogate-based driver:
// grid, random, GP expected-improvement, and Hyperband. All of them train
// through solve_lower and share the RunReport schema.
namespace gbho::baselines {

struct BudgetSpec {
    std::uint64_t max_llo = 100;
    TrainBudget per_eval;
    std::uint64_t seed = 0;
};

RunReport grid_search(const Problem& problem, int grid_points_per_dim, const BudgetSpec& budget);

RunReport random_search(const Problem& problem, const BudgetSpec& budget);

/// GP surrogate over (lambda -> validation loss) with expected-improvement
/// acquisition, maximized by a 1000-point random probe plus local gradient
/// refinement. Runs until exactly max_llo trainings.
RunReport bayes_opt(const Problem& problem, const BudgetSpec& budget, int n_warmup);

/// EI for minimization: (best - mean) Phi(u) + std phi(u), u = (best - mean)/std.
double expected_improvement(double mean, double std, double best);

enum class LloCountingMode { runs, budget_normalized };

struct HyperbandSpec {
    int max_resource = 81;     // R, in training epochs
    double halving_eta = 3.0;  // keep the top 1/eta per rung
    LloCountingMode counting = LloCountingMode::runs;
};

struct HyperbandBracket {
    int s;         // bracket index, s_max .. 0
    int n_configs; // configurations sampled for the bracket
    double r0;     // initial resource per configuration
};

/// Bracket schedule: s_max = floor(log_eta R); bracket s starts
/// ceil((s_max+1)/(s+1) * eta^s) configs at resource R * eta^{-s}.
std::vector<HyperbandBracket> hyperband_brackets(const HyperbandSpec& spec);

/// Indices of the top floor(n/eta) configurations by loss, ties broken by
/// original index.
std::vector<std::size_t> hyperband_survivors(const std::vector<double>& losses, double eta);

RunReport hyperband(const Problem& problem, const HyperbandSpec& spec, const BudgetSpec& budget);

} // namespace gbho::baselines
