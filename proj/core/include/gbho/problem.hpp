#pragma once

#include <memory>
#include <string>

#include "gbho/lower_level.hpp"

namespace gbho {

/// Everything a hyperparameter search method needs: the model family, the
/// data splits, the lambda box, and the per-training budget. Each Problem
/// carries its own LLO counter so concurrent runs stay accountable.
struct Problem {
    std::string name;
    ModelSpec spec;
    LabeledSet train;
    LabeledSet valid;
    LabeledSet test; // may be empty
    Box bounds;
    TrainBudget budget;
    std::shared_ptr<LloCounter> llo = std::make_shared<LloCounter>();

    bool has_test() const { return test.size() > 0; }
};

/// One-dimensional bilevel instance with closed-form solutions, used as a
/// ground-truth oracle. Lower level: (beta - 1)^2 + exp(lambda) beta^2;
/// upper level: (beta - 0.5)^2. Encoded as ridge regression on single-point
/// train/valid sets so the generic machinery applies unchanged.
struct AnalyticBilevel {
    Problem problem;

    double beta_star(double lambda) const { return 1.0 / (1.0 + std::exp(lambda)); }
    double phi(double lambda) const { return std::exp(lambda) / (1.0 + std::exp(lambda)); }
    double upper(double beta) const { return (beta - 0.5) * (beta - 0.5); }
    double lambda_opt() const { return 0.0; } // beta_star(0) = 0.5 minimizes the upper level
};

AnalyticBilevel synth_quadratic(std::uint64_t seed);

/// MLP problem on an IDX image dataset: n-point subsample split 60/40 into
/// train/valid, the full test pair held out, one or two per-layer
/// regularization groups, lambda in [-10, 0]^hp_count. Expects the standard
/// MNIST file names under data_dir.
Problem make_idx_problem(const std::string& data_dir, Eigen::Index n, int hp_count,
                         std::uint64_t seed);

} // namespace gbho
