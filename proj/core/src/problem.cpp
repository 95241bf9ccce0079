#include "gbho/problem.hpp"

namespace gbho {

AnalyticBilevel synth_quadratic(std::uint64_t seed) {
    // f(lambda, beta) = (beta - 1)^2 + exp(lambda) beta^2 is exactly ridge
    // regression with the single training point (x, y) = (1, 1); the upper
    // objective (beta - 0.5)^2 is the validation point (1, 0.5).
    LabeledSet train;
    train.kind = TaskKind::regression;
    train.features = Eigen::MatrixXd::Constant(1, 1, 1.0);
    train.labels = Eigen::VectorXd::Constant(1, 1.0);
    LabeledSet valid;
    valid.kind = TaskKind::regression;
    valid.features = Eigen::MatrixXd::Constant(1, 1, 1.0);
    valid.labels = Eigen::VectorXd::Constant(1, 0.5);

    AnalyticBilevel inst;
    inst.problem.name = "analytic";
    inst.problem.spec = make_ridge_spec(1, 1);
    inst.problem.train = std::move(train);
    inst.problem.valid = std::move(valid);
    inst.problem.bounds = Box::cube(1, -10.0, 0.0);
    inst.problem.budget.seed = seed;
    return inst;
}

Problem make_idx_problem(const std::string& data_dir, Eigen::Index n, int hp_count,
                         std::uint64_t seed) {
    if (hp_count != 1 && hp_count != 2) {
        throw ValidationError("make_idx_problem: hp_count must be 1 or 2");
    }
    const LabeledSet full =
        load_idx(data_dir + "/train-images-idx3-ubyte", data_dir + "/train-labels-idx1-ubyte");
    const LabeledSet test =
        load_idx(data_dir + "/t10k-images-idx3-ubyte", data_dir + "/t10k-labels-idx1-ubyte");

    SplitSpec split;
    split.train_fraction = 0.6;
    split.valid_fraction = 0.4;
    split.seed = seed;
    auto [train, valid] = subsample_split(full, n, split);

    Problem prob;
    prob.name = "mnist" + std::to_string(n) + "-" + std::to_string(hp_count) + "hp";
    prob.spec = make_mlp_spec(static_cast<int>(full.dim()), 100, full.classes, hp_count);
    prob.train = std::move(train);
    prob.valid = std::move(valid);
    prob.test = test;
    prob.bounds = Box::cube(hp_count, -10.0, 0.0);
    prob.budget.seed = seed + 1;
    return prob;
}

} // namespace gbho
