#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "gbho/datasets.hpp"
#include "gbho/hyperpoint.hpp"

namespace gbho {

using ParamVector = Eigen::VectorXd;

/// Assigns every parameter coordinate to a regularization group; group g is
/// penalized with coefficient exp(lambda_g).
struct RegGroups {
    std::vector<int> group_of; // one entry per parameter coordinate
    int group_count = 0;
};

enum class Arch { ridge, logistic, mlp };
enum class LossKind { cross_entropy, squared_error };

struct ModelSpec {
    Arch arch = Arch::ridge;
    int input_dim = 0;
    int hidden = 0;  // mlp only
    int classes = 0; // logistic / mlp
    RegGroups reg_groups;
    LossKind loss = LossKind::squared_error;
};

Eigen::Index param_count(const ModelSpec& spec);

/// Spec builders. hp_count controls how parameters are grouped:
///  - ridge: hp_count contiguous coordinate blocks
///  - logistic: single group (one layer)
///  - mlp: 1 = everything together, 2 = hidden layer / output layer
ModelSpec make_ridge_spec(int input_dim, int hp_count = 1);
ModelSpec make_logistic_spec(int input_dim, int classes);
ModelSpec make_mlp_spec(int input_dim, int hidden, int classes, int hp_count);

struct TrainBudget {
    int max_epochs = 200;
    int batch_size = 32; // <= 0 means full batch
    double learning_rate = 0.05;
    double momentum = 0.9;
    double tol_grad = 1e-4;
    std::uint64_t seed = 0;
};

/// Counts completed lower-level trainings (the unit of computational cost).
class LloCounter {
public:
    void add(std::uint64_t k = 1) { n_.fetch_add(k, std::memory_order_relaxed); }
    std::uint64_t count() const { return n_.load(std::memory_order_relaxed); }
    void reset() { n_.store(0, std::memory_order_relaxed); }

private:
    std::atomic<std::uint64_t> n_{0};
};

/// Process-wide counter; every solve_lower() call bumps it once.
LloCounter& global_llo_counter();

/// sum_g exp(lambda_g) * ||beta restricted to group g||^2
double penalty(const HyperPoint& lambda, const ParamVector& beta, const RegGroups& groups);

/// Training objective: mean loss over `data` plus the group penalty.
double lower_loss(const HyperPoint& lambda, const ParamVector& beta, const ModelSpec& spec,
                  const LabeledSet& data);

struct LowerGrad {
    Eigen::VectorXd beta;   // d(lower_loss)/d(beta)
    Eigen::VectorXd lambda; // d(lower_loss)/d(lambda), = exp(lambda_g) ||beta_g||^2
};
LowerGrad lower_grad(const HyperPoint& lambda, const ParamVector& beta, const ModelSpec& spec,
                     const LabeledSet& data);

/// Fused value-and-gradient evaluation (one forward/backward pass).
double lower_loss_grad(const HyperPoint& lambda, const ParamVector& beta, const ModelSpec& spec,
                       const LabeledSet& data, LowerGrad* grad);

/// Validation objective: mean unpenalized loss.
double upper_loss(const ParamVector& beta, const ModelSpec& spec, const LabeledSet& data);
Eigen::VectorXd upper_grad(const ParamVector& beta, const ModelSpec& spec, const LabeledSet& data);
double upper_loss_grad(const ParamVector& beta, const ModelSpec& spec, const LabeledSet& data,
                       Eigen::VectorXd* grad);

struct LowerSolution {
    ParamVector beta;
    double phi; // lower_loss at the returned beta, evaluated full batch
};

/// Train the model to (approximate) optimality at a fixed lambda and report
/// the achieved objective value. Ridge is solved in closed form; logistic
/// and mlp run SGD with momentum until max_epochs or the full-batch gradient
/// norm drops below tol_grad. Each call counts one LLO on the global counter
/// and on `run_counter` when given.
LowerSolution solve_lower(const HyperPoint& lambda, const ModelSpec& spec,
                          const LabeledSet& train, const TrainBudget& budget,
                          LloCounter* run_counter = nullptr);

} // namespace gbho
