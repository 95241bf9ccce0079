#pragma once

#include <span>

#include "gbho/gpr.hpp"
#include "gbho/problem.hpp"
#include "gbho/report.hpp"

// The GBHO driver. The bilevel problem is relaxed through the surrogate
// optimal-value constraint f(lambda, beta) = phi_hat(lambda) +
// z * s_hat(lambda) and solved as a sequence of unconstrained augmented
// Lagrangian subproblems, augmenting the surrogate sample after each round.
namespace gbho {

/// Outer-loop state: quadratic penalty weight, multiplier estimate,
/// iteration counter.
struct AlState {
    double rho = 2.0;
    double mul = 2.0;
    int iter = 0;
};

struct InnerSolveConfig {
    int steps = 400;
    double step_size = 0.05;
    double momentum = 0.9;
    /// Additional random starts besides the incumbent. Default 0: early
    /// rounds of the augmented Lagrangian reward driving the residual toward
    /// -mul/rho, so a global multi-start would leave the incumbent's basin
    /// for a spurious one; descending from P^{i-1} is the intended scheme.
    int restarts = 0;
    double grad_tol = 1e-10; // early exit when the joint gradient is flat
    std::uint64_t seed = 0;
};

struct GbhoConfig {
    int n_init = 10; // initial design size
    int n_al = 5;    // max augmented Lagrangian rounds
    double z = 3.0;  // confidence multiplier on the standard error
    double rho0 = 2.0;
    double mul0 = 2.0;
    double eta = 1.5;
    /// Termination thresholds; <= 0 selects the scaled defaults
    /// delta = 1e-3 * (phi range of the initial sample) and
    /// epsilon = 1e-3 * (1 + |phi_hat|) at the iterate.
    double delta = 0.0;
    double epsilon = 0.0;
    /// When false the loop always runs all n_al rounds (fixed-budget mode);
    /// termination checks are still recorded.
    bool terminate_early = true;
    InnerSolveConfig inner;
    gpr::MleConfig mle;
};

/// Budget presets for 1, 2 and 4 hyperparameters: initial designs of 10,
/// 25 and 81 points plus 5 fixed augmented Lagrangian rounds.
GbhoConfig gbho_preset(int hp_count);

/// Initial sample locations: an even grid in 1-D, a full factorial grid when
/// n_init is a perfect n_dims-th power, and a seeded Latin hypercube
/// otherwise.
std::vector<HyperPoint> initial_design(int n_init, const Box& bounds, int n_dims,
                                       std::uint64_t seed);

/// Augmented Lagrangian value
///   F(beta) + rho/2 c^2 + mul c,   c = phi_hat + z s_hat - f(lambda, beta).
double al_objective(const HyperPoint& lambda, const ParamVector& beta,
                    const gpr::GprModel& model, const AlState& state, double z,
                    const Problem& problem);

struct AlGrad {
    Eigen::VectorXd lambda;
    Eigen::VectorXd beta;
};
AlGrad al_objective_grad(const HyperPoint& lambda, const ParamVector& beta,
                         const gpr::GprModel& model, const AlState& state, double z,
                         const Problem& problem);

struct InnerResult {
    HyperPoint lambda;
    ParamVector beta;
    double value;
};

/// Projected gradient descent with momentum, jointly in (lambda, beta), from
/// the incumbent plus `restarts` random starts; best final value wins (ties
/// toward lower validation loss). Evaluates f but never trains, so it does
/// not count as LLO.
InnerResult inner_minimize(const gpr::GprModel& model, const AlState& state, double z,
                           const Problem& problem, const HyperPoint& lambda0,
                           const ParamVector& beta0, const InnerSolveConfig& config);

/// mul' = mul + rho c,  rho' = eta rho.
AlState update_multipliers(const AlState& state, double residual, double eta);

enum class Termination { Continue, Converged, Stalled };

struct TerminationCheck {
    Termination status = Termination::Continue;
    double bound = 0.0; // |f - phi| error bound z * delta + epsilon at termination
};

/// C1: s_hat(lambda) <= delta. C2: |phi_hat(lambda) - f(lambda, beta)| <=
/// epsilon. Converged requires both. Stalled requires C2 plus two
/// consecutive box-relative lambda moves below 1e-4 while C1 keeps failing
/// (recent_moves carries the move history, newest last).
TerminationCheck check_termination(const gpr::GprModel& model, const HyperPoint& lambda,
                                   const ParamVector& beta, const Problem& problem, double delta,
                                   double epsilon, double z,
                                   std::span<const double> recent_moves = {});

/// Full pipeline: initial design -> n_init trainings -> surrogate fit ->
/// augmented Lagrangian rounds with multiplier updates, one training per
/// round, surrogate augmentation and termination checks. The reported
/// iterate is the best-validation-loss candidate among those with
/// |residual| <= epsilon.
RunReport run(const Problem& problem, const GbhoConfig& config);

} // namespace gbho
