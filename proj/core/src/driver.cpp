#include "gbho/driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace gbho {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

struct AlEval {
    double value;
    double upper;
    double lower;
    double residual;
    VectorXd grad_lambda;
    VectorXd grad_beta;
};

// One fused pass: objective value plus gradients in both blocks.
AlEval al_eval(const HyperPoint& lambda, const ParamVector& beta, const gpr::GprModel& model,
               const AlState& state, double z, const Problem& problem, bool want_grad) {
    AlEval e;
    VectorXd upper_g;
    LowerGrad lower_g;
    e.upper = upper_loss_grad(beta, problem.spec, problem.valid, want_grad ? &upper_g : nullptr);
    e.lower = lower_loss_grad(lambda, beta, problem.spec, problem.train,
                              want_grad ? &lower_g : nullptr);
    const auto pred = gpr::predict(model, lambda);
    e.residual = pred.mean + z * pred.std - e.lower;
    e.value = e.upper + 0.5 * state.rho * e.residual * e.residual + state.mul * e.residual;
    if (want_grad) {
        const auto pred_g = gpr::predict_grad(model, lambda);
        const double scale = state.rho * e.residual + state.mul;
        e.grad_lambda = scale * (pred_g.mean + z * pred_g.std - lower_g.lambda);
        e.grad_beta = upper_g - scale * lower_g.beta;
    }
    return e;
}

std::vector<HyperPoint> factorial_grid(const Box& bounds, int points_per_dim) {
    const int n = bounds.dims();
    std::vector<double> ticks;
    std::vector<HyperPoint> out;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (;;) {
        VectorXd v(n);
        for (int k = 0; k < n; ++k) {
            const double t = points_per_dim == 1
                                 ? 0.5
                                 : double(idx[std::size_t(k)]) / double(points_per_dim - 1);
            v(k) = bounds.lower(k) + t * (bounds.upper(k) - bounds.lower(k));
        }
        out.push_back(HyperPoint{std::move(v), bounds});
        int k = 0;
        for (; k < n; ++k) {
            if (++idx[std::size_t(k)] < points_per_dim) break;
            idx[std::size_t(k)] = 0;
        }
        if (k == n) break;
    }
    return out;
}

// perfect n-th root of m, or 0 when none exists
int integer_root(int m, int n) {
    const int guess = static_cast<int>(std::llround(std::pow(double(m), 1.0 / double(n))));
    for (int k = std::max(1, guess - 1); k <= guess + 1; ++k) {
        long long p = 1;
        for (int i = 0; i < n; ++i) p *= k;
        if (p == m) return k;
    }
    return 0;
}

struct Candidate {
    HyperPoint lambda;
    ParamVector beta;
    double upper;
    double residual;
    double epsilon;
};

double resolve_epsilon(double configured, double phi_hat) {
    return configured > 0.0 ? configured : 1e-3 * (1.0 + std::abs(phi_hat));
}

RunReport finalize(const Problem& problem, const std::vector<Candidate>& candidates) {
    const Candidate* best = nullptr;
    for (const auto& c : candidates) {
        if (std::abs(c.residual) <= c.epsilon && (!best || c.upper < best->upper)) {
            best = &c;
        }
    }
    if (!best) {
        // no feasible iterate; fall back to the best validation loss
        for (const auto& c : candidates) {
            if (!best || c.upper < best->upper) best = &c;
        }
    }
    RunReport report;
    report.method = "gbho";
    report.lambda_star = best->lambda.values;
    report.beta_star = best->beta;
    report.train_loss = upper_loss(best->beta, problem.spec, problem.train);
    report.valid_loss = best->upper;
    if (problem.has_test()) {
        report.test_loss = upper_loss(best->beta, problem.spec, problem.test);
    }
    return report;
}

} // namespace

GbhoConfig gbho_preset(int hp_count) {
    GbhoConfig config;
    switch (hp_count) {
    case 1:
        config.n_init = 10;
        break;
    case 2:
        config.n_init = 25;
        break;
    case 4:
        config.n_init = 81;
        break;
    default:
        throw ValidationError("gbho_preset: presets exist for 1, 2 and 4 hyperparameters");
    }
    config.n_al = 5;
    config.terminate_early = false; // fixed budget, comparable LLO accounting
    return config;
}

std::vector<HyperPoint> initial_design(int n_init, const Box& bounds, int n_dims,
                                       std::uint64_t seed) {
    if (n_init < 2) {
        throw ValidationError("initial_design: need at least 2 points");
    }
    if (bounds.dims() != n_dims) {
        throw DimensionMismatch("initial_design: bounds/dimension mismatch");
    }
    if (n_dims == 1) {
        std::vector<HyperPoint> out;
        out.reserve(static_cast<std::size_t>(n_init));
        for (int i = 0; i < n_init; ++i) {
            const double t = double(i) / double(n_init - 1);
            VectorXd v(1);
            v(0) = bounds.lower(0) + t * (bounds.upper(0) - bounds.lower(0));
            out.push_back(HyperPoint{std::move(v), bounds});
        }
        return out;
    }
    if (const int k = integer_root(n_init, n_dims); k >= 2) {
        return factorial_grid(bounds, k);
    }
    // Latin hypercube: one stratum per point and dimension
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<int>> strata(static_cast<std::size_t>(n_dims));
    for (auto& perm : strata) {
        perm.resize(static_cast<std::size_t>(n_init));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
    }
    std::vector<HyperPoint> out;
    out.reserve(static_cast<std::size_t>(n_init));
    for (int i = 0; i < n_init; ++i) {
        VectorXd v(n_dims);
        for (int k = 0; k < n_dims; ++k) {
            const double t = (strata[std::size_t(k)][std::size_t(i)] + unit(rng)) / double(n_init);
            v(k) = bounds.lower(k) + t * (bounds.upper(k) - bounds.lower(k));
        }
        out.push_back(HyperPoint{std::move(v), bounds});
    }
    return out;
}

double al_objective(const HyperPoint& lambda, const ParamVector& beta, const gpr::GprModel& model,
                    const AlState& state, double z, const Problem& problem) {
    return al_eval(lambda, beta, model, state, z, problem, false).value;
}

AlGrad al_objective_grad(const HyperPoint& lambda, const ParamVector& beta,
                         const gpr::GprModel& model, const AlState& state, double z,
                         const Problem& problem) {
    auto e = al_eval(lambda, beta, model, state, z, problem, true);
    return AlGrad{std::move(e.grad_lambda), std::move(e.grad_beta)};
}

InnerResult inner_minimize(const gpr::GprModel& model, const AlState& state, double z,
                           const Problem& problem, const HyperPoint& lambda0,
                           const ParamVector& beta0, const InnerSolveConfig& config) {
    if (!problem.bounds.contains(lambda0.values, 1e-9 * (1.0 + problem.bounds.diagonal()))) {
        throw OutOfBounds("inner_minimize: start point outside bounds");
    }
    std::mt19937_64 rng(config.seed);
    std::vector<VectorXd> starts{lambda0.values};
    for (int r = 0; r < config.restarts; ++r) {
        VectorXd v(problem.bounds.dims());
        for (int k = 0; k < problem.bounds.dims(); ++k) {
            v(k) = std::uniform_real_distribution<double>(problem.bounds.lower(k),
                                                          problem.bounds.upper(k))(rng);
        }
        starts.push_back(std::move(v));
    }

    InnerResult best;
    double best_value = std::numeric_limits<double>::infinity();
    double best_upper = std::numeric_limits<double>::infinity();

    for (const VectorXd& start : starts) {
        HyperPoint lambda{problem.bounds.clamp(start), problem.bounds};
        ParamVector beta = beta0;
        VectorXd v_lambda = VectorXd::Zero(lambda.dims());
        VectorXd v_beta = VectorXd::Zero(beta.size());
        double step = config.step_size;
        int rescues = 0;

        // best point seen along this trajectory
        HyperPoint traj_lambda = lambda;
        ParamVector traj_beta = beta;
        double traj_value = std::numeric_limits<double>::infinity();
        double traj_upper = std::numeric_limits<double>::infinity();

        for (int it = 0; it < config.steps; ++it) {
            const AlEval e = al_eval(lambda, beta, model, state, z, problem, true);
            const bool bad = !std::isfinite(e.value) || !std::isfinite(e.grad_beta.norm()) ||
                             !std::isfinite(e.grad_lambda.norm());
            if (bad) {
                if (++rescues > 3) {
                    throw Diverged("inner_minimize: objective diverged");
                }
                step *= 0.5;
                lambda = traj_value < std::numeric_limits<double>::infinity() ? traj_lambda
                                                                              : HyperPoint{problem.bounds.clamp(start), problem.bounds};
                beta = traj_value < std::numeric_limits<double>::infinity() ? traj_beta : beta0;
                v_lambda.setZero();
                v_beta.setZero();
                continue;
            }
            if (e.value < traj_value) {
                traj_value = e.value;
                traj_upper = e.upper;
                traj_lambda = lambda;
                traj_beta = beta;
            }
            const double gnorm =
                std::sqrt(e.grad_lambda.squaredNorm() + e.grad_beta.squaredNorm());
            if (gnorm <= config.grad_tol) {
                break;
            }
            v_lambda = config.momentum * v_lambda - step * e.grad_lambda;
            v_beta = config.momentum * v_beta - step * e.grad_beta;
            VectorXd raw = lambda.values + v_lambda;
            lambda.values = problem.bounds.clamp(raw);
            // kill velocity components that pressed into the box walls
            for (int k = 0; k < lambda.dims(); ++k) {
                if (lambda.values(k) != raw(k)) v_lambda(k) = 0.0;
            }
            beta += v_beta;
        }
        const AlEval fin = al_eval(lambda, beta, model, state, z, problem, false);
        if (std::isfinite(fin.value) && fin.value < traj_value) {
            traj_value = fin.value;
            traj_upper = fin.upper;
            traj_lambda = lambda;
            traj_beta = beta;
        }
        const bool better = traj_value < best_value - 1e-12 ||
                            (std::abs(traj_value - best_value) <= 1e-12 && traj_upper < best_upper);
        if (better) {
            best_value = traj_value;
            best_upper = traj_upper;
            best = InnerResult{traj_lambda, traj_beta, traj_value};
        }
    }
    if (!std::isfinite(best_value)) {
        throw Diverged("inner_minimize: no finite iterate found");
    }
    return best;
}

AlState update_multipliers(const AlState& state, double residual, double eta) {
    AlState next;
    next.mul = state.mul + state.rho * residual;
    next.rho = eta * state.rho;
    next.iter = state.iter + 1;
    return next;
}

TerminationCheck check_termination(const gpr::GprModel& model, const HyperPoint& lambda,
                                   const ParamVector& beta, const Problem& problem, double delta,
                                   double epsilon, double z,
                                   std::span<const double> recent_moves) {
    const auto pred = gpr::predict(model, lambda);
    const double f = lower_loss(lambda, beta, problem.spec, problem.train);
    const bool c1 = pred.std <= delta;
    const bool c2 = std::abs(pred.mean - f) <= epsilon;
    TerminationCheck check;
    check.bound = z * delta + epsilon;
    if (c1 && c2) {
        check.status = Termination::Converged;
    } else if (c2 && !c1 && recent_moves.size() >= 2 &&
               recent_moves[recent_moves.size() - 1] < 1e-4 &&
               recent_moves[recent_moves.size() - 2] < 1e-4) {
        check.status = Termination::Stalled;
    }
    return check;
}

RunReport run(const Problem& problem, const GbhoConfig& config) {
    if (config.n_init < 2 || config.n_al < 0 || config.eta <= 1.0 || config.z <= 0.0) {
        throw ValidationError("gbho::run: invalid configuration");
    }
    const int n_dims = problem.bounds.dims();
    const auto design = initial_design(config.n_init, problem.bounds, n_dims, config.inner.seed);

    gpr::ValueSample sample;
    std::vector<Candidate> candidates;
    candidates.reserve(design.size());
    std::size_t best_idx = 0;
    double best_upper = std::numeric_limits<double>::infinity();
    for (const auto& lambda : design) {
        const LowerSolution sol =
            solve_lower(lambda, problem.spec, problem.train, problem.budget, problem.llo.get());
        const double upper = upper_loss(sol.beta, problem.spec, problem.valid);
        sample.points.push_back({lambda, sol.phi});
        candidates.push_back({lambda, sol.beta, upper, 0.0, 0.0});
        if (upper < best_upper) {
            best_upper = upper;
            best_idx = candidates.size() - 1;
        }
    }

    gpr::GprModel model = gpr::mle_fit(sample, config.mle);

    const VectorXd phis = sample.values();
    const double phi_range = phis.maxCoeff() - phis.minCoeff();
    const double delta = config.delta > 0.0 ? config.delta : 1e-3 * std::max(phi_range, 1e-3);

    // constraint residuals of the design candidates under the fitted model
    for (auto& c : candidates) {
        const auto pred = gpr::predict(model, c.lambda);
        const double f = lower_loss(c.lambda, c.beta, problem.spec, problem.train);
        c.residual = pred.mean + config.z * pred.std - f;
        c.epsilon = resolve_epsilon(config.epsilon, pred.mean);
    }

    AlState state{config.rho0, config.mul0, 0};
    HyperPoint incumbent_lambda = candidates[best_idx].lambda;
    ParamVector incumbent_beta = candidates[best_idx].beta;
    VectorXd prev_lambda = incumbent_lambda.values;

    RunReport report;
    report.termination = "budget";
    std::vector<double> moves;
    int executed = 0;

    for (int i = 1; i <= config.n_al; ++i) {
        InnerSolveConfig inner = config.inner;
        inner.seed = config.inner.seed + static_cast<std::uint64_t>(i);
        const InnerResult it = inner_minimize(model, state, config.z, problem, incumbent_lambda,
                                              incumbent_beta, inner);
        ++executed;

        const auto pred = gpr::predict(model, it.lambda);
        const double f = lower_loss(it.lambda, it.beta, problem.spec, problem.train);
        const double upper = upper_loss(it.beta, problem.spec, problem.valid);
        const double residual = pred.mean + config.z * pred.std - f;
        const double epsilon = resolve_epsilon(config.epsilon, pred.mean);

        state = update_multipliers(state, residual, config.eta);

        const LowerSolution sol =
            solve_lower(it.lambda, problem.spec, problem.train, problem.budget, problem.llo.get());

        moves.push_back((it.lambda.values - prev_lambda).norm() /
                        std::max(problem.bounds.diagonal(), 1e-12));
        prev_lambda = it.lambda.values;

        const TerminationCheck check =
            check_termination(model, it.lambda, it.beta, problem, delta, epsilon, config.z, moves);

        model = gpr::augment(model, it.lambda, sol.phi);

        report.history.push_back({it.lambda.values, upper, residual, pred.std});
        candidates.push_back({it.lambda, it.beta, upper, residual, epsilon});
        incumbent_lambda = it.lambda;
        incumbent_beta = it.beta;

        if (config.terminate_early && check.status != Termination::Continue) {
            report.termination =
                check.status == Termination::Converged ? "converged" : "stalled";
            break;
        }
    }

    RunReport out = finalize(problem, candidates);
    out.history = std::move(report.history);
    out.termination = report.termination;
    out.al_iters = executed;
    out.llo_count = static_cast<std::uint64_t>(config.n_init) +
                    static_cast<std::uint64_t>(executed);
    return out;
}

} // namespace gbho
