#include "gbho/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "gbho/driver.hpp"
#include "gbho/gpr.hpp"

namespace gbho::baselines {

namespace {

using Eigen::VectorXd;

struct Incumbent {
    VectorXd lambda;
    ParamVector beta;
    double valid = std::numeric_limits<double>::infinity();

    void offer(const HyperPoint& lam, const ParamVector& b, double v) {
        if (v < valid) {
            valid = v;
            lambda = lam.values;
            beta = b;
        }
    }
};

RunReport make_report(const std::string& method, const Problem& problem, const Incumbent& best,
                      std::uint64_t llo) {
    RunReport report;
    report.method = method;
    report.lambda_star = best.lambda;
    report.beta_star = best.beta;
    report.train_loss = upper_loss(best.beta, problem.spec, problem.train);
    report.valid_loss = best.valid;
    if (problem.has_test()) {
        report.test_loss = upper_loss(best.beta, problem.spec, problem.test);
    }
    report.llo_count = llo;
    return report;
}

// train at lambda and score on the validation split
double evaluate(const Problem& problem, const HyperPoint& lambda, const TrainBudget& budget,
                Incumbent& best) {
    const LowerSolution sol =
        solve_lower(lambda, problem.spec, problem.train, budget, problem.llo.get());
    const double valid = upper_loss(sol.beta, problem.spec, problem.valid);
    best.offer(lambda, sol.beta, valid);
    return valid;
}

HyperPoint uniform_point(const Box& bounds, std::mt19937_64& rng) {
    VectorXd v(bounds.dims());
    for (int k = 0; k < bounds.dims(); ++k) {
        v(k) = std::uniform_real_distribution<double>(bounds.lower(k), bounds.upper(k))(rng);
    }
    return HyperPoint{std::move(v), bounds};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

} // namespace

RunReport grid_search(const Problem& problem, int grid_points_per_dim, const BudgetSpec& budget) {
    if (grid_points_per_dim < 1) {
        throw ValidationError("grid_search: need at least one point per dimension");
    }
    const int n = problem.bounds.dims();
    double size = 1.0;
    for (int k = 0; k < n; ++k) size *= grid_points_per_dim;
    if (size > double(budget.max_llo)) {
        throw BudgetExceeded("grid_search: grid size exceeds the LLO budget");
    }

    const auto grid = n == 1 ? initial_design(grid_points_per_dim, problem.bounds, 1, budget.seed)
                             : initial_design(static_cast<int>(size), problem.bounds, n, budget.seed);
    Incumbent best;
    for (const auto& lambda : grid) {
        evaluate(problem, lambda, budget.per_eval, best);
    }
    auto report = make_report("grid", problem, best, grid.size());
    return report;
}

RunReport random_search(const Problem& problem, const BudgetSpec& budget) {
    std::mt19937_64 rng(budget.seed);
    Incumbent best;
    for (std::uint64_t i = 0; i < budget.max_llo; ++i) {
        evaluate(problem, uniform_point(problem.bounds, rng), budget.per_eval, best);
    }
    return make_report("random", problem, best, budget.max_llo);
}

double expected_improvement(double mean, double std, double best) {
    const double gap = best - mean;
    // below this the posterior has collapsed onto an evaluated point (the
    // interpolation std with a 1e-10 nugget is of order sigma * 1e-5) and
    // the formula would report spurious improvement
    if (std < 1e-5) {
        return std::max(gap, 0.0);
    }
    const double u = gap / std;
    return gap * normal_cdf(u) + std * normal_pdf(u);
}

RunReport bayes_opt(const Problem& problem, const BudgetSpec& budget, int n_warmup) {
    if (n_warmup < 2 || std::uint64_t(n_warmup) >= budget.max_llo) {
        throw ValidationError("bayes_opt: need 2 <= n_warmup < max_llo");
    }
    std::mt19937_64 rng(budget.seed);
    Incumbent best;

    // the surrogate target here is the validation loss itself
    gpr::ValueSample sample;
    for (int i = 0; i < n_warmup; ++i) {
        const HyperPoint lambda = uniform_point(problem.bounds, rng);
        const double valid = evaluate(problem, lambda, budget.per_eval, best);
        sample.points.push_back({lambda, valid});
    }
    gpr::MleConfig mle;
    mle.seed = budget.seed + 1;
    gpr::GprModel model = gpr::mle_fit(sample, mle);

    for (std::uint64_t it = std::uint64_t(n_warmup); it < budget.max_llo; ++it) {
        // acquisition maximization: random probe, then local refinement
        HyperPoint proposal = uniform_point(problem.bounds, rng);
        double proposal_ei = -1.0;
        for (int p = 0; p < 1000; ++p) {
            const HyperPoint cand = uniform_point(problem.bounds, rng);
            const auto pred = gpr::predict(model, cand);
            const double ei = expected_improvement(pred.mean, pred.std, best.valid);
            if (ei > proposal_ei) {
                proposal_ei = ei;
                proposal = cand;
            }
        }
        double step = 0.05;
        for (int p = 0; p < 30; ++p) {
            const auto pred = gpr::predict(model, proposal);
            const auto grad = gpr::predict_grad(model, proposal);
            const double u =
                pred.std < 1e-12 ? 0.0 : (best.valid - pred.mean) / pred.std;
            const VectorXd ei_grad =
                -normal_cdf(u) * grad.mean + normal_pdf(u) * grad.std;
            const double gnorm = ei_grad.norm();
            if (gnorm < 1e-14) break;
            VectorXd next = proposal.values +
                            step * problem.bounds.range().cwiseProduct(ei_grad / gnorm);
            next = problem.bounds.clamp(next);
            const HyperPoint cand{next, problem.bounds};
            const auto cpred = gpr::predict(model, cand);
            if (expected_improvement(cpred.mean, cpred.std, best.valid) > proposal_ei) {
                proposal = cand;
                proposal_ei = expected_improvement(cpred.mean, cpred.std, best.valid);
            } else {
                step *= 0.5;
            }
        }
        const double valid = evaluate(problem, proposal, budget.per_eval, best);
        model = gpr::augment(model, proposal, valid);
    }
    return make_report("bayes", problem, best, budget.max_llo);
}

std::vector<HyperbandBracket> hyperband_brackets(const HyperbandSpec& spec) {
    if (spec.halving_eta <= 1.0) {
        throw ValidationError("hyperband: halving_eta must exceed 1");
    }
    if (double(spec.max_resource) < spec.halving_eta) {
        throw ValidationError("hyperband: max_resource must be at least halving_eta");
    }
    const double eta = spec.halving_eta;
    const int s_max = static_cast<int>(std::floor(std::log(double(spec.max_resource)) /
                                                  std::log(eta) * (1.0 + 1e-12)));
    std::vector<HyperbandBracket> brackets;
    for (int s = s_max; s >= 0; --s) {
        HyperbandBracket b;
        b.s = s;
        b.n_configs = static_cast<int>(
            std::ceil(double(s_max + 1) / double(s + 1) * std::pow(eta, s) - 1e-9));
        b.r0 = double(spec.max_resource) * std::pow(eta, -s);
        brackets.push_back(b);
    }
    return brackets;
}

std::vector<std::size_t> hyperband_survivors(const std::vector<double>& losses, double eta) {
    std::vector<std::size_t> idx(losses.size());
    std::iota(idx.begin(), idx.end(), std::size_t(0));
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return losses[a] < losses[b]; });
    idx.resize(static_cast<std::size_t>(double(losses.size()) / eta));
    std::sort(idx.begin(), idx.end());
    return idx;
}

RunReport hyperband(const Problem& problem, const HyperbandSpec& spec, const BudgetSpec& budget) {
    const auto brackets = hyperband_brackets(spec);
    std::mt19937_64 rng(budget.seed);
    Incumbent best;
    double llo_units = 0.0;
    std::uint64_t config_id = 0;

    for (const auto& bracket : brackets) {
        std::vector<HyperPoint> configs;
        std::vector<std::uint64_t> seeds;
        configs.reserve(static_cast<std::size_t>(bracket.n_configs));
        for (int i = 0; i < bracket.n_configs; ++i) {
            configs.push_back(uniform_point(problem.bounds, rng));
            seeds.push_back(budget.per_eval.seed + config_id++);
        }
        double resource = bracket.r0;
        for (int rung = 0; rung <= bracket.s; ++rung) {
            std::vector<double> losses(configs.size());
            for (std::size_t i = 0; i < configs.size(); ++i) {
                TrainBudget b = budget.per_eval;
                b.max_epochs = std::max(1, static_cast<int>(std::llround(resource)));
                b.seed = seeds[i];
                const LowerSolution sol =
                    solve_lower(configs[i], problem.spec, problem.train, b, problem.llo.get());
                losses[i] = upper_loss(sol.beta, problem.spec, problem.valid);
                best.offer(configs[i], sol.beta, losses[i]);
                llo_units += spec.counting == LloCountingMode::runs
                                 ? 1.0
                                 : resource / double(spec.max_resource);
            }
            if (rung == bracket.s) break;
            const auto keep = hyperband_survivors(losses, spec.halving_eta);
            std::vector<HyperPoint> next;
            std::vector<std::uint64_t> next_seeds;
            for (std::size_t i : keep) {
                next.push_back(configs[i]);
                next_seeds.push_back(seeds[i]);
            }
            configs = std::move(next);
            seeds = std::move(next_seeds);
            resource *= spec.halving_eta;
            if (configs.empty()) break;
        }
    }
    return make_report("hyperband", problem, best,
                       static_cast<std::uint64_t>(std::llround(llo_units)));
}

} // namespace gbho::baselines
