// Acceptance suite: one check per release criterion, each printing a single
// PASS/FAIL line. Run with no arguments for all criteria or pass criterion
// numbers to run a subset.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gbho/baselines.hpp"
#include "gbho/driver.hpp"
#include "gbho/experiment.hpp"
#include "test_util.hpp"

using namespace gbho;
namespace fs = std::filesystem;
using Eigen::VectorXd;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok) {
            pass_ = false;
            if (!failures_.empty()) failures_ += "; ";
            failures_ += what;
        }
    }
    void note(const std::string& text) {
        if (!notes_.empty()) notes_ += ", ";
        notes_ += text;
    }
    Outcome outcome() const {
        Outcome o;
        o.pass = pass_;
        o.detail = pass_ ? notes_ : failures_;
        return o;
    }

private:
    bool pass_ = true;
    std::string failures_;
    std::string notes_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream ss;
    ss.precision(precision);
    ss << v;
    return ss.str();
}

// ---------------------------------------------------------------------------
// 1. Analytic bilevel convergence: lambda* in [-0.15, 0.15] and
//    F(beta*) <= 1e-3 for at least 9 of 10 seeds, in under 10 s.
Outcome criterion_1() {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    int good = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const AnalyticBilevel inst = synth_quadratic(seed);
        GbhoConfig config;
        config.n_init = 10;
        config.n_al = 5;
        config.inner.seed = seed * 100;
        config.mle.seed = seed * 100;
        const RunReport report = run(inst.problem, config);
        const double lambda = report.lambda_star(0);
        const double upper = inst.upper(report.beta_star(0));
        if (lambda >= -0.15 && lambda <= 0.15 && upper <= 1e-3) ++good;
    }
    const double elapsed = seconds_since(start);
    check.expect(good >= 9, "only " + std::to_string(good) + "/10 seeds converged");
    check.expect(elapsed < 10.0, "runtime " + fmt(elapsed) + "s exceeds 10s");
    check.note(std::to_string(good) + "/10 seeds, " + fmt(elapsed, 3) + "s");
    return check.outcome();
}

// ---------------------------------------------------------------------------
// 2. LLO accounting, exact counts: gbho presets 10+5 and 25+5, grid 100 and
//    900, bayesian 60.
Outcome criterion_2() {
    Check check;

    {
        const AnalyticBilevel inst = synth_quadratic(1);
        GbhoConfig config = gbho_preset(1);
        const auto before = inst.problem.llo->count();
        const RunReport report = run(inst.problem, config);
        check.expect(report.llo_count == 15,
                     "gbho 1HP llo " + std::to_string(report.llo_count) + " != 15");
        check.expect(inst.problem.llo->count() - before == 15, "gbho 1HP counter mismatch");
    }
    {
        const Problem problem = testutil::make_ridge_problem(2, 30, 2, 7);
        GbhoConfig config = gbho_preset(2);
        config.inner.seed = 7;
        const RunReport report = run(problem, config);
        check.expect(report.llo_count == 30,
                     "gbho 2HP llo " + std::to_string(report.llo_count) + " != 30");
    }
    {
        const AnalyticBilevel inst = synth_quadratic(2);
        baselines::BudgetSpec budget;
        budget.max_llo = 100;
        const auto report = baselines::grid_search(inst.problem, 100, budget);
        check.expect(report.llo_count == 100,
                     "grid 1HP llo " + std::to_string(report.llo_count) + " != 100");
    }
    {
        const Problem problem = testutil::make_ridge_problem(2, 30, 2, 9);
        baselines::BudgetSpec budget;
        budget.max_llo = 900;
        const auto report = baselines::grid_search(problem, 30, budget);
        check.expect(report.llo_count == 900,
                     "grid 2HP llo " + std::to_string(report.llo_count) + " != 900");
        check.expect(problem.llo->count() == 900, "grid 2HP counter mismatch");
    }
    {
        const AnalyticBilevel inst = synth_quadratic(3);
        baselines::BudgetSpec budget;
        budget.max_llo = 60;
        budget.seed = 3;
        const auto before = inst.problem.llo->count();
        const auto report = baselines::bayes_opt(inst.problem, budget, 10);
        check.expect(report.llo_count == 60,
                     "bayes 1HP llo " + std::to_string(report.llo_count) + " != 60");
        check.expect(inst.problem.llo->count() - before == 60, "bayes counter mismatch");
    }
    check.note("10+5, 25+5, 100, 900, 60 all exact");
    return check.outcome();
}

// ---------------------------------------------------------------------------
// 3. Kriging interpolation on 20 random fitted models (sizes 5-50, dims
//    1-4): |mean - phi| <= 1e-6 (1 + |phi|) and std <= 1e-4 at every sample
//    point, in under 5 s.
Outcome criterion_3() {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int models = 0;
    int points = 0;
    double worst_gap = 0.0;
    double worst_std = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int dims = 1 + trial % 4;
        const int size = 5 + static_cast<int>(rng() % 46);
        const Box box = Box::cube(dims, -10.0, 0.0);
        gpr::ValueSample sample;
        for (int i = 0; i < size; ++i) {
            VectorXd v(dims);
            for (int k = 0; k < dims; ++k) v(k) = -10.0 + 10.0 * unit(rng);
            sample.points.push_back({make_hyper_point(v, box), 2.0 * unit(rng) - 1.0});
        }
        gpr::MleConfig mle;
        mle.seed = 1000 + static_cast<std::uint64_t>(trial);
        const gpr::GprModel model = gpr::mle_fit(sample, mle);
        check.expect(model.nugget <= 1e-8,
                     "model " + std::to_string(trial) + " needed jitter " + fmt(model.nugget));
        ++models;
        for (const auto& p : sample.points) {
            const auto pred = gpr::predict(model, p.lambda);
            const double gap = std::abs(pred.mean - p.phi) / (1.0 + std::abs(p.phi));
            worst_gap = std::max(worst_gap, gap);
            worst_std = std::max(worst_std, pred.std);
            ++points;
        }
    }
    const double elapsed = seconds_since(start);
    check.expect(worst_gap <= 1e-6, "worst interpolation gap " + fmt(worst_gap));
    check.expect(worst_std <= 1e-4, "worst sample-point std " + fmt(worst_std));
    check.expect(elapsed < 5.0, "runtime " + fmt(elapsed) + "s exceeds 5s");
    check.note(std::to_string(models) + " models / " + std::to_string(points) +
               " points, worst gap " + fmt(worst_gap, 2) + ", " + fmt(elapsed, 3) + "s");
    return check.outcome();
}

// ---------------------------------------------------------------------------
// 4. Gradient verification against central differences, relative error
//    <= 1e-4 at 50+ random points for lower_grad, predict_grad and
//    al_objective, in under 30 s.
Outcome criterion_4() {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(4321);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    int lower_checked = 0;
    double lower_worst = 0.0;
    for (int trial = 0; trial < 51; ++trial) {
        const int kind = trial % 3;
        LabeledSet data;
        ModelSpec spec;
        if (kind == 0) {
            data = testutil::make_regression(12, 3, 40 + trial);
            spec = make_ridge_spec(3, 1 + trial % 3);
        } else if (kind == 1) {
            data = testutil::make_blobs(14, 3, 3, 50 + trial);
            spec = make_logistic_spec(3, 3);
        } else {
            data = testutil::make_blobs(16, 4, 3, 60 + trial);
            spec = make_mlp_spec(4, 5, 3, 1 + trial % 2);
        }
        const int groups = spec.reg_groups.group_count;
        VectorXd lam(groups);
        for (int k = 0; k < groups; ++k) lam(k) = -9.0 + 8.0 * unit(rng);
        const HyperPoint lambda{lam, Box::cube(groups, -10.0, 0.0)};
        ParamVector beta(param_count(spec));
        for (Eigen::Index i = 0; i < beta.size(); ++i) beta(i) = unit(rng) - 0.5;

        const auto grad = lower_grad(lambda, beta, spec, data);
        const VectorXd fd_beta = testutil::central_diff(
            [&](const VectorXd& b) { return lower_loss(lambda, b, spec, data); }, beta);
        const VectorXd fd_lambda = testutil::central_diff(
            [&](const VectorXd& l) {
                return lower_loss(HyperPoint{l, lambda.bounds}, beta, spec, data);
            },
            lambda.values);
        lower_worst = std::max(lower_worst, testutil::max_rel_err(grad.beta, fd_beta));
        lower_worst = std::max(lower_worst, testutil::max_rel_err(grad.lambda, fd_lambda));
        ++lower_checked;
    }
    check.expect(lower_checked >= 50 && lower_worst <= 1e-4,
                 "lower_grad worst rel err " + fmt(lower_worst));

    int predict_checked = 0;
    int predict_failed = 0;
    for (int trial = 0; trial < 6 && predict_checked < 60; ++trial) {
        const int dims = 1 + trial % 3;
        const Box box = Box::cube(dims, -10.0, 0.0);
        gpr::ValueSample sample;
        for (int i = 0; i < 12 + trial * 4; ++i) {
            VectorXd v(dims);
            for (int k = 0; k < dims; ++k) v(k) = -10.0 + 10.0 * unit(rng);
            sample.points.push_back({make_hyper_point(v, box), std::sin(3.0 * unit(rng))});
        }
        gpr::MleConfig mle;
        mle.seed = 2000 + static_cast<std::uint64_t>(trial);
        const gpr::GprModel model = gpr::mle_fit(sample, mle);
        for (int i = 0; i < 15; ++i) {
            VectorXd x(dims);
            for (int k = 0; k < dims; ++k) x(k) = -9.5 + 9.0 * unit(rng);
            const HyperPoint lambda{x, box};
            if (gpr::predict(model, lambda).std < 10.0 * gpr::kStdFloor) continue;
            const auto grad = gpr::predict_grad(model, lambda);
            if (!testutil::fd_matches(
                    [&](const VectorXd& v) {
                        return gpr::predict(model, HyperPoint{v, box}).mean;
                    },
                    x, grad.mean, 1e-4)) {
                ++predict_failed;
            }
            if (!testutil::fd_matches(
                    [&](const VectorXd& v) { return gpr::predict(model, HyperPoint{v, box}).std; },
                    x, grad.std, 1e-4)) {
                ++predict_failed;
            }
            ++predict_checked;
        }
    }
    check.expect(predict_checked >= 50 && predict_failed == 0,
                 "predict_grad: " + std::to_string(predict_failed) + " mismatches over " +
                     std::to_string(predict_checked) + " points");

    int al_checked = 0;
    int al_failed = 0;
    {
        const AnalyticBilevel inst = synth_quadratic(6);
        const auto design = initial_design(10, inst.problem.bounds, 1, 1);
        gpr::ValueSample sample;
        for (const auto& lambda : design) {
            sample.points.push_back(
                {lambda, solve_lower(lambda, inst.problem.spec, inst.problem.train,
                                     inst.problem.budget)
                             .phi});
        }
        const gpr::GprModel model = gpr::mle_fit(sample, gpr::MleConfig{});
        const AlState state{2.0, 2.0, 0};
        while (al_checked < 50) {
            const double lam = -9.5 + 9.0 * unit(rng);
            const HyperPoint lambda{VectorXd::Constant(1, lam), inst.problem.bounds};
            if (gpr::predict(model, lambda).std < 10.0 * gpr::kStdFloor) continue;
            const ParamVector beta = VectorXd::Constant(1, 1.5 * unit(rng) - 0.2);
            const auto grad =
                al_objective_grad(lambda, beta, model, state, 3.0, inst.problem);
            if (!testutil::fd_matches(
                    [&](const VectorXd& v) {
                        return al_objective(HyperPoint{v, inst.problem.bounds}, beta, model,
                                            state, 3.0, inst.problem);
                    },
                    lambda.values, grad.lambda, 1e-4)) {
                ++al_failed;
            }
            if (!testutil::fd_matches(
                    [&](const VectorXd& v) {
                        return al_objective(lambda, v, model, state, 3.0, inst.problem);
                    },
                    beta, grad.beta, 1e-4)) {
                ++al_failed;
            }
            ++al_checked;
        }
    }
    check.expect(al_failed == 0, "al_objective: " + std::to_string(al_failed) +
                                     " mismatches over " + std::to_string(al_checked) +
                                     " points");

    const double elapsed = seconds_since(start);
    check.expect(elapsed < 30.0, "runtime " + fmt(elapsed) + "s exceeds 30s");
    check.note("lower worst " + fmt(lower_worst, 2) + "; predict " +
               std::to_string(predict_checked) + " pts, al " + std::to_string(al_checked) +
               " pts all matched; " + fmt(elapsed, 3) + "s");
    return check.outcome();
}

// ---------------------------------------------------------------------------
// 5. Surrogate band coverage on the analytic instance: phi(lambda) <=
//    phi_hat + 3 s_hat on at least 198 of 200 probes.
Outcome criterion_5() {
    Check check;
    const AnalyticBilevel inst = synth_quadratic(5);
    const auto design = initial_design(10, inst.problem.bounds, 1, 1);
    gpr::ValueSample sample;
    for (const auto& lambda : design) {
        sample.points.push_back(
            {lambda,
             solve_lower(lambda, inst.problem.spec, inst.problem.train, inst.problem.budget)
                 .phi});
    }
    const gpr::GprModel model = gpr::mle_fit(sample, gpr::MleConfig{});
    int covered = 0;
    for (int i = 0; i < 200; ++i) {
        const double lam = -10.0 + 10.0 * i / 199.0;
        const auto pred =
            gpr::predict(model, make_hyper_point(VectorXd::Constant(1, lam), inst.problem.bounds));
        if (inst.phi(lam) <= pred.mean + 3.0 * pred.std + 1e-12) ++covered;
    }
    check.expect(covered >= 198, "covered only " + std::to_string(covered) + "/200 probes");
    check.note(std::to_string(covered) + "/200 probes covered");
    return check.outcome();
}

// ---------------------------------------------------------------------------
// 6. Image-classification comparison at desk scale (n = 1000, MLP with 100
//    hidden units, one regularization group): over 3 seeds, gbho mean test
//    loss <= 1.05 x the best of grid-100 / random-100 while spending at most
//    20% of their LLO. Real MNIST is used when GBHO_DATA_DIR provides it;
//    otherwise a synthetic IDX fixture with the same format stands in.
Outcome criterion_6() {
    Check check;
    const auto start = std::chrono::steady_clock::now();

    std::string data_dir;
    bool synthetic = false;
    if (const char* env = std::getenv("GBHO_DATA_DIR");
        env && fs::exists(fs::path(env) / "train-images-idx3-ubyte")) {
        data_dir = env;
    } else {
        const fs::path dir = fs::temp_directory_path() / "gbho_synth_idx";
        if (!fs::exists(dir / "train-images-idx3-ubyte")) {
            fs::create_directories(dir);
            testutil::make_synth_idx_dir(dir.string(), 4000, 2000, 99);
        }
        data_dir = dir.string();
        synthetic = true;
    }

    ExperimentConfig config;
    config.problem.type = "mnist_subset";
    config.problem.n = 1000;
    config.problem.hp_count = 1;
    config.data_dir = data_dir;
    config.seeds = {1, 2, 3};
    config.workers = 2;
    config.budget.max_epochs = 40;
    config.budget.batch_size = 64;
    config.budget.learning_rate = 0.05;
    config.budget.momentum = 0.9;

    MethodConfig gbho_method;
    gbho_method.name = "gbho";
    gbho_method.gbho = gbho_preset(1);
    gbho_method.gbho.inner.steps = 200;
    MethodConfig grid_method;
    grid_method.name = "grid";
    grid_method.grid_points_per_dim = 100;
    grid_method.max_llo = 100;
    MethodConfig random_method;
    random_method.name = "random";
    random_method.max_llo = 100;
    config.methods = {gbho_method, grid_method, random_method};

    const fs::path out = fs::temp_directory_path() / "gbho_acceptance_c6";
    fs::remove_all(out);
    config.output_dir = out.string();

    const auto table = run_matrix(config);
    for (const auto& f : table.failures) {
        check.expect(false, f.method + " seed " + std::to_string(f.seed) + ": " + f.message);
    }

    double gbho_tel = 0.0, grid_tel = 0.0, random_tel = 0.0;
    std::uint64_t gbho_llo = 0, grid_llo = 0, random_llo = 0;
    int gbho_n = 0, grid_n = 0, random_n = 0;
    for (const auto& row : table.rows) {
        if (row.method == "gbho") {
            gbho_tel += row.tel;
            gbho_llo = std::max(gbho_llo, row.llo);
            ++gbho_n;
        } else if (row.method == "grid") {
            grid_tel += row.tel;
            grid_llo = std::max(grid_llo, row.llo);
            ++grid_n;
        } else if (row.method == "random") {
            random_tel += row.tel;
            random_llo = std::max(random_llo, row.llo);
            ++random_n;
        }
    }
    check.expect(gbho_n == 3 && grid_n == 3 && random_n == 3, "missing rows in the matrix");
    if (gbho_n == 3 && grid_n == 3 && random_n == 3) {
        gbho_tel /= 3.0;
        grid_tel /= 3.0;
        random_tel /= 3.0;
        const double best_baseline = std::min(grid_tel, random_tel);
        check.expect(gbho_tel <= 1.05 * best_baseline,
                     "gbho mean TEL " + fmt(gbho_tel) + " > 1.05 x best baseline " +
                         fmt(best_baseline));
        check.expect(gbho_llo * 5 <= std::min(grid_llo, random_llo),
                     "gbho llo " + std::to_string(gbho_llo) + " exceeds 20% of " +
                         std::to_string(std::min(grid_llo, random_llo)));
        check.note("TEL gbho " + fmt(gbho_tel) + " vs grid " + fmt(grid_tel) + " / random " +
                   fmt(random_tel) + "; LLO " + std::to_string(gbho_llo) + " vs 100" +
                   (synthetic ? " (synthetic IDX stand-in)" : " (real MNIST)"));
    }
    const double elapsed = seconds_since(start);
    check.expect(elapsed < 1800.0, "runtime " + fmt(elapsed) + "s exceeds 30 min");
    check.note(fmt(elapsed, 4) + "s");
    return check.outcome();
}

// ---------------------------------------------------------------------------
// 7. Baseline oracle equivalence: grid == exhaustive argmin, hyperband rung
//    survivors == sort oracle, EI closed form == numeric integration.
Outcome criterion_7() {
    Check check;

    {
        const AnalyticBilevel inst = synth_quadratic(7);
        baselines::BudgetSpec budget;
        budget.max_llo = 100;
        const auto report = baselines::grid_search(inst.problem, 21, budget);
        const auto grid = initial_design(21, inst.problem.bounds, 1, 0);
        double best_val = std::numeric_limits<double>::infinity();
        double best_lambda = 1.0;
        for (const auto& lambda : grid) {
            const auto sol = solve_lower(lambda, inst.problem.spec, inst.problem.train,
                                         inst.problem.budget);
            const double val = upper_loss(sol.beta, inst.problem.spec, inst.problem.valid);
            if (val < best_val) {
                best_val = val;
                best_lambda = lambda.values(0);
            }
        }
        check.expect(report.lambda_star(0) == best_lambda,
                     "grid argmin " + fmt(report.lambda_star(0)) + " != oracle " +
                         fmt(best_lambda));
    }

    {
        std::mt19937_64 rng(71);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        bool all_equal = true;
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<double> losses(4 + rng() % 30);
            for (auto& v : losses) v = unit(rng) < 0.2 ? 0.5 : unit(rng); // inject ties
            const auto got = baselines::hyperband_survivors(losses, 3.0);
            std::vector<std::size_t> oracle(losses.size());
            std::iota(oracle.begin(), oracle.end(), std::size_t(0));
            std::stable_sort(oracle.begin(), oracle.end(), [&](std::size_t a, std::size_t b) {
                return losses[a] < losses[b];
            });
            oracle.resize(losses.size() / 3);
            std::sort(oracle.begin(), oracle.end());
            all_equal = all_equal && (got == oracle);
        }
        check.expect(all_equal, "hyperband survivors differ from the sort oracle");
    }

    {
        std::mt19937_64 rng(72);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double worst = 0.0;
        for (int probe = 0; probe < 20; ++probe) {
            const double mean = 2.0 * unit(rng) - 1.0;
            const double std = 0.2 + 1.5 * unit(rng);
            const double best = mean + 2.0 * (unit(rng) - 0.3) * std;
            // Simpson integration of max(0, best - y) under N(mean, std^2)
            const double lo = mean - 10.0 * std;
            const double hi = best;
            double integral = 0.0;
            if (hi > lo) {
                const int n = 20000;
                const double h = (hi - lo) / n;
                const auto f = [&](double y) {
                    const double z = (y - mean) / std;
                    return (best - y) * std::exp(-0.5 * z * z) /
                           (std * std::sqrt(2.0 * std::numbers::pi));
                };
                integral = f(lo) + f(hi);
                for (int i = 1; i < n; ++i) {
                    integral += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
                }
                integral *= h / 3.0;
            }
            worst = std::max(
                worst, std::abs(baselines::expected_improvement(mean, std, best) - integral));
        }
        check.expect(worst <= 1e-6, "EI vs quadrature worst gap " + fmt(worst));
        check.note("EI quadrature gap " + fmt(worst, 2));
    }
    return check.outcome();
}

// ---------------------------------------------------------------------------
// 8. Termination semantics: with the surrogate seeded densely (the ridge
//    closed form makes every phi exact), the run converges via C1 & C2
//    within 3 AL rounds.
Outcome criterion_8() {
    Check check;
    const AnalyticBilevel inst = synth_quadratic(8);
    GbhoConfig config;
    config.n_init = 60; // dense even grid -> s_hat below delta near the optimum
    config.n_al = 5;
    config.terminate_early = true;
    // isolate the termination conditions from the multiplier burn-in: with
    // mul0 = 2 the first rounds deliberately overshoot the constraint and
    // the conditions cannot fire until the multiplier has decayed
    config.mul0 = 0.0;
    config.inner.seed = 8;
    config.mle.seed = 8;
    const RunReport report = run(inst.problem, config);
    check.expect(report.termination == "converged",
                 "termination was '" + report.termination + "'");
    check.expect(report.al_iters <= 3,
                 "took " + std::to_string(report.al_iters) + " AL rounds");
    check.note("converged in " + std::to_string(report.al_iters) + " round(s)");
    return check.outcome();
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4},
        {5, criterion_5}, {6, criterion_6}, {7, criterion_7}, {8, criterion_8},
    };
    const char* names[] = {
        "analytic bilevel convergence",
        "LLO budget accounting",
        "kriging interpolation",
        "gradient verification",
        "surrogate band coverage",
        "image-classification comparison",
        "baseline oracle equivalence",
        "termination semantics",
    };

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        selected.push_back(std::atoi(argv[i]));
    }

    int failures = 0;
    for (const auto& [id, fn] : criteria) {
        if (!selected.empty() &&
            std::find(selected.begin(), selected.end(), id) == selected.end()) {
            continue;
        }
        Outcome outcome;
        try {
            outcome = fn();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << id << " ("
                  << names[id - 1] << ")"
                  << (outcome.detail.empty() ? "" : ": " + outcome.detail) << std::endl;
        failures += outcome.pass ? 0 : 1;
    }
    return failures;
}
