#include "gbho/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace gbho {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

int line_of_offset(const std::string& text, std::size_t offset) {
    int line = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file: " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("config parse error at line " +
                         std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
    }
}

template <typename T>
T field_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config field '" + key + "' has the wrong type");
    }
}

TrainBudget parse_budget(const json& j, TrainBudget base) {
    base.max_epochs = field_or(j, "max_epochs", base.max_epochs);
    base.batch_size = field_or(j, "batch_size", base.batch_size);
    base.learning_rate = field_or(j, "learning_rate", base.learning_rate);
    base.momentum = field_or(j, "momentum", base.momentum);
    base.tol_grad = field_or(j, "tol_grad", base.tol_grad);
    return base;
}

MethodConfig parse_method(const json& j, std::size_t index) {
    const std::string where = "methods[" + std::to_string(index) + "]";
    MethodConfig m;
    m.name = field_or<std::string>(j, "name", "");
    if (m.name == "gbho") {
        m.gbho.n_init = field_or(j, "n_init", m.gbho.n_init);
        m.gbho.n_al = field_or(j, "n_al", m.gbho.n_al);
        m.gbho.z = field_or(j, "z", m.gbho.z);
        m.gbho.rho0 = field_or(j, "rho0", m.gbho.rho0);
        m.gbho.mul0 = field_or(j, "mul0", m.gbho.mul0);
        m.gbho.eta = field_or(j, "eta", m.gbho.eta);
        m.gbho.delta = field_or(j, "delta", m.gbho.delta);
        m.gbho.epsilon = field_or(j, "epsilon", m.gbho.epsilon);
        m.gbho.terminate_early = field_or(j, "terminate_early", m.gbho.terminate_early);
        m.gbho.inner.steps = field_or(j, "inner_steps", m.gbho.inner.steps);
        m.gbho.inner.step_size = field_or(j, "inner_step_size", m.gbho.inner.step_size);
        m.gbho.inner.restarts = field_or(j, "inner_restarts", m.gbho.inner.restarts);
    } else if (m.name == "grid") {
        m.grid_points_per_dim = field_or(j, "points_per_dim", m.grid_points_per_dim);
        m.max_llo = field_or<std::uint64_t>(j, "max_llo", 1u << 20);
    } else if (m.name == "random") {
        m.max_llo = field_or<std::uint64_t>(j, "max_llo", 100);
    } else if (m.name == "bayes") {
        m.max_llo = field_or<std::uint64_t>(j, "max_llo", 60);
        m.n_warmup = field_or(j, "n_warmup", 10);
    } else if (m.name == "hyperband") {
        m.hyperband.max_resource = field_or(j, "max_resource", 81);
        m.hyperband.halving_eta = field_or(j, "halving_eta", 3.0);
        const std::string mode = field_or<std::string>(j, "counting", "runs");
        if (mode == "runs") {
            m.hyperband.counting = baselines::LloCountingMode::runs;
        } else if (mode == "budget_normalized") {
            m.hyperband.counting = baselines::LloCountingMode::budget_normalized;
        } else {
            throw ValidationError(where + ".counting: unknown mode '" + mode + "'");
        }
    } else {
        throw ValidationError(where + ".name: unknown method '" + m.name + "'");
    }
    return m;
}

std::string cell_path(const std::string& output_dir, const std::string& problem,
                      const std::string& method, std::uint64_t seed) {
    return output_dir + "/" + problem + "__" + method + "__seed" + std::to_string(seed) + ".json";
}

json report_to_json(const RunReport& r, const std::string& problem, std::uint64_t seed) {
    json j;
    j["schema_version"] = 1;
    j["problem"] = problem;
    j["seed"] = seed;
    j["method"] = r.method;
    j["lambda_star"] = std::vector<double>(r.lambda_star.begin(), r.lambda_star.end());
    j["beta_star"] = std::vector<double>(r.beta_star.begin(), r.beta_star.end());
    j["train_loss"] = r.train_loss;
    j["valid_loss"] = r.valid_loss;
    j["test_loss"] = r.test_loss;
    j["llo_count"] = r.llo_count;
    j["al_iters"] = r.al_iters;
    j["termination"] = r.termination;
    json hist = json::array();
    for (const auto& row : r.history) {
        json h;
        h["lambda"] = std::vector<double>(row.lambda.begin(), row.lambda.end());
        h["upper"] = row.upper;
        h["residual"] = row.residual;
        h["surrogate_std"] = row.surrogate_std;
        hist.push_back(std::move(h));
    }
    j["history"] = std::move(hist);
    return j;
}

double json_double(const json& j) {
    // nlohmann serializes NaN as null
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

Eigen::VectorXd json_vector(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = json_double(j[i]);
    }
    return v;
}

} // namespace

ExperimentConfig parse_config(const std::string& path) {
    const json j = load_json(path);
    ExperimentConfig config;

    if (j.contains("problem")) {
        const json& p = j.at("problem");
        config.problem.type = field_or<std::string>(p, "type", "analytic");
        config.problem.n = field_or<Eigen::Index>(p, "n", 1000);
        config.problem.hp_count = field_or(p, "hp_count", 1);
        config.problem.lambda_low = field_or(p, "lambda_low", -10.0);
        config.problem.lambda_high = field_or(p, "lambda_high", 0.0);
    }
    if (config.problem.type != "analytic" && config.problem.type != "mnist_subset") {
        throw ValidationError("problem.type: unknown problem '" + config.problem.type + "'");
    }
    if (config.problem.type == "analytic" && config.problem.hp_count != 1) {
        throw ValidationError(
            "problem.hp_count: the analytic instance has a single regularization group");
    }
    if (config.problem.type == "mnist_subset" &&
        (config.problem.hp_count != 1 && config.problem.hp_count != 2)) {
        throw ValidationError("problem.hp_count: mnist_subset supports 1 or 2");
    }
    if (!(config.problem.lambda_low < config.problem.lambda_high)) {
        throw ValidationError("problem.lambda_low: bounds must satisfy low < high");
    }

    if (!j.contains("methods") || !j.at("methods").is_array() || j.at("methods").empty()) {
        throw ValidationError("methods: need a non-empty method list");
    }
    for (std::size_t i = 0; i < j.at("methods").size(); ++i) {
        config.methods.push_back(parse_method(j.at("methods")[i], i));
    }

    config.seeds = field_or<std::vector<std::uint64_t>>(j, "seeds", {1});
    if (config.seeds.empty()) {
        throw ValidationError("seeds: need at least one seed");
    }
    config.output_dir = field_or<std::string>(j, "output_dir", "out");
    config.data_dir = field_or<std::string>(j, "data_dir", "");
    config.workers = field_or(j, "workers", 1);
    if (j.contains("budget")) {
        config.budget = parse_budget(j.at("budget"), config.budget);
    }
    return config;
}

Problem build_problem(const ExperimentConfig& config, std::uint64_t seed) {
    Problem problem;
    if (config.problem.type == "analytic") {
        problem = synth_quadratic(seed).problem;
    } else {
        std::string dir = config.data_dir;
        if (dir.empty()) {
            const char* env = std::getenv("GBHO_DATA_DIR");
            dir = env ? env : "";
        }
        if (dir.empty()) {
            throw ValidationError(
                "data_dir: mnist_subset needs data_dir or the GBHO_DATA_DIR environment variable");
        }
        problem = make_idx_problem(dir, config.problem.n, config.problem.hp_count, seed);
    }
    problem.bounds = Box::cube(config.problem.hp_count, config.problem.lambda_low,
                               config.problem.lambda_high);
    problem.budget = config.budget;
    problem.budget.seed = seed + 1; // weight init
    return problem;
}

RunReport run_method(const MethodConfig& method, const Problem& problem, std::uint64_t seed) {
    const std::uint64_t search_seed = seed + 2;
    if (method.name == "gbho") {
        GbhoConfig config = method.gbho;
        config.inner.seed = search_seed;
        config.mle.seed = search_seed;
        return run(problem, config);
    }
    baselines::BudgetSpec budget;
    budget.per_eval = problem.budget;
    budget.seed = search_seed;
    budget.max_llo = method.max_llo;
    if (method.name == "grid") {
        return baselines::grid_search(problem, method.grid_points_per_dim, budget);
    }
    if (method.name == "random") {
        return baselines::random_search(problem, budget);
    }
    if (method.name == "bayes") {
        return baselines::bayes_opt(problem, budget, method.n_warmup);
    }
    if (method.name == "hyperband") {
        return baselines::hyperband(problem, method.hyperband, budget);
    }
    throw ValidationError("run_method: unknown method '" + method.name + "'");
}

void write_report_file(const RunReport& report, const std::string& problem, std::uint64_t seed,
                       const std::string& path) {
    const fs::path target(path);
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    static std::atomic<unsigned> counter{0};
    const fs::path tmp = target.parent_path() /
                         (target.filename().string() + ".tmp" + std::to_string(counter++));
    {
        std::ofstream out(tmp);
        if (!out) {
            throw IoError("cannot write report file: " + tmp.string());
        }
        out << report_to_json(report, problem, seed).dump(2) << '\n';
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        throw IoError("cannot rename report into place: " + target.string());
    }
}

RunReport read_report_file(const std::string& path, std::string* problem, std::uint64_t* seed) {
    const json j = load_json(path);
    RunReport r;
    r.method = j.at("method").get<std::string>();
    r.lambda_star = json_vector(j.at("lambda_star"));
    r.beta_star = json_vector(j.at("beta_star"));
    r.train_loss = json_double(j.at("train_loss"));
    r.valid_loss = json_double(j.at("valid_loss"));
    r.test_loss = json_double(j.at("test_loss"));
    r.llo_count = j.at("llo_count").get<std::uint64_t>();
    r.al_iters = j.at("al_iters").get<int>();
    r.termination = j.at("termination").get<std::string>();
    for (const auto& h : j.at("history")) {
        HistoryRow row;
        row.lambda = json_vector(h.at("lambda"));
        row.upper = json_double(h.at("upper"));
        row.residual = json_double(h.at("residual"));
        row.surrogate_std = json_double(h.at("surrogate_std"));
        r.history.push_back(std::move(row));
    }
    if (problem) *problem = j.at("problem").get<std::string>();
    if (seed) *seed = j.at("seed").get<std::uint64_t>();
    return r;
}

ComparisonTable run_matrix(const ExperimentConfig& config, const RunMatrixOptions& options) {
    struct Cell {
        MethodConfig method;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (const auto& method : config.methods) {
        for (const std::uint64_t seed : config.seeds) {
            cells.push_back({method, seed + options.seed_offset});
        }
    }

    ComparisonTable table;
    std::mutex mutex;
    std::atomic<std::size_t> next{0};
    const int workers = std::max(1, options.workers > 0 ? options.workers : config.workers);

    const auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            const Cell& cell = cells[i];
            try {
                Problem problem = build_problem(config, cell.seed);
                const std::string path =
                    cell_path(config.output_dir, problem.name, cell.method.name, cell.seed);
                RunReport report;
                if (!options.force && fs::exists(path)) {
                    report = read_report_file(path);
                } else {
                    report = run_method(cell.method, problem, cell.seed);
                    write_report_file(report, problem.name, cell.seed, path);
                }
                ComparisonRow row;
                row.method = report.method;
                row.problem = problem.name;
                row.seed = cell.seed;
                row.trl = report.train_loss;
                row.val = report.valid_loss;
                row.tel = report.test_loss;
                row.lambda = report.lambda_star;
                row.llo = report.llo_count;
                std::scoped_lock lock(mutex);
                table.rows.push_back(std::move(row));
            } catch (const std::exception& e) {
                std::scoped_lock lock(mutex);
                table.failures.push_back({cell.method.name, cell.seed, e.what()});
            }
        }
    };

    if (workers <= 1 || cells.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < std::min<std::size_t>(workers, cells.size()); ++w) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) t.join();
    }

    // deterministic ordering regardless of worker interleaving
    std::sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
        return std::tie(a.method, a.problem, a.seed) < std::tie(b.method, b.problem, b.seed);
    });
    return table;
}

ComparisonTable collect_table(const std::string& dir) {
    ComparisonTable table;
    if (!fs::is_directory(dir)) {
        throw IoError("not a directory: " + dir);
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        std::string problem;
        std::uint64_t seed = 0;
        RunReport report;
        try {
            report = read_report_file(entry.path().string(), &problem, &seed);
        } catch (const json::exception&) {
            continue; // not a report file
        } catch (const Error&) {
            continue;
        }
        ComparisonRow row;
        row.method = report.method;
        row.problem = problem;
        row.seed = seed;
        row.trl = report.train_loss;
        row.val = report.valid_loss;
        row.tel = report.test_loss;
        row.lambda = report.lambda_star;
        row.llo = report.llo_count;
        table.rows.push_back(std::move(row));
    }
    std::sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
        return std::tie(a.method, a.problem, a.seed) < std::tie(b.method, b.problem, b.seed);
    });
    return table;
}

std::string format_table(const ComparisonTable& table) {
    std::ostringstream out;
    out << "method      problem              seed  TRL         VAL         TEL         LLO    lambda\n";
    for (const auto& row : table.rows) {
        char line[256];
        std::snprintf(line, sizeof(line), "%-11s %-20s %-5llu %-11.4g %-11.4g %-11.4g %-6llu ",
                      row.method.c_str(), row.problem.c_str(),
                      static_cast<unsigned long long>(row.seed), row.trl, row.val, row.tel,
                      static_cast<unsigned long long>(row.llo));
        out << line << "[";
        for (Eigen::Index k = 0; k < row.lambda.size(); ++k) {
            if (k) out << ", ";
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3f", row.lambda(k));
            out << buf;
        }
        out << "]\n";
    }
    for (const auto& f : table.failures) {
        out << "FAILED " << f.method << " seed " << f.seed << ": " << f.message << "\n";
    }
    return out.str();
}

void emit_plots(const ComparisonTable& table, const std::string& out_dir,
                const std::vector<std::string>& method_filter) {
    std::vector<const ComparisonRow*> rows;
    for (const auto& row : table.rows) {
        if (method_filter.empty() ||
            std::find(method_filter.begin(), method_filter.end(), row.method) !=
                method_filter.end()) {
            rows.push_back(&row);
        }
    }
    if (rows.empty()) {
        throw ValidationError("emit_plots: no rows selected");
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);

    // per-cell scatter: computational cost against generalization
    {
        std::ofstream out(out_dir + "/llo_vs_test_loss.csv");
        if (!out) throw IoError("cannot write " + out_dir + "/llo_vs_test_loss.csv");
        out << "method,problem,seed,llo,test_loss\n";
        for (const auto* row : rows) {
            out << row->method << ',' << row->problem << ',' << row->seed << ',' << row->llo << ','
                << format_double(row->tel) << '\n';
        }
    }

    // per-method mean test loss
    {
        std::map<std::string, std::pair<double, int>> agg;
        for (const auto* row : rows) {
            auto& [sum, count] = agg[row->method];
            sum += row->tel;
            count += 1;
        }
        std::ofstream out(out_dir + "/bar_test_loss.csv");
        if (!out) throw IoError("cannot write " + out_dir + "/bar_test_loss.csv");
        out << "method,mean_test_loss,cells\n";
        for (const auto& [method, acc] : agg) {
            out << method << ',' << format_double(acc.first / acc.second) << ',' << acc.second
                << '\n';
        }
    }
}

} // namespace gbho
