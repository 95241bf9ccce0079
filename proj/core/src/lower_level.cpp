#include "gbho/lower_level.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gbho/linalg.hpp"

namespace gbho {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_spec(const ModelSpec& spec) {
    if (spec.input_dim <= 0) {
        throw ValidationError("ModelSpec: input_dim must be positive");
    }
    if (spec.arch == Arch::mlp && spec.hidden <= 0) {
        throw ValidationError("ModelSpec: mlp hidden size must be positive");
    }
    if ((spec.arch == Arch::logistic || spec.arch == Arch::mlp) && spec.classes < 2) {
        throw ValidationError("ModelSpec: classifier needs at least 2 classes");
    }
    if (spec.arch == Arch::ridge && spec.loss != LossKind::squared_error) {
        throw ValidationError("ModelSpec: ridge uses squared_error");
    }
    if (spec.arch != Arch::ridge && spec.loss != LossKind::cross_entropy) {
        throw ValidationError("ModelSpec: classifiers use cross_entropy");
    }
    if (static_cast<Index>(spec.reg_groups.group_of.size()) != param_count(spec)) {
        throw ValidationError("ModelSpec: reg_groups does not cover the parameter vector");
    }
}

void check_shapes(const HyperPoint& lambda, const ParamVector& beta, const ModelSpec& spec,
                  const LabeledSet& data) {
    if (lambda.dims() != spec.reg_groups.group_count) {
        throw DimensionMismatch("lambda dimension does not match group count");
    }
    if (beta.size() != param_count(spec)) {
        throw DimensionMismatch("beta length does not match the model spec");
    }
    if (data.dim() != spec.input_dim) {
        throw DimensionMismatch("data feature dimension does not match the model spec");
    }
}

RegGroups contiguous_groups(Index m, int hp_count) {
    RegGroups g;
    g.group_count = hp_count;
    g.group_of.resize(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) {
        g.group_of[static_cast<std::size_t>(j)] =
            std::min<int>(hp_count - 1, static_cast<int>(j * hp_count / m));
    }
    return g;
}

// Parameter layout views. mlp: [W1 (H x d), b1 (H), W2 (C x H), b2 (C)];
// logistic: [W (C x d), b (C)]; ridge: [beta (d)].
struct MlpView {
    Eigen::Map<const MatrixXd> w1, w2;
    Eigen::Map<const VectorXd> b1, b2;
};

MlpView mlp_view(const ParamVector& beta, const ModelSpec& s) {
    const double* p = beta.data();
    const Index hd = Index(s.hidden) * s.input_dim;
    const Index ch = Index(s.classes) * s.hidden;
    return MlpView{
        {p, s.hidden, s.input_dim},
        {p + hd + s.hidden, s.classes, s.hidden},
        {p + hd, s.hidden},
        {p + hd + s.hidden + ch, s.classes},
    };
}

// Cross-entropy of logits against integer labels; optionally writes
// d(mean loss)/d(logits) = (softmax - onehot)/N into *grad.
double cross_entropy(const MatrixXd& logits, const VectorXd& labels, MatrixXd* grad) {
    const Index n = logits.rows();
    double total = 0.0;
    if (grad) grad->resize(logits.rows(), logits.cols());
    for (Index i = 0; i < n; ++i) {
        const auto row = logits.row(i);
        const double zmax = row.maxCoeff();
        const double lse = zmax + std::log((row.array() - zmax).exp().sum());
        total += lse - row(static_cast<Index>(labels(i)));
        if (grad) {
            grad->row(i) = (row.array() - lse).exp();
            (*grad)(i, static_cast<Index>(labels(i))) -= 1.0;
        }
    }
    if (grad) *grad /= double(n);
    return total / double(n);
}

// Mean loss over the rows of `data` listed in `rows` (all rows when empty),
// plus gradient w.r.t. beta when grad != nullptr.
double data_loss(const ParamVector& beta, const ModelSpec& spec, const MatrixXd& x,
                 const VectorXd& y, VectorXd* grad) {
    const Index n = x.rows();
    if (n == 0) {
        throw InsufficientData("model loss: empty data set");
    }
    if (grad) grad->setZero(beta.size());

    switch (spec.arch) {
    case Arch::ridge: {
        const VectorXd resid = x * beta - y;
        if (grad) *grad = 2.0 / double(n) * (x.transpose() * resid);
        return resid.squaredNorm() / double(n);
    }
    case Arch::logistic: {
        Eigen::Map<const MatrixXd> w(beta.data(), spec.classes, spec.input_dim);
        Eigen::Map<const VectorXd> b(beta.data() + Index(spec.classes) * spec.input_dim,
                                     spec.classes);
        MatrixXd logits = x * w.transpose();
        logits.rowwise() += b.transpose();
        MatrixXd g;
        const double loss = cross_entropy(logits, y, grad ? &g : nullptr);
        if (grad) {
            Eigen::Map<MatrixXd> gw(grad->data(), spec.classes, spec.input_dim);
            Eigen::Map<VectorXd> gb(grad->data() + Index(spec.classes) * spec.input_dim,
                                    spec.classes);
            gw = g.transpose() * x;
            gb = g.colwise().sum();
        }
        return loss;
    }
    case Arch::mlp: {
        const MlpView v = mlp_view(beta, spec);
        MatrixXd act = x * v.w1.transpose();
        act.rowwise() += v.b1.transpose();
        const MatrixXd hidden = act.array().tanh();
        MatrixXd logits = hidden * v.w2.transpose();
        logits.rowwise() += v.b2.transpose();
        MatrixXd g;
        const double loss = cross_entropy(logits, y, grad ? &g : nullptr);
        if (grad) {
            const Index hd = Index(spec.hidden) * spec.input_dim;
            const Index ch = Index(spec.classes) * spec.hidden;
            Eigen::Map<MatrixXd> gw1(grad->data(), spec.hidden, spec.input_dim);
            Eigen::Map<VectorXd> gb1(grad->data() + hd, spec.hidden);
            Eigen::Map<MatrixXd> gw2(grad->data() + hd + spec.hidden, spec.classes, spec.hidden);
            Eigen::Map<VectorXd> gb2(grad->data() + hd + spec.hidden + ch, spec.classes);
            gw2 = g.transpose() * hidden;
            gb2 = g.colwise().sum();
            const MatrixXd gh =
                (g * v.w2).cwiseProduct((1.0 - hidden.array().square()).matrix());
            gw1 = gh.transpose() * x;
            gb1 = gh.colwise().sum();
        }
        return loss;
    }
    }
    throw ValidationError("unknown model arch");
}

// Adds the penalty gradient in place and returns the penalty value.
double penalty_with_grad(const HyperPoint& lambda, const ParamVector& beta,
                         const RegGroups& groups, VectorXd* grad_beta, VectorXd* grad_lambda) {
    VectorXd coeff = lambda.values.array().exp();
    VectorXd sq = VectorXd::Zero(groups.group_count);
    for (Index j = 0; j < beta.size(); ++j) {
        sq(groups.group_of[static_cast<std::size_t>(j)]) += beta(j) * beta(j);
    }
    if (grad_beta) {
        for (Index j = 0; j < beta.size(); ++j) {
            (*grad_beta)(j) += 2.0 * coeff(groups.group_of[static_cast<std::size_t>(j)]) * beta(j);
        }
    }
    if (grad_lambda) *grad_lambda = coeff.cwiseProduct(sq);
    return coeff.dot(sq);
}

VectorXd init_params(const ModelSpec& spec, std::uint64_t seed) {
    VectorXd beta = VectorXd::Zero(param_count(spec));
    std::mt19937_64 rng(seed);
    auto fill_uniform = [&rng](double* p, Index count, int fan_in, int fan_out) {
        const double a = std::sqrt(6.0 / double(fan_in + fan_out));
        std::uniform_real_distribution<double> u(-a, a);
        for (Index i = 0; i < count; ++i) p[i] = u(rng);
    };
    switch (spec.arch) {
    case Arch::ridge:
        break; // closed form, start irrelevant
    case Arch::logistic:
        fill_uniform(beta.data(), Index(spec.classes) * spec.input_dim, spec.input_dim,
                     spec.classes);
        break;
    case Arch::mlp: {
        const Index hd = Index(spec.hidden) * spec.input_dim;
        const Index ch = Index(spec.classes) * spec.hidden;
        fill_uniform(beta.data(), hd, spec.input_dim, spec.hidden);
        fill_uniform(beta.data() + hd + spec.hidden, ch, spec.hidden, spec.classes);
        break;
    }
    }
    return beta;
}

LowerSolution solve_ridge(const HyperPoint& lambda, const ModelSpec& spec,
                          const LabeledSet& train) {
    const Index n = train.size();
    const MatrixXd& x = train.features;
    MatrixXd a = x.transpose() * x / double(n);
    for (Index j = 0; j < a.rows(); ++j) {
        a(j, j) += std::exp(lambda.values(spec.reg_groups.group_of[static_cast<std::size_t>(j)]));
    }
    const VectorXd rhs = x.transpose() * train.labels / double(n);
    const auto factor = linalg::robust_cholesky(a);
    LowerSolution sol;
    sol.beta = linalg::solve_spd(factor, rhs);
    sol.phi = lower_loss(lambda, sol.beta, spec, train);
    return sol;
}

LowerSolution solve_sgd(const HyperPoint& lambda, const ModelSpec& spec, const LabeledSet& train,
                        const TrainBudget& budget) {
    const Index n = train.size();
    const Index batch = budget.batch_size <= 0
                            ? n
                            : std::min<Index>(n, budget.batch_size);
    VectorXd beta = init_params(spec, budget.seed);
    VectorXd velocity = VectorXd::Zero(beta.size());
    VectorXd grad(beta.size());

    std::mt19937_64 rng(budget.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index(0));

    MatrixXd xb(batch, train.dim());
    VectorXd yb(batch);

    for (int epoch = 0; epoch < budget.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (Index start = 0; start < n; start += batch) {
            const Index b = std::min<Index>(batch, n - start);
            for (Index i = 0; i < b; ++i) {
                xb.row(i) = train.features.row(order[static_cast<std::size_t>(start + i)]);
                yb(i) = train.labels(order[static_cast<std::size_t>(start + i)]);
            }
            const double loss =
                data_loss(beta, spec, xb.topRows(b), yb.head(b), &grad);
            penalty_with_grad(lambda, beta, spec.reg_groups, &grad, nullptr);
            if (!std::isfinite(loss)) {
                throw Diverged("solve_lower: non-finite training loss");
            }
            velocity = budget.momentum * velocity - budget.learning_rate * grad;
            beta += velocity;
        }
        // stop once the full-batch objective gradient is flat
        data_loss(beta, spec, train.features, train.labels, &grad);
        penalty_with_grad(lambda, beta, spec.reg_groups, &grad, nullptr);
        const double gnorm = grad.norm();
        if (!std::isfinite(gnorm)) {
            throw Diverged("solve_lower: non-finite gradient");
        }
        if (gnorm <= budget.tol_grad) {
            break;
        }
    }

    LowerSolution sol;
    sol.beta = std::move(beta);
    sol.phi = lower_loss(lambda, sol.beta, spec, train);
    if (!std::isfinite(sol.phi)) {
        throw Diverged("solve_lower: non-finite objective at the returned parameters");
    }
    return sol;
}

} // namespace

Eigen::Index param_count(const ModelSpec& spec) {
    switch (spec.arch) {
    case Arch::ridge:
        return spec.input_dim;
    case Arch::logistic:
        return Index(spec.classes) * spec.input_dim + spec.classes;
    case Arch::mlp:
        return Index(spec.hidden) * spec.input_dim + spec.hidden +
               Index(spec.classes) * spec.hidden + spec.classes;
    }
    throw ValidationError("unknown model arch");
}

ModelSpec make_ridge_spec(int input_dim, int hp_count) {
    if (hp_count < 1 || hp_count > input_dim) {
        throw ValidationError("make_ridge_spec: hp_count must be in [1, input_dim]");
    }
    ModelSpec spec;
    spec.arch = Arch::ridge;
    spec.input_dim = input_dim;
    spec.loss = LossKind::squared_error;
    spec.reg_groups = contiguous_groups(input_dim, hp_count);
    check_spec(spec);
    return spec;
}

ModelSpec make_logistic_spec(int input_dim, int classes) {
    ModelSpec spec;
    spec.arch = Arch::logistic;
    spec.input_dim = input_dim;
    spec.classes = classes;
    spec.loss = LossKind::cross_entropy;
    spec.reg_groups = contiguous_groups(param_count(spec), 1);
    check_spec(spec);
    return spec;
}

ModelSpec make_mlp_spec(int input_dim, int hidden, int classes, int hp_count) {
    if (hp_count != 1 && hp_count != 2) {
        throw ValidationError("make_mlp_spec: hp_count must be 1 or 2");
    }
    ModelSpec spec;
    spec.arch = Arch::mlp;
    spec.input_dim = input_dim;
    spec.hidden = hidden;
    spec.classes = classes;
    spec.loss = LossKind::cross_entropy;
    const Index m = param_count(spec);
    if (hp_count == 1) {
        spec.reg_groups = contiguous_groups(m, 1);
    } else {
        // group 0: hidden layer (W1, b1); group 1: output layer (W2, b2)
        spec.reg_groups.group_count = 2;
        spec.reg_groups.group_of.assign(static_cast<std::size_t>(m), 1);
        const Index layer1 = Index(hidden) * input_dim + hidden;
        std::fill_n(spec.reg_groups.group_of.begin(), layer1, 0);
    }
    check_spec(spec);
    return spec;
}

LloCounter& global_llo_counter() {
    static LloCounter counter;
    return counter;
}

double penalty(const HyperPoint& lambda, const ParamVector& beta, const RegGroups& groups) {
    if (lambda.dims() != groups.group_count) {
        throw DimensionMismatch("penalty: lambda dimension does not match group count");
    }
    for (int g : groups.group_of) {
        if (g < 0 || g >= groups.group_count) {
            throw ValidationError("penalty: group index out of range");
        }
    }
    return penalty_with_grad(lambda, beta, groups, nullptr, nullptr);
}

double lower_loss(const HyperPoint& lambda, const ParamVector& beta, const ModelSpec& spec,
                  const LabeledSet& data) {
    check_spec(spec);
    check_shapes(lambda, beta, spec, data);
    return data_loss(beta, spec, data.features, data.labels, nullptr) +
           penalty_with_grad(lambda, beta, spec.reg_groups, nullptr, nullptr);
}

LowerGrad lower_grad(const HyperPoint& lambda, const ParamVector& beta, const ModelSpec& spec,
                     const LabeledSet& data) {
    LowerGrad g;
    lower_loss_grad(lambda, beta, spec, data, &g);
    return g;
}

double lower_loss_grad(const HyperPoint& lambda, const ParamVector& beta, const ModelSpec& spec,
                       const LabeledSet& data, LowerGrad* grad) {
    check_spec(spec);
    check_shapes(lambda, beta, spec, data);
    double value = data_loss(beta, spec, data.features, data.labels, grad ? &grad->beta : nullptr);
    value += penalty_with_grad(lambda, beta, spec.reg_groups, grad ? &grad->beta : nullptr,
                               grad ? &grad->lambda : nullptr);
    return value;
}

double upper_loss(const ParamVector& beta, const ModelSpec& spec, const LabeledSet& data) {
    check_spec(spec);
    if (beta.size() != param_count(spec) || data.dim() != spec.input_dim) {
        throw DimensionMismatch("upper_loss: inconsistent shapes");
    }
    return data_loss(beta, spec, data.features, data.labels, nullptr);
}

Eigen::VectorXd upper_grad(const ParamVector& beta, const ModelSpec& spec,
                           const LabeledSet& data) {
    VectorXd grad;
    upper_loss_grad(beta, spec, data, &grad);
    return grad;
}

double upper_loss_grad(const ParamVector& beta, const ModelSpec& spec, const LabeledSet& data,
                       Eigen::VectorXd* grad) {
    check_spec(spec);
    if (beta.size() != param_count(spec) || data.dim() != spec.input_dim) {
        throw DimensionMismatch("upper_grad: inconsistent shapes");
    }
    return data_loss(beta, spec, data.features, data.labels, grad);
}

LowerSolution solve_lower(const HyperPoint& lambda, const ModelSpec& spec,
                          const LabeledSet& train, const TrainBudget& budget,
                          LloCounter* run_counter) {
    check_spec(spec);
    if (lambda.dims() != spec.reg_groups.group_count) {
        throw DimensionMismatch("solve_lower: lambda dimension does not match group count");
    }
    if (train.dim() != spec.input_dim) {
        throw DimensionMismatch("solve_lower: feature dimension does not match the model spec");
    }
    if (budget.max_epochs < 1) {
        throw ValidationError("solve_lower: max_epochs must be at least 1");
    }

    LowerSolution sol = spec.arch == Arch::ridge ? solve_ridge(lambda, spec, train)
                                                 : solve_sgd(lambda, spec, train, budget);
    global_llo_counter().add();
    if (run_counter) run_counter->add();
    return sol;
}

} // namespace gbho
