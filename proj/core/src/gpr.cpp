#include "gbho/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

namespace gbho::gpr {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kDegeneratePhiRange = 1e-12;

MatrixXd correlation_matrix(const ValueSample& sample, const VectorXd& ls) {
    const auto s = static_cast<Index>(sample.size());
    MatrixXd r(s, s);
    for (Index i = 0; i < s; ++i) {
        r(i, i) = 1.0;
        for (Index j = 0; j < i; ++j) {
            r(i, j) = r(j, i) =
                kernel(sample.points[std::size_t(i)].lambda, sample.points[std::size_t(j)].lambda, ls);
        }
    }
    return r;
}

// Cholesky of R + jitter I, escalating from `nugget` when the correlation
// matrix is numerically singular (near-duplicate sample points).
linalg::CholeskyFactor factor_correlation(const MatrixXd& r, double nugget) {
    double jitter = std::max(nugget, 0.0);
    for (;;) {
        try {
            return linalg::cholesky(r, jitter);
        } catch (const NotPositiveDefinite&) {
            jitter = std::max(jitter * 10.0, 1e-12);
            if (jitter > 1e-4) throw;
        }
    }
}

struct ProfileFit {
    double mu = 0.0;
    double sigma2 = 0.0;
    double log_likelihood = -std::numeric_limits<double>::infinity();
    linalg::CholeskyFactor factor;
    VectorXd alpha;
    VectorXd rinv_one;
    double one_rinv_one = 0.0;
};

// Profile MLE at fixed length scales: mu and sigma2 have closed forms, so
// the likelihood is concentrated onto the length scales only.
ProfileFit profile_fit(const ValueSample& sample, const VectorXd& ls, double nugget) {
    const auto s = static_cast<Index>(sample.size());
    ProfileFit fit;
    fit.factor = factor_correlation(correlation_matrix(sample, ls), nugget);
    const VectorXd y = sample.values();
    const VectorXd ones = VectorXd::Ones(s);
    fit.rinv_one = linalg::solve_spd(fit.factor, ones);
    fit.one_rinv_one = fit.rinv_one.sum();
    fit.mu = fit.rinv_one.dot(y) / fit.one_rinv_one;
    const VectorXd resid = y.array() - fit.mu;
    fit.alpha = linalg::solve_spd(fit.factor, resid);
    fit.sigma2 = resid.dot(fit.alpha) / double(s);
    if (fit.sigma2 > 0.0 && std::isfinite(fit.sigma2)) {
        fit.log_likelihood = -0.5 * (double(s) * std::log(2.0 * std::numbers::pi * fit.sigma2) +
                                     linalg::log_det(fit.factor) + double(s));
    }
    return fit;
}

double golden_section_max(double lo, double hi, const std::function<double(double)>& f) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > 1e-3) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

// The likelihood along one log length-scale coordinate is often bimodal
// (data-fitting mode vs smoothing mode), so bracket the best region with a
// coarse scan before the golden-section refinement.
double scan_then_refine_max(double lo, double hi, const std::function<double(double)>& f) {
    constexpr int kScanPoints = 25;
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < kScanPoints; ++i) {
        const double x = lo + (hi - lo) * i / (kScanPoints - 1);
        const double v = f(x);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    const double step = (hi - lo) / (kScanPoints - 1);
    const double a = std::max(lo, lo + (best - 1) * step);
    const double b = std::min(hi, lo + (best + 1) * step);
    const double refined = golden_section_max(a, b, f);
    return f(refined) >= best_val ? refined : lo + best * step;
}

void check_in_bounds(const GprModel& model, const HyperPoint& lambda) {
    if (lambda.dims() != model.bounds.dims()) {
        throw DimensionMismatch("gpr: lambda dimension does not match the model");
    }
    if (!model.bounds.contains(lambda.values, 1e-9 * (1.0 + model.bounds.diagonal()))) {
        throw OutOfBounds("gpr: lambda outside the sample box");
    }
}

VectorXd correlations_to(const GprModel& model, const HyperPoint& lambda) {
    const auto s = static_cast<Index>(model.sample.size());
    VectorXd r(s);
    for (Index i = 0; i < s; ++i) {
        r(i) = kernel(lambda, model.sample.points[std::size_t(i)].lambda, model.length_scales);
    }
    return r;
}

} // namespace

Eigen::VectorXd ValueSample::values() const {
    VectorXd y(static_cast<Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        y(static_cast<Index>(i)) = points[i].phi;
    }
    return y;
}

double kernel(const HyperPoint& a, const HyperPoint& b, const Eigen::VectorXd& length_scales) {
    if (a.dims() != b.dims() || a.dims() != length_scales.size()) {
        throw DimensionMismatch("kernel: dimension mismatch");
    }
    const double d2 = ((a.values - b.values).array() / length_scales.array()).square().sum();
    return std::exp(-0.5 * d2);
}

double log_likelihood(const ValueSample& sample, double mu, double sigma2,
                      const Eigen::VectorXd& length_scales, double nugget) {
    if (sigma2 <= 0.0) {
        throw ValidationError("log_likelihood: sigma2 must be positive");
    }
    const auto s = static_cast<Index>(sample.size());
    const auto factor = linalg::cholesky(correlation_matrix(sample, length_scales), nugget);
    const VectorXd resid = sample.values().array() - mu;
    const double quad = resid.dot(linalg::solve_spd(factor, resid));
    return -0.5 * (double(s) * std::log(2.0 * std::numbers::pi * sigma2) +
                   linalg::log_det(factor) + quad / sigma2);
}

GprModel mle_fit(const ValueSample& sample, const MleConfig& config,
                 const Eigen::VectorXd* warm_start_ls) {
    if (sample.size() < 2) {
        throw InsufficientData("mle_fit: need at least 2 sample points");
    }
    const int n = sample.dims();
    for (const auto& p : sample.points) {
        if (p.lambda.dims() != n) {
            throw DimensionMismatch("mle_fit: inconsistent sample dimensions");
        }
    }

    GprModel model;
    model.sample = sample;
    model.bounds = sample.points.front().lambda.bounds;
    model.dedup_radius = 1e-6 * model.bounds.diagonal();
    model.config = config;

    const VectorXd y = sample.values();
    if (y.maxCoeff() - y.minCoeff() < kDegeneratePhiRange) {
        model.degenerate = true;
        model.mu = y(0);
        model.sigma2 = 0.0;
        model.length_scales = model.bounds.range().cwiseMax(1.0);
        return model;
    }

    // Per-dimension log length-scale bounds relative to the box range. The
    // lower bound additionally adapts to the sample density: interpolating
    // points much closer than the configured floor needs length scales short
    // enough to decorrelate them, otherwise the correlation matrix demands
    // jitter far above the nugget.
    VectorXd lo(n), hi(n);
    for (int k = 0; k < n; ++k) {
        const double range = std::max(model.bounds.range()(k), 1e-9);
        double floor_k = range * std::exp(config.log_ls_bounds.first);
        std::vector<double> coords;
        coords.reserve(sample.size());
        for (const auto& p : sample.points) coords.push_back(p.lambda.values(k));
        std::sort(coords.begin(), coords.end());
        double min_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < coords.size(); ++i) {
            const double gap = coords[i] - coords[i - 1];
            if (gap > 1e-12) min_gap = std::min(min_gap, gap);
        }
        if (std::isfinite(min_gap)) {
            floor_k = std::min(floor_k, 0.1 * min_gap);
        }
        lo(k) = std::log(std::max(floor_k, 1e-8));
        hi(k) = std::log(range) + config.log_ls_bounds.second;
    }

    std::mt19937_64 rng(config.seed);
    std::vector<VectorXd> starts;
    if (warm_start_ls && warm_start_ls->size() == n) {
        starts.push_back(warm_start_ls->array().log().matrix().cwiseMax(lo).cwiseMin(hi));
    }
    starts.push_back(0.5 * (lo + hi));
    while (static_cast<int>(starts.size()) < std::max(config.restarts, 1)) {
        VectorXd log_ls(n);
        for (int k = 0; k < n; ++k) {
            log_ls(k) = std::uniform_real_distribution<double>(lo(k), hi(k))(rng);
        }
        starts.push_back(std::move(log_ls));
    }

    const auto objective = [&](const VectorXd& log_ls) {
        try {
            return profile_fit(sample, log_ls.array().exp(), config.nugget).log_likelihood;
        } catch (const NotPositiveDefinite&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    VectorXd best_log_ls = starts.front();
    double best_ll = -std::numeric_limits<double>::infinity();
    for (VectorXd log_ls : starts) {
        for (int sweep = 0; sweep < config.sweeps; ++sweep) {
            for (int k = 0; k < n; ++k) {
                log_ls(k) = scan_then_refine_max(lo(k), hi(k), [&](double v) {
                    VectorXd trial = log_ls;
                    trial(k) = v;
                    return objective(trial);
                });
            }
        }
        const double ll = objective(log_ls);
        if (ll > best_ll) {
            best_ll = ll;
            best_log_ls = log_ls;
        }
    }

    model.length_scales = best_log_ls.array().exp();
    const ProfileFit fit = profile_fit(sample, model.length_scales, config.nugget);
    model.mu = fit.mu;
    model.sigma2 = fit.sigma2;
    model.factor = fit.factor;
    model.alpha = fit.alpha;
    model.rinv_one = fit.rinv_one;
    model.one_rinv_one = fit.one_rinv_one;
    model.nugget = fit.factor.jitter;
    return model;
}

Prediction predict(const GprModel& model, const HyperPoint& lambda) {
    check_in_bounds(model, lambda);
    if (model.degenerate) {
        return {model.mu, 0.0};
    }
    const VectorXd r = correlations_to(model, lambda);
    const double mean = model.mu + r.dot(model.alpha);
    const VectorXd u = linalg::solve_spd(model.factor, r);
    const double t = 1.0 - model.rinv_one.dot(r);
    const double var = model.sigma2 * (1.0 - r.dot(u) + t * t / model.one_rinv_one);
    return {mean, std::sqrt(std::max(var, 0.0))};
}

PredictionGrad predict_grad(const GprModel& model, const HyperPoint& lambda) {
    check_in_bounds(model, lambda);
    const int n = lambda.dims();
    if (model.degenerate) {
        return {VectorXd::Zero(n), VectorXd::Zero(n)};
    }
    const auto s = static_cast<Index>(model.sample.size());
    const VectorXd r = correlations_to(model, lambda);

    // dr(i,k) = -((lambda_k - lambda_i_k) / l_k^2) r_i
    MatrixXd dr(s, n);
    for (Index i = 0; i < s; ++i) {
        const VectorXd& xi = model.sample.points[std::size_t(i)].lambda.values;
        dr.row(i) = -((lambda.values - xi).array() / model.length_scales.array().square()) * r(i);
    }

    PredictionGrad grad;
    grad.mean = dr.transpose() * model.alpha;

    const VectorXd u = linalg::solve_spd(model.factor, r);
    const double t = 1.0 - model.rinv_one.dot(r);
    const VectorXd w = u + (t / model.one_rinv_one) * model.rinv_one;
    const VectorXd grad_var = -2.0 * model.sigma2 * (dr.transpose() * w);

    const double var = model.sigma2 * (1.0 - r.dot(u) + t * t / model.one_rinv_one);
    const double std_clamped = std::max(std::sqrt(std::max(var, 0.0)), kStdFloor);
    grad.std = grad_var / (2.0 * std_clamped);
    return grad;
}

GprModel augment(const GprModel& model, const HyperPoint& lambda_new, double phi_new) {
    check_in_bounds(model, lambda_new);
    ValueSample sample = model.sample;
    Index nearest = -1;
    double nearest_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sample.points.size(); ++i) {
        const double d = (sample.points[i].lambda.values - lambda_new.values).norm();
        if (d < nearest_dist) {
            nearest_dist = d;
            nearest = static_cast<Index>(i);
        }
    }
    if (nearest >= 0 && nearest_dist <= model.dedup_radius) {
        sample.points[std::size_t(nearest)].phi = phi_new;
    } else {
        sample.points.push_back({lambda_new, phi_new});
    }
    const VectorXd warm = model.length_scales;
    return mle_fit(sample, model.config, model.degenerate ? nullptr : &warm);
}

} // namespace gbho::gpr
