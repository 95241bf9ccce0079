#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gbho/hyperpoint.hpp"
#include "gbho/linalg.hpp"

// Constant-mean Gaussian process regression over lambda space: fitted by
// maximum likelihood, it supplies the surrogate value phi_hat(lambda), the
// standard error s_hat(lambda), and their analytic lambda-gradients.
namespace gbho::gpr {

struct ValuePoint {
    HyperPoint lambda;
    double phi;
};

/// The sample S = {(lambda_i, phi(lambda_i))} the surrogate is trained on.
struct ValueSample {
    std::vector<ValuePoint> points;

    std::size_t size() const { return points.size(); }
    int dims() const { return points.empty() ? 0 : points.front().lambda.dims(); }
    Eigen::VectorXd values() const;
};

struct MleConfig {
    int restarts = 4;
    /// Log length-scale search bounds per dimension, as offsets added to
    /// log(box range): defaults give [0.05 * range, 10 * range]. The lower
    /// bound is tightened further when sample points sit closer together
    /// than the floor allows to interpolate.
    std::pair<double, double> log_ls_bounds = {std::log(0.05), std::log(10.0)};
    double nugget = 1e-10;
    std::uint64_t seed = 0;
    int sweeps = 3; // coordinate-refinement passes per restart
};

/// Gradient floor for the standard error; s_hat -> 0 at sample points and
/// its gradient would blow up without it.
inline constexpr double kStdFloor = 1e-8;

struct GprModel {
    double mu = 0.0;     // constant prior mean (profile MLE)
    double sigma2 = 0.0; // process variance (profile MLE)
    Eigen::VectorXd length_scales;
    linalg::CholeskyFactor factor; // of R + nugget * I
    Eigen::VectorXd alpha;         // (R + nugget I)^{-1} (y - mu 1)
    Eigen::VectorXd rinv_one;      // (R + nugget I)^{-1} 1
    double one_rinv_one = 0.0;
    double nugget = 0.0; // diagonal shift actually applied
    bool degenerate = false; // all phi equal; predicts (phi, 0) everywhere
    ValueSample sample;
    Box bounds;
    double dedup_radius = 0.0; // 1e-6 * box diagonal
    MleConfig config;          // kept for warm-started refits
};

/// Anisotropic RBF correlation: exp(-1/2 sum_k ((a_k - b_k) / l_k)^2).
double kernel(const HyperPoint& a, const HyperPoint& b, const Eigen::VectorXd& length_scales);

/// Exact Gaussian log-density of the sample under a constant-mean GP:
/// -1/2 [ s log(2 pi sigma2) + log det(R + nugget I)
///        + (y - mu 1)^T (R + nugget I)^{-1} (y - mu 1) / sigma2 ]
double log_likelihood(const ValueSample& sample, double mu, double sigma2,
                      const Eigen::VectorXd& length_scales, double nugget);

/// Fit by multi-start coordinate-wise golden-section search over log length
/// scales, with mu and sigma2 profiled out in closed form. A warm start is
/// tried first when provided. An all-equal-phi sample yields a flat model
/// flagged `degenerate`.
GprModel mle_fit(const ValueSample& sample, const MleConfig& config,
                 const Eigen::VectorXd* warm_start_ls = nullptr);

struct Prediction {
    double mean;
    double std;
};

/// Constant-trend kriging predictor:
///   mean = mu + r^T alpha
///   var  = sigma2 [ 1 - r^T R~^{-1} r + (1 - 1^T R~^{-1} r)^2 / (1^T R~^{-1} 1) ]
/// with r_i = kernel(lambda, lambda_i) and R~ = R + nugget I; the variance is
/// clamped at zero before the square root.
Prediction predict(const GprModel& model, const HyperPoint& lambda);

struct PredictionGrad {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;
};

/// Analytic gradients of predict() via dr_i/dlambda_k = -((lambda_k -
/// lambda_i_k) / l_k^2) r_i; the std gradient divides by max(std, kStdFloor).
PredictionGrad predict_grad(const GprModel& model, const HyperPoint& lambda);

/// Add (lambda_new, phi_new) to the sample (replacing an existing point
/// closer than dedup_radius) and refit warm-started at the current length
/// scales.
GprModel augment(const GprModel& model, const HyperPoint& lambda_new, double phi_new);

} // namespace gbho::gpr
