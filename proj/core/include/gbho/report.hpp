#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gbho {

/// One augmented-Lagrangian iteration: the iterate, its validation loss, the
/// surrogate constraint residual and the surrogate standard error there.
struct HistoryRow {
    Eigen::VectorXd lambda;
    double upper = 0.0;
    double residual = 0.0;
    double surrogate_std = 0.0;
};

/// Uniform result schema shared by every search method.
struct RunReport {
    std::string method;
    Eigen::VectorXd lambda_star;
    Eigen::VectorXd beta_star;
    double train_loss = std::numeric_limits<double>::quiet_NaN(); // unpenalized, on train
    double valid_loss = std::numeric_limits<double>::quiet_NaN();
    double test_loss = std::numeric_limits<double>::quiet_NaN(); // NaN without a test set
    std::uint64_t llo_count = 0;
    int al_iters = 0;
    std::string termination; // "budget", "converged", "stalled"
    std::vector<HistoryRow> history; // populated by the gbho driver only
};

} // namespace gbho
