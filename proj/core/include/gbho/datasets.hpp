#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "gbho/errors.hpp"

namespace gbho {

enum class TaskKind { classification, regression };

/// A feature matrix with per-row labels. Classification labels are class
/// indices stored as doubles; regression labels are real targets.
struct LabeledSet {
    Eigen::MatrixXd features; // N x d
    Eigen::VectorXd labels;   // N
    TaskKind kind = TaskKind::classification;
    int classes = 0; // valid for classification

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }
};

struct SplitSpec {
    double train_fraction = 0.6;
    double valid_fraction = 0.4;
    std::uint64_t seed = 0;
};

/// Load an IDX image/label file pair (big-endian headers, magic 0x803 for
/// images and 0x801 for labels). Pixels are scaled to [0, 1].
LabeledSet load_idx(const std::string& images_path, const std::string& labels_path);

/// Draw a random subsample of n rows and split it into disjoint train/valid
/// sets of sizes floor(n * train_fraction) and floor(n * valid_fraction).
/// Classification splits are stratified by class; everything is
/// deterministic for a fixed seed.
std::pair<LabeledSet, LabeledSet> subsample_split(const LabeledSet& set, Eigen::Index n,
                                                  const SplitSpec& spec);

} // namespace gbho
