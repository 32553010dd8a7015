#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rdd/tensor.hpp"

namespace rdd {

// One node of a regression tree. feature < 0 marks a leaf; otherwise
// x[feature] <= threshold goes to `left`.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
    bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    double evaluate(std::span<const double> x) const;
    bool operator==(const RegressionTree&) const = default;
};

struct BoostConfig {
    std::size_t n_trees = 200;
    std::size_t max_depth = 4;
    double shrinkage = 0.1;
    std::size_t thresholds = 32;  // split candidates per feature
};

// Gradient-boosted trees for squared loss:
// prediction = base + shrinkage * sum of tree outputs.
struct TreeEnsemble {
    std::size_t dim = 0;
    double base_prediction = 0.0;
    double shrinkage = 1.0;
    std::size_t max_depth = 0;
    std::vector<RegressionTree> trees;

    std::size_t n_trees() const { return trees.size(); }
    bool operator==(const TreeEnsemble&) const = default;
};

struct BoostResult {
    TreeEnsemble model;
    std::vector<double> train_mse;  // entry k: after k rounds (entry 0 is the base)
};

// Candidate thresholds for one feature: midpoints between consecutive
// distinct values when there are at most thresholds + 1 of them, otherwise
// `thresholds` evenly spaced interior quantiles (linear interpolation),
// deduplicated.
std::vector<double> split_candidates(std::vector<double> column, std::size_t thresholds);

// Needs >= 10 rows and finite targets. Splits maximise variance reduction of
// the residuals; ties go to the lowest feature index, then the lowest
// threshold. A constant target yields a base-only ensemble.
BoostResult fit_boosted_trees(const Matrix& x, std::span<const double> y, const BoostConfig& cfg = {});

// ArgumentError when x.size() != model.dim.
double predict(const TreeEnsemble& model, std::span<const double> x);
std::vector<double> predict(const TreeEnsemble& model, const Matrix& x);

// 1 - SS_res / SS_tot. ArgumentError for fewer than 2 values or mismatched
// lengths, DomainError for zero target variance.
double r2_score(std::span<const double> predictions, std::span<const double> targets);

// "RDDT" binary format, little-endian.
void write_trees(std::ostream& out, const TreeEnsemble& model);
TreeEnsemble read_trees(std::istream& in);
void save_trees(const std::string& path, const TreeEnsemble& model);
TreeEnsemble load_trees(const std::string& path);

}  // namespace rdd
