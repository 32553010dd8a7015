#include "rdd/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "rdd/binary.hpp"
#include "rdd/error.hpp"

namespace rdd {

namespace {

constexpr std::uint32_t kTreeFormatVersion = 1;

struct Grower {
    const std::vector<std::vector<double>>& thresholds;
    const std::vector<std::vector<std::uint16_t>>& bins;  // bins[f][i]: count of thresholds below x_if
    const std::vector<double>& residual;
    std::size_t max_depth;
    RegressionTree tree;
    std::vector<double> fitted;  // leaf value reached by each training row

    std::int32_t grow(std::vector<std::size_t>& idx, std::size_t depth) {
        const auto id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        double sum = 0.0, sq = 0.0;
        for (std::size_t i : idx) {
            sum += residual[i];
            sq += residual[i] * residual[i];
        }
        const double n = static_cast<double>(idx.size());
        const double mean = sum / n;

        std::int32_t best_f = -1;
        std::size_t best_j = 0;
        double best_gain = 0.0;
        if (depth < max_depth && idx.size() >= 2) {
            const double parent = sum * sum / n;
            for (std::size_t f = 0; f < thresholds.size(); ++f) {
                const std::size_t nt = thresholds[f].size();
                if (nt == 0) continue;
                std::vector<double> hsum(nt + 1, 0.0);
                std::vector<std::size_t> hcount(nt + 1, 0);
                for (std::size_t i : idx) {
                    hsum[bins[f][i]] += residual[i];
                    ++hcount[bins[f][i]];
                }
                double left_sum = 0.0;
                std::size_t left_n = 0;
                for (std::size_t j = 0; j < nt; ++j) {
                    left_sum += hsum[j];
                    left_n += hcount[j];
                    const std::size_t right_n = idx.size() - left_n;
                    if (left_n == 0 || right_n == 0) continue;
                    const double right_sum = sum - left_sum;
                    const double gain = left_sum * left_sum / static_cast<double>(left_n) +
                                        right_sum * right_sum / static_cast<double>(right_n) - parent;
                    // Strict comparison keeps the lowest (feature, threshold) on ties.
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_f = static_cast<std::int32_t>(f);
                        best_j = j;
                    }
                }
            }
        }
        // Ignore gains at the rounding level of the node's sum of squares.
        if (best_f < 0 || best_gain <= 1e-14 * sq) {
            tree.nodes[static_cast<std::size_t>(id)].value = mean;
            for (std::size_t i : idx) fitted[i] = mean;
            return id;
        }
        const auto f = static_cast<std::size_t>(best_f);
        std::vector<std::size_t> left, right;
        for (std::size_t i : idx) (bins[f][i] <= best_j ? left : right).push_back(i);
        idx.clear();
        idx.shrink_to_fit();
        const std::int32_t l = grow(left, depth + 1);
        const std::int32_t r = grow(right, depth + 1);
        TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best_f;
        node.threshold = thresholds[f][best_j];
        node.left = l;
        node.right = r;
        node.value = mean;
        return id;
    }
};

void check_tree(const RegressionTree& tree, std::size_t dim) {
    const auto n = static_cast<std::int32_t>(tree.nodes.size());
    if (n == 0) throw ParseError("regression tree with no nodes");
    for (std::int32_t i = 0; i < n; ++i) {
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(i)];
        if (!std::isfinite(node.value)) throw ParseError("non-finite tree node value");
        if (node.feature < 0) continue;
        if (static_cast<std::size_t>(node.feature) >= dim) throw ParseError("tree split feature out of range");
        // Children always follow their parent, which also rules out cycles.
        if (node.left <= i || node.right <= i || node.left >= n || node.right >= n) {
            throw ParseError("tree child index out of range");
        }
    }
}

}  // namespace

double RegressionTree::evaluate(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
        const TreeNode& node = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
    }
    return nodes[i].value;
}

std::vector<double> split_candidates(std::vector<double> column, std::size_t thresholds) {
    std::sort(column.begin(), column.end());
    std::vector<double> distinct = column;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<double> out;
    if (distinct.size() <= thresholds + 1) {
        for (std::size_t i = 0; i + 1 < distinct.size(); ++i) out.push_back(distinct[i] + 0.5 * (distinct[i + 1] - distinct[i]));
    } else {
        const double n1 = static_cast<double>(column.size() - 1);
        for (std::size_t k = 1; k <= thresholds; ++k) {
            const double h = n1 * static_cast<double>(k) / static_cast<double>(thresholds + 1);
            const auto lo = static_cast<std::size_t>(std::floor(h));
            const std::size_t hi = std::min(lo + 1, column.size() - 1);
            out.push_back(column[lo] + (h - static_cast<double>(lo)) * (column[hi] - column[lo]));
        }
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    // A threshold at or above the maximum would send every row left.
    while (!out.empty() && out.back() >= distinct.back()) out.pop_back();
    return out;
}

BoostResult fit_boosted_trees(const Matrix& x, std::span<const double> y, const BoostConfig& cfg) {
    const std::size_t n = x.rows, d = x.cols;
    if (n < 10) throw ArgumentError("fit_boosted_trees: need at least 10 rows, got " + std::to_string(n));
    if (y.size() != n) throw ArgumentError("fit_boosted_trees: target length does not match row count");
    if (d == 0) throw ArgumentError("fit_boosted_trees: zero-width design matrix");
    if (!(cfg.shrinkage > 0.0 && cfg.shrinkage <= 1.0)) throw ArgumentError("fit_boosted_trees: shrinkage must be in (0, 1]");
    if (cfg.thresholds == 0 || cfg.thresholds > 65534) throw ArgumentError("fit_boosted_trees: thresholds must be in [1, 65534]");
    for (double v : y) {
        if (!std::isfinite(v)) throw DomainError("fit_boosted_trees: non-finite target");
    }
    for (double v : x.data) {
        if (!std::isfinite(v)) throw DomainError("fit_boosted_trees: non-finite feature value");
    }

    BoostResult res;
    res.model.dim = d;
    res.model.shrinkage = cfg.shrinkage;
    res.model.max_depth = cfg.max_depth;
    double sum = 0.0;
    for (double v : y) sum += v;
    res.model.base_prediction = sum / static_cast<double>(n);

    std::vector<double> pred(n, res.model.base_prediction);
    auto mse = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += (y[i] - pred[i]) * (y[i] - pred[i]);
        return s / static_cast<double>(n);
    };
    res.train_mse.push_back(mse());
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) {
        res.model.base_prediction = y[0];
        res.train_mse.back() = 0.0;
        return res;
    }

    std::vector<std::vector<double>> thresholds(d);
    std::vector<std::vector<std::uint16_t>> bins(d, std::vector<std::uint16_t>(n));
    std::vector<double> column(n);
    for (std::size_t f = 0; f < d; ++f) {
        for (std::size_t i = 0; i < n; ++i) column[i] = x(i, f);
        thresholds[f] = split_candidates(column, cfg.thresholds);
        const auto& thr = thresholds[f];
        for (std::size_t i = 0; i < n; ++i) {
            bins[f][i] = static_cast<std::uint16_t>(std::lower_bound(thr.begin(), thr.end(), x(i, f)) - thr.begin());
        }
    }

    std::vector<double> residual(n);
    for (std::size_t round = 0; round < cfg.n_trees; ++round) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - pred[i];
        Grower g{thresholds, bins, residual, cfg.max_depth, {}, std::vector<double>(n, 0.0)};
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        g.grow(all, 0);
        for (std::size_t i = 0; i < n; ++i) pred[i] += cfg.shrinkage * g.fitted[i];
        res.model.trees.push_back(std::move(g.tree));
        res.train_mse.push_back(mse());
    }
    return res;
}

double predict(const TreeEnsemble& model, std::span<const double> x) {
    if (x.size() != model.dim) {
        throw ArgumentError("predict: design has " + std::to_string(x.size()) + " values, model expects " +
                            std::to_string(model.dim));
    }
    double s = 0.0;
    for (const auto& tree : model.trees) s += tree.evaluate(x);
    return model.base_prediction + model.shrinkage * s;
}

std::vector<double> predict(const TreeEnsemble& model, const Matrix& x) {
    std::vector<double> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict(model, x.row(i));
    return out;
}

double r2_score(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size()) throw ArgumentError("r2_score: length mismatch");
    if (targets.size() < 2) throw ArgumentError("r2_score: need at least 2 values");
    double mean = 0.0;
    for (double v : targets) mean += v;
    mean /= static_cast<double>(targets.size());
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        ss_tot += (targets[i] - mean) * (targets[i] - mean);
        ss_res += (targets[i] - predictions[i]) * (targets[i] - predictions[i]);
    }
    if (ss_tot == 0.0) throw DomainError("r2_score: undefined for targets with zero variance");
    return 1.0 - ss_res / ss_tot;
}

void write_trees(std::ostream& out, const TreeEnsemble& model) {
    using namespace binary;
    put_magic(out, "RDDT");
    put_u32(out, kTreeFormatVersion);
    put_u64(out, model.dim);
    put_f64(out, model.base_prediction);
    put_f64(out, model.shrinkage);
    put_u64(out, model.max_depth);
    put_u64(out, model.trees.size());
    for (const auto& tree : model.trees) {
        put_u64(out, tree.nodes.size());
        for (const auto& node : tree.nodes) {
            put_i32(out, node.feature);
            put_i32(out, node.left);
            put_i32(out, node.right);
            put_f64(out, node.threshold);
            put_f64(out, node.value);
        }
    }
}

TreeEnsemble read_trees(std::istream& in) {
    using namespace binary;
    expect_magic(in, "RDDT");
    const std::uint32_t version = get_u32(in, "version");
    if (version != kTreeFormatVersion) throw ParseError("unsupported RDDT version " + std::to_string(version));
    TreeEnsemble model;
    model.dim = get_u64(in, "dim");
    model.base_prediction = get_f64(in, "base prediction");
    model.shrinkage = get_f64(in, "shrinkage");
    model.max_depth = get_u64(in, "max depth");
    const std::uint64_t count = get_u64(in, "tree count");
    if (model.dim == 0 || !std::isfinite(model.base_prediction) || !(model.shrinkage > 0.0 && model.shrinkage <= 1.0)) {
        throw ParseError("RDDT header holds invalid values");
    }
    for (std::uint64_t k = 0; k < count; ++k) {
        RegressionTree tree;
        const std::uint64_t nodes = get_u64(in, "node count");
        if (nodes > (std::uint64_t{1} << 31)) throw ParseError("RDDT node count too large");
        tree.nodes.resize(nodes);
        for (auto& node : tree.nodes) {
            node.feature = get_i32(in, "node");
            node.left = get_i32(in, "node");
            node.right = get_i32(in, "node");
            node.threshold = get_f64(in, "node");
            node.value = get_f64(in, "node");
        }
        check_tree(tree, model.dim);
        model.trees.push_back(std::move(tree));
    }
    return model;
}

void save_trees(const std::string& path, const TreeEnsemble& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    write_trees(out, model);
    if (!out) throw IoError("failed writing " + path);
}

TreeEnsemble load_trees(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_trees(in);
}

}  // namespace rdd
