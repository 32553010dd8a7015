#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rdd/denoiser.hpp"
#include "rdd/finetune.hpp"
#include "rdd/hull.hpp"
#include "rdd/schedule.hpp"
#include "rdd/surrogate.hpp"
#include "rdd/svdd.hpp"

namespace rdd {

struct ScheduleSpec {
    int steps = 100;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    NoiseSchedule make() const { return NoiseSchedule::make(steps, beta_start, beta_end); }
    bool operator==(const ScheduleSpec&) const = default;
};

struct ModelSpec {
    std::size_t embed_dim = 32;
    std::vector<std::size_t> hidden = {256, 256};
    bool operator==(const ModelSpec&) const = default;
};

struct PretrainSpec {
    int epochs = 200;
    std::size_t batch_size = 256;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    bool operator==(const PretrainSpec&) const = default;
};

struct FinetuneSpec {
    int iterations = 50;
    std::size_t samples = 256;
    std::optional<double> alpha;  // empty: derived from the training rewards
    double learning_rate = 1e-3;
    bool anchor = true;
    double anchor_kappa = 0.01;
    double anchor_bound = 1.0;
    int inner_epochs = 1;
    std::size_t batch_size = 256;
    std::uint64_t seed = 1;
    bool operator==(const FinetuneSpec&) const = default;
};

struct SvddSpec {
    std::size_t candidates = 10;
    double alpha = 1.0;
    std::size_t n_traj = 1000;
    std::uint64_t seed = 2;
    double greedy_threshold = 1e-9;
    std::size_t chunk = 64;
    bool operator==(const SvddSpec&) const = default;
};

// r = r_hat - g_hat for the selected back-end:
//   synthetic:  -||x - target||^2
//   hull:       offset - scale * R_T(project(p)) - range_weight * violation(p), p in R^6
//   surrogate:  offset + scale * tree_prediction(x)
//   airfoil:    offset + scale * tree_prediction(x) - airfoil penalty (d = 384)
struct RewardSpec {
    std::string kind = "synthetic";
    std::vector<double> target = {4.0, 4.0};
    double scale = 1.0;
    double offset = 0.0;
    double range_weight = 10.0;
    double intersect_weight = 1.0;
    std::string surrogate;  // RDDT path for surrogate / airfoil
    bool operator==(const RewardSpec&) const = default;
};

struct SurrogateSpec {
    std::size_t n_trees = 200;
    std::size_t max_depth = 4;
    double shrinkage = 0.1;
    std::size_t thresholds = 32;
    double test_fraction = 0.2;
    std::uint64_t seed = 4;
    bool operator==(const SurrogateSpec&) const = default;
};

struct HullSpec {
    double loa = 100.0;
    std::size_t x_nodes = 128;
    std::size_t z_nodes = 32;
    std::size_t lambda_nodes = 256;
    double u_max = 8.0;
    hull::Quadrature quadrature() const { return {x_nodes, z_nodes, lambda_nodes, u_max}; }
    bool operator==(const HullSpec&) const = default;
};

// Training data: a CSV file, or generated on the fly.
//   synthetic: rows ~ N(0, I_dim)
//   hull:      rows ~ uniform over the hull parameter box, reward column = hull reward
struct DatasetSpec {
    std::string source = "synthetic";
    std::string path;
    std::size_t rows = 5000;
    std::size_t dim = 2;
    std::uint64_t seed = 3;
    bool operator==(const DatasetSpec&) const = default;
};

struct EvalSpec {
    std::size_t kde_points = 512;
    bool operator==(const EvalSpec&) const = default;
};

struct RunConfig {
    ScheduleSpec schedule;
    ModelSpec model;
    PretrainSpec pretrain;
    FinetuneSpec finetune;
    SvddSpec svdd;
    RewardSpec reward;
    SurrogateSpec surrogate;
    HullSpec hull;
    DatasetSpec dataset;
    EvalSpec eval;
    std::string output_dir = "rdd_out";
    unsigned threads = 0;  // 0: RDD_THREADS or the hardware concurrency

    // ConfigError naming the offending key path.
    void validate() const;
    unsigned resolved_threads() const;
    bool operator==(const RunConfig&) const = default;
};

// Every field is written, defaults included.
std::string serialize_config(const RunConfig& cfg);
// Missing keys take defaults; unknown keys, wrong types and invariant
// violations raise ConfigError with the key path (e.g. "svdd.M").
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

DenoiserArch make_arch(const RunConfig& cfg, std::size_t dim);
FinetuneConfig make_finetune_config(const RunConfig& cfg, double alpha);
SvddConfig make_svdd_config(const RunConfig& cfg);
BoostConfig make_boost_config(const RunConfig& cfg);

}  // namespace rdd
