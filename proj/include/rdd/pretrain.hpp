#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdd/denoiser.hpp"
#include "rdd/error.hpp"
#include "rdd/random.hpp"
#include "rdd/schedule.hpp"
#include "rdd/tensor.hpp"

namespace rdd {

// Tabular design data: one design per row, optional reward column.
struct Dataset {
    Matrix rows;
    std::optional<std::vector<double>> rewards;

    std::size_t size() const { return rows.rows; }
    std::size_t dim() const { return rows.cols; }
};

struct NormStats {
    std::vector<double> mean;
    std::vector<double> std;

    bool operator==(const NormStats&) const = default;
};

// Per-column z-scoring. Columns with std below 1e-8 use std = 1e-8 and log a
// warning. Requires at least 2 rows.
std::pair<Matrix, NormStats> normalize(const Matrix& rows);
Matrix normalize_with(const Matrix& rows, const NormStats& stats);
DesignVector denormalize(std::span<const double> x, const NormStats& stats);
Matrix denormalize(const Matrix& rows, const NormStats& stats);

struct TrainConfig {
    int epochs = 200;
    std::size_t batch_size = 256;
    std::uint64_t seed = 0;
    AdamConfig adam{};
};

struct TrainResult {
    DenoiserParams params;
    OptimizerState optimizer;
    std::vector<double> epoch_loss;  // mean minibatch loss per epoch
};

// Thrown when training produces a non-finite loss; carries the parameters
// from before the failing update.
struct TrainingAborted : TrainingDivergence {
    TrainingAborted(const std::string& w, DenoiserParams last_good)
        : TrainingDivergence(w), checkpoint(std::move(last_good)) {}
    DenoiserParams checkpoint;
};

// One pass over `rows` (normalised designs) in shuffled minibatches. Each
// example draws t ~ U{1..T} and eps ~ N(0, I) from `rng`; one Adam step per
// minibatch. `weights` (empty = all ones) is indexed like `rows`. Returns the
// mean minibatch loss.
double train_epoch(DenoiserParams& params, OptimizerState& opt, const NoiseSchedule& sched, const Matrix& rows,
                   std::span<const double> weights, std::size_t batch_size, Rng& rng,
                   const AnchorTerm& anchor = {});

// Unguided noise-matching training on normalised rows.
TrainResult train_ddpm(const Matrix& rows, const NoiseSchedule& sched, const DenoiserArch& arch,
                       const TrainConfig& cfg, const std::function<void(int, double)>& on_epoch = {});

// RNG layout shared by every sampler: root seed -> trajectory stream ->
// per-step substream. Stream 0 of a trajectory draws x_T; stream t draws the
// noise of reverse step t.
struct StreamLayout {
    std::uint64_t root = 0;

    std::uint64_t trajectory_seed(std::size_t i) const { return derive_seed(root, i); }
    Rng initial(std::size_t i) const { return Rng(derive_seed(trajectory_seed(i), 0)); }
    Rng step(std::size_t i, int t) const {
        return Rng(derive_seed(trajectory_seed(i), static_cast<std::uint64_t>(t)));
    }
};

// Which network drives reverse step t.
using PolicySelector = std::function<const DenoiserParams&(int t)>;

struct ChainOptions {
    bool keep_states = false;
    unsigned threads = 1;
    std::size_t chunk = 64;
};

struct ChainResult {
    Matrix final;                // n x d, x_0 per trajectory
    std::vector<Matrix> states;  // per trajectory (T+1) x d, row k holds x_{T-k}
};

// Ancestral sampling of n trajectories through the reverse chain.
ChainResult run_reverse_chain(const PolicySelector& policy, const NoiseSchedule& sched, std::size_t dim,
                              std::size_t n, std::uint64_t seed, const ChainOptions& opts = {});

// n designs (normalised space) from x_T ~ N(0, I) and reverse steps T..1.
std::vector<DesignVector> ancestral_sample(const DenoiserParams& params, const NoiseSchedule& sched,
                                           std::size_t n, std::uint64_t seed, unsigned threads = 1);

std::vector<DesignVector> to_rows(const Matrix& m);
Matrix from_rows(const std::vector<DesignVector>& rows);

}  // namespace rdd
