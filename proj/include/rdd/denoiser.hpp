#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rdd/schedule.hpp"
#include "rdd/tensor.hpp"

namespace rdd {

enum class Activation : std::uint32_t { silu = 1 };

// Shape of the noise-prediction network eps_theta(x_t, t): an MLP over
// concat(x_t, time_embedding(t)) with smooth hidden activations and a linear
// output of width `dim`.
struct DenoiserArch {
    std::size_t dim = 0;
    std::size_t embed_dim = 32;
    std::vector<std::size_t> hidden = {256, 256};
    int steps = 100;  // T, sets the embedding frequency range
    Activation activation = Activation::silu;

    std::size_t input_width() const { return dim + embed_dim; }
    std::size_t layer_count() const { return hidden.size() + 1; }
    std::size_t fan_in(std::size_t layer) const;
    std::size_t fan_out(std::size_t layer) const;
    std::size_t parameter_count() const;
    void validate() const;

    bool operator==(const DenoiserArch&) const = default;
};

// All weights and biases in one flat buffer. Layer l stores its weight matrix
// (fan_in x fan_out, row-major) followed by its bias vector.
struct DenoiserParams {
    DenoiserArch arch;
    std::vector<double> values;

    // Fan-in scaled uniform initialisation, biases zero.
    static DenoiserParams init(const DenoiserArch& arch, std::uint64_t seed);
    static DenoiserParams zeros(const DenoiserArch& arch);

    std::size_t weight_offset(std::size_t layer) const;
    std::size_t bias_offset(std::size_t layer) const;

    bool operator==(const DenoiserParams&) const = default;
};

// Interleaved (sin, cos) features of t at geometrically spaced frequencies
// between 1 and 1/T.
std::vector<double> time_embedding(int t, std::size_t dim, int steps);

DesignVector predict_noise(const DenoiserParams& params, std::span<const double> xt, int t);

// Row i of `xt` is evaluated at timestep t[i]. Each row's arithmetic is
// independent of the batch it is evaluated in.
Matrix predict_noise_batch(const DenoiserParams& params, const Matrix& xt, std::span<const int> t);

// One training example for the noise-matching loss.
struct NoiseExample {
    std::span<const double> x0;
    int t = 1;
    std::span<const double> eps;
};

// Optional pull toward a reference network: adds
// kappa * ||eps_theta - eps_ref||^2 per example (reference held fixed).
struct AnchorTerm {
    const DenoiserParams* reference = nullptr;
    double kappa = 0.0;
};

struct LossAndGrad {
    double loss = 0.0;
    std::vector<double> grad;  // same layout as DenoiserParams::values
};

// loss = mean_i w_i * ||eps_i - eps_theta(x_t,i, t_i)||^2 (+ anchor), with
// x_t,i = forward_marginal(x0_i, t_i, eps_i). Gradient by reverse
// accumulation. Empty `weights` means all ones.
LossAndGrad loss_and_grad(const DenoiserParams& params, std::span<const NoiseExample> batch,
                          const NoiseSchedule& sched, std::span<const double> weights = {},
                          const AnchorTerm& anchor = {});

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    bool operator==(const AdamConfig&) const = default;
};

struct OptimizerState {
    AdamConfig config;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t step_count = 0;

    static OptimizerState fresh(std::size_t n, const AdamConfig& cfg = {});
    bool operator==(const OptimizerState&) const = default;
};

// Bias-corrected Adam update in place. Throws TrainingDivergence on a
// non-finite gradient (parameters and state are left untouched).
void adam_step(DenoiserParams& params, OptimizerState& state, std::span<const double> grad);

}  // namespace rdd
