#include "rdd/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rdd/error.hpp"
#include "rdd/random.hpp"

namespace rdd {

namespace {

// out[r, :] = bias + in[r, :] * W for r in [0, rows). Each output element is
// accumulated over k in increasing order regardless of how many rows are
// processed together, so results do not depend on batch composition.
void dense_forward(const double* in, std::size_t rows, std::size_t n_in, const double* w,
                   const double* bias, std::size_t n_out, double* out) {
    std::size_t r = 0;
    for (; r + 4 <= rows; r += 4) {
        double* __restrict o0 = out + (r + 0) * n_out;
        double* __restrict o1 = out + (r + 1) * n_out;
        double* __restrict o2 = out + (r + 2) * n_out;
        double* __restrict o3 = out + (r + 3) * n_out;
        for (std::size_t j = 0; j < n_out; ++j) o0[j] = o1[j] = o2[j] = o3[j] = bias[j];
        const double* i0 = in + (r + 0) * n_in;
        const double* i1 = in + (r + 1) * n_in;
        const double* i2 = in + (r + 2) * n_in;
        const double* i3 = in + (r + 3) * n_in;
        for (std::size_t k = 0; k < n_in; ++k) {
            const double* __restrict wk = w + k * n_out;
            const double a0 = i0[k], a1 = i1[k], a2 = i2[k], a3 = i3[k];
            for (std::size_t j = 0; j < n_out; ++j) {
                const double wj = wk[j];
                o0[j] += a0 * wj;
                o1[j] += a1 * wj;
                o2[j] += a2 * wj;
                o3[j] += a3 * wj;
            }
        }
    }
    for (; r < rows; ++r) {
        double* __restrict o = out + r * n_out;
        for (std::size_t j = 0; j < n_out; ++j) o[j] = bias[j];
        const double* ir = in + r * n_in;
        for (std::size_t k = 0; k < n_in; ++k) {
            const double* __restrict wk = w + k * n_out;
            const double a = ir[k];
            for (std::size_t j = 0; j < n_out; ++j) o[j] += a * wk[j];
        }
    }
}

// Dot product with four fixed partial sums combined in a fixed order.
double dot4(const double* __restrict a, const double* __restrict b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    for (; j < n; ++j) s0 += a[j] * b[j];
    return (s0 + s1) + (s2 + s3);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Activations of one forward pass, kept for the backward sweep.
struct ForwardTrace {
    std::vector<Matrix> pre;   // pre-activation per layer
    std::vector<Matrix> post;  // post[0] = network input, post[l+1] = activation of layer l
};

void embed_rows(const DenoiserArch& arch, std::span<const int> t, Matrix& input) {
    for (std::size_t r = 0; r < input.rows; ++r) {
        const auto e = time_embedding(t[r], arch.embed_dim, arch.steps);
        std::copy(e.begin(), e.end(), input.row(r).begin() + static_cast<std::ptrdiff_t>(arch.dim));
    }
}

Matrix run_forward(const DenoiserParams& p, Matrix input, ForwardTrace* trace) {
    const auto& arch = p.arch;
    const std::size_t n_layers = arch.layer_count();
    const std::size_t rows = input.rows;
    if (trace) {
        trace->pre.clear();
        trace->post.clear();
    }
    Matrix current = std::move(input);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::size_t n_in = arch.fan_in(l);
        const std::size_t n_out = arch.fan_out(l);
        Matrix z(rows, n_out);
        dense_forward(current.data.data(), rows, n_in, p.values.data() + p.weight_offset(l),
                      p.values.data() + p.bias_offset(l), n_out, z.data.data());
        if (trace) trace->post.push_back(std::move(current));
        if (l + 1 == n_layers) {
            if (trace) trace->pre.push_back(z);
            return z;
        }
        Matrix a(rows, n_out);
        for (std::size_t i = 0; i < z.data.size(); ++i) a.data[i] = z.data[i] * sigmoid(z.data[i]);
        if (trace) trace->pre.push_back(std::move(z));
        current = std::move(a);
    }
    return current;
}

}  // namespace

std::size_t DenoiserArch::fan_in(std::size_t layer) const {
    return layer == 0 ? input_width() : hidden.at(layer - 1);
}

std::size_t DenoiserArch::fan_out(std::size_t layer) const {
    return layer == hidden.size() ? dim : hidden.at(layer);
}

std::size_t DenoiserArch::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) n += (fan_in(l) + 1) * fan_out(l);
    return n;
}

void DenoiserArch::validate() const {
    if (dim == 0) throw ConfigError("denoiser: design dimension must be positive");
    if (embed_dim == 0 || embed_dim % 2 != 0) throw ConfigError("denoiser: embed_dim must be even and positive");
    if (steps < 1) throw ConfigError("denoiser: steps must be >= 1");
    for (auto h : hidden) {
        if (h == 0) throw ConfigError("denoiser: hidden widths must be positive");
    }
    if (activation != Activation::silu) throw ConfigError("denoiser: unknown activation");
}

std::size_t DenoiserParams::weight_offset(std::size_t layer) const {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layer; ++l) off += (arch.fan_in(l) + 1) * arch.fan_out(l);
    return off;
}

std::size_t DenoiserParams::bias_offset(std::size_t layer) const {
    return weight_offset(layer) + arch.fan_in(layer) * arch.fan_out(layer);
}

DenoiserParams DenoiserParams::zeros(const DenoiserArch& arch) {
    arch.validate();
    DenoiserParams p;
    p.arch = arch;
    p.values.assign(arch.parameter_count(), 0.0);
    return p;
}

DenoiserParams DenoiserParams::init(const DenoiserArch& arch, std::uint64_t seed) {
    DenoiserParams p = zeros(arch);
    Rng rng(seed);
    for (std::size_t l = 0; l < arch.layer_count(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(arch.fan_in(l)));
        double* w = p.values.data() + p.weight_offset(l);
        const std::size_t n = arch.fan_in(l) * arch.fan_out(l);
        for (std::size_t i = 0; i < n; ++i) w[i] = bound * (2.0 * rng.uniform() - 1.0);
    }
    return p;
}

std::vector<double> time_embedding(int t, std::size_t dim, int steps) {
    if (dim == 0 || dim % 2 != 0) throw ConfigError("time_embedding: dim must be even and positive");
    if (steps < 1) throw ConfigError("time_embedding: steps must be >= 1");
    const std::size_t half = dim / 2;
    const double log_span = std::log(static_cast<double>(std::max(steps, 2)));
    std::vector<double> e(dim);
    for (std::size_t k = 0; k < half; ++k) {
        const double freq = std::exp(-log_span * static_cast<double>(k) / static_cast<double>(half));
        const double angle = static_cast<double>(t) * freq;
        e[2 * k] = std::sin(angle);
        e[2 * k + 1] = std::cos(angle);
    }
    return e;
}

Matrix predict_noise_batch(const DenoiserParams& params, const Matrix& xt, std::span<const int> t) {
    const auto& arch = params.arch;
    if (xt.cols != arch.dim) {
        throw ConfigError("predict_noise: input width " + std::to_string(xt.cols) + " != model dim " +
                          std::to_string(arch.dim));
    }
    if (t.size() != xt.rows) throw ConfigError("predict_noise: one timestep per row required");
    if (params.values.size() != arch.parameter_count()) throw ConfigError("predict_noise: parameter buffer size mismatch");
    Matrix input(xt.rows, arch.input_width());
    for (std::size_t r = 0; r < xt.rows; ++r) {
        std::copy(xt.row(r).begin(), xt.row(r).end(), input.row(r).begin());
    }
    embed_rows(arch, t, input);
    return run_forward(params, std::move(input), nullptr);
}

DesignVector predict_noise(const DenoiserParams& params, std::span<const double> xt, int t) {
    Matrix m(1, xt.size());
    std::copy(xt.begin(), xt.end(), m.data.begin());
    const int ts[1] = {t};
    return predict_noise_batch(params, m, ts).data;
}

LossAndGrad loss_and_grad(const DenoiserParams& params, std::span<const NoiseExample> batch,
                          const NoiseSchedule& sched, std::span<const double> weights,
                          const AnchorTerm& anchor) {
    if (batch.empty()) throw ArgumentError("loss_and_grad: empty batch");
    if (!weights.empty() && weights.size() != batch.size()) {
        throw ArgumentError("loss_and_grad: weights length must equal batch length");
    }
    const auto& arch = params.arch;
    const std::size_t rows = batch.size();
    const std::size_t d = arch.dim;

    Matrix xt(rows, d);
    std::vector<int> ts(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& ex = batch[r];
        if (ex.x0.size() != d || ex.eps.size() != d) throw ConfigError("loss_and_grad: example dimension mismatch");
        const auto x = forward_marginal(ex.x0, ex.t, ex.eps, sched);
        std::copy(x.begin(), x.end(), xt.row(r).begin());
        ts[r] = ex.t;
    }

    Matrix input(rows, arch.input_width());
    for (std::size_t r = 0; r < rows; ++r) std::copy(xt.row(r).begin(), xt.row(r).end(), input.row(r).begin());
    embed_rows(arch, ts, input);

    ForwardTrace trace;
    const Matrix out = run_forward(params, std::move(input), &trace);

    Matrix ref;
    const bool anchored = anchor.reference != nullptr && anchor.kappa != 0.0;
    if (anchored) ref = predict_noise_batch(*anchor.reference, xt, ts);

    const double inv_rows = 1.0 / static_cast<double>(rows);
    LossAndGrad res;
    res.grad.assign(params.values.size(), 0.0);
    Matrix delta(rows, d);
    double loss = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double w = weights.empty() ? 1.0 : weights[r];
        const auto eps = batch[r].eps;
        double sq = 0.0;
        double anchor_sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = out(r, j) - eps[j];
            sq += diff * diff;
            double g = w * diff;
            if (anchored) {
                const double da = out(r, j) - ref(r, j);
                anchor_sq += da * da;
                g += anchor.kappa * da;
            }
            delta(r, j) = 2.0 * inv_rows * g;
        }
        loss += w * sq + anchor.kappa * anchor_sq;
    }
    res.loss = loss * inv_rows;

    for (std::size_t l = arch.layer_count(); l-- > 0;) {
        const std::size_t n_in = arch.fan_in(l);
        const std::size_t n_out = arch.fan_out(l);
        const Matrix& a_in = trace.post[l];
        double* __restrict gw = res.grad.data() + params.weight_offset(l);
        double* __restrict gb = res.grad.data() + params.bias_offset(l);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* dr = delta.data.data() + r * n_out;
            const double* ar = a_in.data.data() + r * n_in;
            for (std::size_t j = 0; j < n_out; ++j) gb[j] += dr[j];
            for (std::size_t k = 0; k < n_in; ++k) {
                const double a = ar[k];
                double* gwk = gw + k * n_out;
                for (std::size_t j = 0; j < n_out; ++j) gwk[j] += a * dr[j];
            }
        }
        if (l == 0) break;
        // Propagate into the previous layer's activation, then through SiLU.
        const double* w = params.values.data() + params.weight_offset(l);
        const Matrix& z_prev = trace.pre[l - 1];
        Matrix next(rows, n_in);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* dr = delta.data.data() + r * n_out;
            for (std::size_t k = 0; k < n_in; ++k) {
                const double g = dot4(dr, w + k * n_out, n_out);
                const double z = z_prev(r, k);
                const double s = sigmoid(z);
                next(r, k) = g * s * (1.0 + z * (1.0 - s));
            }
        }
        delta = std::move(next);
    }
    return res;
}

OptimizerState OptimizerState::fresh(std::size_t n, const AdamConfig& cfg) {
    OptimizerState s;
    s.config = cfg;
    s.first_moment.assign(n, 0.0);
    s.second_moment.assign(n, 0.0);
    return s;
}

void adam_step(DenoiserParams& params, OptimizerState& state, std::span<const double> grad) {
    const std::size_t n = params.values.size();
    if (grad.size() != n || state.first_moment.size() != n || state.second_moment.size() != n) {
        throw ConfigError("adam_step: shape mismatch between parameters, gradient and optimizer state");
    }
    for (double g : grad) {
        if (!std::isfinite(g)) throw TrainingDivergence("adam_step: non-finite gradient");
    }
    const auto& c = state.config;
    state.step_count += 1;
    const double k = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(c.beta1, k);
    const double bc2 = 1.0 - std::pow(c.beta2, k);
    for (std::size_t i = 0; i < n; ++i) {
        double& m = state.first_moment[i];
        double& v = state.second_moment[i];
        m = c.beta1 * m + (1.0 - c.beta1) * grad[i];
        v = c.beta2 * v + (1.0 - c.beta2) * grad[i] * grad[i];
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        params.values[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
}

}  // namespace rdd
