#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rdd/tensor.hpp"

namespace rdd {

// Black-box design reward r(x) = r_hat(x) - g_hat(x), evaluated on physical
// (denormalised) coordinates. Samplers and fine-tuning only ever call
// evaluate(); no reward exposes derivatives.
class RewardModel {
public:
    virtual ~RewardModel() = default;
    virtual std::size_t dim() const = 0;  // 0 = any dimension
    virtual double evaluate(std::span<const double> design) const = 0;
    virtual std::string name() const = 0;
};

double composite_reward(double r_hat, double g_hat);

// exp(clamp(r / alpha, -20, 20)).
double soft_weight(double reward, double alpha);
constexpr double kSoftWeightClamp = 20.0;

using Point2 = std::array<double, 2>;

// Number of properly crossing pairs of non-adjacent edges of the closed
// polyline through `points`. Touching at shared endpoints and collinear
// overlaps are not counted. Orientation tests are exact for double inputs.
std::size_t check_self_intersection(std::span<const Point2> points);

struct AirfoilPenaltyWeights {
    double range = 10.0;      // per unit of coordinate overshoot outside [0, 1]
    double intersect = 1.0;   // per crossing pair
};

constexpr std::size_t kAirfoilPoints = 192;
constexpr std::size_t kAirfoilDim = 2 * kAirfoilPoints;

// Interleaved (x, y) pairs -> points.
std::vector<Point2> to_points(std::span<const double> interleaved);

// Feasibility penalty g_hat for a 384-vector airfoil (192 interleaved points).
double airfoil_feasibility_penalty(std::span<const double> design, const AirfoilPenaltyWeights& w = {});
// Same rule for any number of interleaved points (>= 3).
double polyline_feasibility_penalty(std::span<const double> interleaved, const AirfoilPenaltyWeights& w = {});

// -||x - target||^2.
double synthetic_benchmark_reward(std::span<const double> x, std::span<const double> target);

// offset - scale * R_T.
double ship_reward(double total_resistance, double scale, double offset);

class SyntheticReward final : public RewardModel {
public:
    explicit SyntheticReward(DesignVector target) : target_(std::move(target)) {}
    std::size_t dim() const override { return target_.size(); }
    double evaluate(std::span<const double> design) const override;
    std::string name() const override { return "synthetic"; }
    const DesignVector& target() const { return target_; }

private:
    DesignVector target_;
};

// Wraps any scalar predictor r_hat and subtracts a feasibility penalty.
class PenalizedReward final : public RewardModel {
public:
    using Fn = std::function<double(std::span<const double>)>;
    PenalizedReward(std::string name, std::size_t dim, Fn r_hat, Fn g_hat)
        : name_(std::move(name)), dim_(dim), r_hat_(std::move(r_hat)), g_hat_(std::move(g_hat)) {}
    std::size_t dim() const override { return dim_; }
    double evaluate(std::span<const double> design) const override;
    std::string name() const override { return name_; }

private:
    std::string name_;
    std::size_t dim_;
    Fn r_hat_;
    Fn g_hat_;
};

}  // namespace rdd
