#include "rdd/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rdd/error.hpp"

namespace rdd {

namespace {

// Error-free transformations for the exact orientation fallback.
inline void two_sum(double a, double b, double& s, double& err) {
    s = a + b;
    const double bb = s - a;
    err = (a - (s - bb)) + (b - bb);
}

inline void two_product(double a, double b, double& p, double& err) {
    p = a * b;
    err = std::fma(a, b, -p);
}

// Sign of the sum of `terms`, computed exactly with a growing nonoverlapping
// expansion.
int exact_sign_of_sum(std::span<const double> terms) {
    std::vector<double> e;
    e.reserve(terms.size() + 1);
    for (double b : terms) {
        double q = b;
        std::vector<double> h;
        h.reserve(e.size() + 1);
        for (double ei : e) {
            double s, err;
            two_sum(q, ei, s, err);
            h.push_back(err);
            q = s;
        }
        h.push_back(q);
        e.swap(h);
    }
    for (auto it = e.rbegin(); it != e.rend(); ++it) {
        if (*it > 0.0) return 1;
        if (*it < 0.0) return -1;
    }
    return 0;
}

// Sign of the signed area of triangle (a, b, c): +1 counter-clockwise.
int orientation(const Point2& a, const Point2& b, const Point2& c) {
    const double detleft = (a[0] - c[0]) * (b[1] - c[1]);
    const double detright = (a[1] - c[1]) * (b[0] - c[0]);
    const double det = detleft - detright;
    constexpr double eps = std::numeric_limits<double>::epsilon() * 0.5;
    const double bound = (3.0 + 16.0 * eps) * eps * (std::abs(detleft) + std::abs(detright));
    if (det > bound) return 1;
    if (-det > bound) return -1;
    // ax*by - ax*cy + bx*cy - bx*ay + cx*ay - cx*by, each product split exactly.
    const double pairs[6][2] = {{a[0], b[1]}, {-a[0], c[1]}, {b[0], c[1]}, {-b[0], a[1]}, {c[0], a[1]}, {-c[0], b[1]}};
    double terms[12];
    for (int i = 0; i < 6; ++i) two_product(pairs[i][0], pairs[i][1], terms[2 * i], terms[2 * i + 1]);
    return exact_sign_of_sum(terms);
}

bool boxes_overlap(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    return std::max(std::min(a[0], b[0]), std::min(c[0], d[0])) <= std::min(std::max(a[0], b[0]), std::max(c[0], d[0])) &&
           std::max(std::min(a[1], b[1]), std::min(c[1], d[1])) <= std::min(std::max(a[1], b[1]), std::max(c[1], d[1]));
}

bool properly_cross(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    if (!boxes_overlap(a, b, c, d)) return false;
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    if (o1 == 0 || o2 == 0 || o1 == o2) return false;
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);
    return o3 != 0 && o4 != 0 && o3 != o4;
}

}  // namespace

double composite_reward(double r_hat, double g_hat) { return r_hat - g_hat; }

double soft_weight(double reward, double alpha) {
    if (!(alpha > 0.0)) throw ArgumentError("soft_weight: alpha must be positive");
    return std::exp(std::clamp(reward / alpha, -kSoftWeightClamp, kSoftWeightClamp));
}

std::size_t check_self_intersection(std::span<const Point2> points) {
    const std::size_t n = points.size();
    if (n < 4) return 0;  // every pair of edges of a triangle is adjacent
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = points[i];
        const Point2& b = points[(i + 1) % n];
        // j starts at i + 2; the pair (last edge, first edge) is adjacent.
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            if (properly_cross(a, b, points[j], points[(j + 1) % n])) ++count;
        }
    }
    return count;
}

std::vector<Point2> to_points(std::span<const double> interleaved) {
    if (interleaved.size() % 2 != 0) throw ArgumentError("to_points: odd number of coordinates");
    std::vector<Point2> pts(interleaved.size() / 2);
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {interleaved[2 * i], interleaved[2 * i + 1]};
    return pts;
}

double polyline_feasibility_penalty(std::span<const double> interleaved, const AirfoilPenaltyWeights& w) {
    if (interleaved.size() < 6 || interleaved.size() % 2 != 0) {
        throw ArgumentError("feasibility penalty: need >= 3 interleaved (x, y) points");
    }
    double overshoot = 0.0;
    for (double v : interleaved) {
        if (v > 1.0) overshoot += v - 1.0;
        else if (v < 0.0) overshoot += -v;
    }
    const auto pts = to_points(interleaved);
    const auto crossings = check_self_intersection(pts);
    return w.range * overshoot + w.intersect * static_cast<double>(crossings);
}

double airfoil_feasibility_penalty(std::span<const double> design, const AirfoilPenaltyWeights& w) {
    if (design.size() != kAirfoilDim) {
        throw ArgumentError("airfoil_feasibility_penalty: expected " + std::to_string(kAirfoilDim) +
                            " values, got " + std::to_string(design.size()));
    }
    return polyline_feasibility_penalty(design, w);
}

double synthetic_benchmark_reward(std::span<const double> x, std::span<const double> target) {
    if (x.size() != target.size()) throw ArgumentError("synthetic_benchmark_reward: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - target[i];
        s += d * d;
    }
    return -s;
}

double ship_reward(double total_resistance, double scale, double offset) {
    return offset - scale * total_resistance;
}

double SyntheticReward::evaluate(std::span<const double> design) const {
    return synthetic_benchmark_reward(design, target_);
}

double PenalizedReward::evaluate(std::span<const double> design) const {
    if (dim_ != 0 && design.size() != dim_) throw ArgumentError(name_ + " reward: dimension mismatch");
    const double g = g_hat_ ? g_hat_(design) : 0.0;
    return composite_reward(r_hat_(design), g);
}

}  // namespace rdd
