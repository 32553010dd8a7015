#include "rdd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rdd/error.hpp"

namespace rdd {

namespace {

std::vector<double> sorted_copy(std::span<const double> values) {
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    return v;
}

double mean_of(std::span<const double> values) {
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw ArgumentError("quantile: empty input");
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("quantile: p must be in [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

BoxplotStats boxplot_stats(std::span<const double> values) {
    if (values.empty()) throw ArgumentError("boxplot_stats: empty input");
    const auto v = sorted_copy(values);
    BoxplotStats s;
    s.q1 = quantile_sorted(v, 0.25);
    s.median = quantile_sorted(v, 0.5);
    s.q3 = quantile_sorted(v, 0.75);
    s.iqr = s.q3 - s.q1;
    const double lo_fence = s.q1 - 1.5 * s.iqr;
    const double hi_fence = s.q3 + 1.5 * s.iqr;
    s.lower_whisker = *std::find_if(v.begin(), v.end(), [&](double x) { return x >= lo_fence; });
    s.upper_whisker = *std::find_if(v.rbegin(), v.rend(), [&](double x) { return x <= hi_fence; });
    for (double x : v) {
        if (x < lo_fence || x > hi_fence) s.outliers.push_back(x);
    }
    return s;
}

double silverman_bandwidth(std::span<const double> values) {
    if (values.empty()) throw ArgumentError("silverman_bandwidth: empty input");
    const auto v = sorted_copy(values);
    const double n = static_cast<double>(v.size());
    const double mean = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    const double iqr = (quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25)) / 1.34;
    double spread = std::min(sd, iqr);
    if (!(spread > 0.0)) spread = std::max(sd, iqr);
    if (!(spread > 0.0)) return 1e-3 * std::max(1.0, std::abs(mean));
    return 0.9 * spread * std::pow(n, -0.2);
}

std::vector<double> kde_grid(std::span<const double> values, double bandwidth, std::size_t points, double pad) {
    if (values.empty()) throw ArgumentError("kde_grid: empty input");
    if (!(bandwidth > 0.0)) throw ArgumentError("kde_grid: bandwidth must be positive");
    if (points < 2) throw ArgumentError("kde_grid: need at least 2 points");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it - pad * bandwidth, hi = *hi_it + pad * bandwidth;
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return grid;
}

std::vector<double> kde(std::span<const double> values, double bandwidth, std::span<const double> grid) {
    if (values.empty()) throw ArgumentError("kde: empty input");
    if (!(bandwidth > 0.0)) throw ArgumentError("kde: bandwidth must be positive");
    const double norm = 1.0 / (static_cast<double>(values.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
    std::vector<double> out(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double s = 0.0;
        for (double v : values) {
            const double u = (grid[g] - v) / bandwidth;
            s += std::exp(-0.5 * u * u);
        }
        out[g] = s * norm;
    }
    return out;
}

double trapezoid(std::span<const double> grid, std::span<const double> f) {
    if (grid.size() != f.size()) throw ArgumentError("trapezoid: length mismatch");
    double s = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) s += 0.5 * (grid[i] - grid[i - 1]) * (f[i] + f[i - 1]);
    return s;
}

BeyondDistribution beyond_distribution(std::span<const double> samples, std::span<const double> training) {
    if (samples.empty() || training.empty()) throw ArgumentError("beyond_distribution: empty input");
    BeyondDistribution b;
    b.training_max = *std::max_element(training.begin(), training.end());
    std::size_t above = 0;
    for (double s : samples) above += s > b.training_max ? 1 : 0;
    b.fraction_above_max = static_cast<double>(above) / static_cast<double>(samples.size());
    b.sample_mean = mean_of(samples);
    b.training_mean = mean_of(training);
    b.mean_shift = b.sample_mean - b.training_mean;
    b.relative_improvement = b.mean_shift / std::abs(b.training_mean);
    return b;
}

SummaryStats summarize(std::span<const double> values) {
    if (values.empty()) throw ArgumentError("summarize: empty input");
    const auto v = sorted_copy(values);
    SummaryStats s;
    s.count = v.size();
    s.mean = mean_of(values);
    s.median = quantile_sorted(v, 0.5);
    s.min = v.front();
    s.max = v.back();
    double ss = 0.0;
    for (double x : values) ss += (x - s.mean) * (x - s.mean);
    s.stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return s;
}

}  // namespace rdd
