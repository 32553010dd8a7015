#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rdd {

// Type-7 quantile (linear interpolation between closest ranks) of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

struct BoxplotStats {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double lower_whisker = 0.0;  // smallest value >= q1 - 1.5 IQR
    double upper_whisker = 0.0;  // largest value <= q3 + 1.5 IQR
    std::vector<double> outliers;  // ascending
};

// ArgumentError on empty input.
BoxplotStats boxplot_stats(std::span<const double> values);

// 0.9 * min(sd, IQR / 1.34) * n^(-1/5); falls back to whichever spread is
// nonzero, and to 1e-3 * max(1, |mean|) for constant data.
double silverman_bandwidth(std::span<const double> values);

// Uniform grid over [min - pad * h, max + pad * h].
std::vector<double> kde_grid(std::span<const double> values, double bandwidth, std::size_t points = 512,
                             double pad = 5.0);

// Gaussian kernel density of `values` at each grid point. ArgumentError for
// a non-positive bandwidth or empty values.
std::vector<double> kde(std::span<const double> values, double bandwidth, std::span<const double> grid);

// Trapezoid rule over a (possibly non-uniform) grid.
double trapezoid(std::span<const double> grid, std::span<const double> f);

struct BeyondDistribution {
    double fraction_above_max = 0.0;   // samples strictly above max(training)
    double mean_shift = 0.0;           // mean(samples) - mean(training)
    double relative_improvement = 0.0; // mean_shift / |mean(training)|; inf/nan when mean(training) = 0
    double training_max = 0.0;
    double sample_mean = 0.0;
    double training_mean = 0.0;
};

// ArgumentError when either list is empty.
BeyondDistribution beyond_distribution(std::span<const double> samples, std::span<const double> training);

struct SummaryStats {
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
    double stddev = 0.0;  // sample (n - 1) standard deviation
};

SummaryStats summarize(std::span<const double> values);

}  // namespace rdd
