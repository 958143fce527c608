#pragma once

#include <cstddef>
#include <span>

namespace activeteach {

/**
 * Two-sided Mann-Whitney U test, normal approximation with tie and continuity corrections.
 *
 * `u` is the statistic of `sample_a`: the number of (a, b) pairs with a > b, ties counting 1/2.
 * So u = |a| * |b| when every a exceeds every b, and 0 in the reverse case.
 */
struct MannWhitneyResult {
    double u = 0.0;
    double z = 0.0;
    double p_value = 1.0;
};

/// Throws std::invalid_argument on an empty sample.
MannWhitneyResult mann_whitney_u(std::span<const double> sample_a, std::span<const double> sample_b);

/// min(1, p * comparisons).
double bonferroni(double p_value, std::size_t comparisons);

/// Box-plot statistics; quartiles use linear interpolation between order statistics.
struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;

    double iqr() const { return q3 - q1; }
};

Summary summarize(std::span<const double> values);
double quantile(std::span<const double> values, double q);

}  // namespace activeteach
