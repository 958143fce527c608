#include "activeteach/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace activeteach {

MannWhitneyResult mann_whitney_u(std::span<const double> sample_a, std::span<const double> sample_b) {
    if (sample_a.empty() || sample_b.empty()) {
        throw std::invalid_argument("mann_whitney_u needs two non-empty samples");
    }
    const std::size_t n1 = sample_a.size();
    const std::size_t n2 = sample_b.size();
    const std::size_t n = n1 + n2;

    struct Entry {
        double value;
        bool from_a;
    };
    std::vector<Entry> pooled;
    pooled.reserve(n);
    for (double v : sample_a) pooled.push_back({v, true});
    for (double v : sample_b) pooled.push_back({v, false});
    std::sort(pooled.begin(), pooled.end(),
              [](const Entry& l, const Entry& r) { return l.value < r.value; });

    double rank_sum_a = 0.0;
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && pooled[j].value == pooled[i].value) ++j;
        const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (pooled[k].from_a) rank_sum_a += mid_rank;
        }
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }

    const double d1 = static_cast<double>(n1);
    const double d2 = static_cast<double>(n2);
    const double dn = static_cast<double>(n);
    MannWhitneyResult result;
    result.u = rank_sum_a - d1 * (d1 + 1.0) / 2.0;
    const double mean = d1 * d2 / 2.0;
    const double variance = d1 * d2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    if (!(variance > 0.0)) {
        result.z = 0.0;
        result.p_value = 1.0;
        return result;
    }
    const double deviation = std::max(std::abs(result.u - mean) - 0.5, 0.0);
    result.z = std::copysign(deviation / std::sqrt(variance), result.u - mean);
    result.p_value = std::min(1.0, std::erfc(deviation / std::sqrt(variance) / std::sqrt(2.0)));
    return result;
}

double bonferroni(double p_value, std::size_t comparisons) {
    return std::min(1.0, p_value * static_cast<double>(comparisons));
}

double quantile(std::span<const double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("summary of an empty sample");
    Summary s;
    s.count = values.size();
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    s.median = quantile(values, 0.5);
    s.q1 = quantile(values, 0.25);
    s.q3 = quantile(values, 0.75);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    return s;
}

}  // namespace activeteach
