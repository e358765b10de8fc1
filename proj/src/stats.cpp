#include "diffmod/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace diffmod::stats {

double percentile(std::span<const double> values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = (static_cast<double>(sorted.size()) - 1.0) * q / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

double median(std::span<const double> values) { return percentile(values, 50.0); }

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("Mann-Whitney U needs two non-empty samples");
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    const std::size_t n = n1 + n2;
    std::vector<std::pair<double, int>> pooled;
    pooled.reserve(n);
    for (double v : a) pooled.emplace_back(v, 0);
    for (double v : b) pooled.emplace_back(v, 1);
    std::sort(pooled.begin(), pooled.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

    double rank_sum_a = 0.0;
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && pooled[j].first == pooled[i].first) ++j;
        const double avg_rank = (static_cast<double>(i) + 1.0 + static_cast<double>(j)) / 2.0;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        for (std::size_t k = i; k < j; ++k) {
            if (pooled[k].second == 0) rank_sum_a += avg_rank;
        }
        i = j;
    }

    MannWhitneyResult result;
    const double dn1 = static_cast<double>(n1);
    const double dn2 = static_cast<double>(n2);
    const double dn = static_cast<double>(n);
    result.u = rank_sum_a - dn1 * (dn1 + 1.0) / 2.0;
    const double mean_u = dn1 * dn2 / 2.0;
    const double variance = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    if (variance <= 0.0) return result;
    const double deviation = std::max(0.0, std::abs(result.u - mean_u) - 0.5);
    result.z = deviation / std::sqrt(variance);
    result.p_value = std::min(1.0, std::erfc(result.z / std::sqrt(2.0)));
    return result;
}

}  // namespace diffmod::stats
