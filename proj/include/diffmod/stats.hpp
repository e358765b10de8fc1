#pragma once

#include <span>
#include <vector>

namespace diffmod::stats {

/// Linear-interpolation percentile (position (n-1)*q/100 in sorted order).
/// Throws std::invalid_argument on an empty sample.
double percentile(std::span<const double> values, double q);
double median(std::span<const double> values);

struct MannWhitneyResult {
    double u = 0.0;        // U statistic of the first sample
    double z = 0.0;
    double p_value = 1.0;  // two-sided
};

/// Two-sided Mann-Whitney U test with average ranks for ties, tie-corrected
/// variance and continuity correction (normal approximation).
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

}  // namespace diffmod::stats
