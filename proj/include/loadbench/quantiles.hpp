#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace loadbench {

/// Ordered quantile levels; default is the benchmark's 99-point grid
/// 0.01..0.99.
struct QuantileGrid {
    std::vector<double> levels;

    static QuantileGrid default_grid() {
        QuantileGrid g;
        g.levels.reserve(99);
        for (int i = 1; i <= 99; ++i) g.levels.push_back(i / 100.0);
        return g;
    }

    std::size_t size() const { return levels.size(); }

    void validate() const {
        if (levels.empty()) throw std::runtime_error("quantile grid is empty");
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (!(levels[i] > 0.0 && levels[i] < 1.0))
                throw std::runtime_error("quantile level outside (0,1)");
            if (i > 0 && !(levels[i] > levels[i - 1]))
                throw std::runtime_error("quantile levels not strictly increasing");
        }
    }

    /// Index of an exactly matching level, or -1.
    int index_of(double level, double tol = 1e-9) const {
        for (std::size_t i = 0; i < levels.size(); ++i)
            if (std::fabs(levels[i] - level) <= tol) return static_cast<int>(i);
        return -1;
    }
};

/// Per-timestamp vectors of predicted values aligned with a QuantileGrid.
/// Monotonicity across levels is not guaranteed before reordering.
struct QuantileForecast {
    QuantileGrid grid;
    std::vector<std::int64_t> timestamps;
    std::vector<double> values; // row-major, timestamps.size() x grid.size()

    std::size_t rows() const { return timestamps.size(); }

    double at(std::size_t row, std::size_t level_idx) const {
        return values[row * grid.size() + level_idx];
    }

    double& at(std::size_t row, std::size_t level_idx) { return values[row * grid.size() + level_idx]; }
};

/// Tolerance for "cumulative mass reaches q" comparisons: grid levels like
/// 0.07 and masses like 3/15 are not exactly representable, and the inf
/// convention must not flip on the last ulp.
constexpr double kCdfTolerance = 1e-9;

/// Left-continuous empirical quantile, inf{y : F(y) >= q}, on sorted data.
/// The single convention used by every estimator in the model zoo.
inline double empirical_quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::runtime_error("empirical quantile of empty sample");
    const std::size_t n = sorted.size();
    double rank = std::ceil(q * static_cast<double>(n) - kCdfTolerance);
    std::size_t idx = rank < 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
    if (idx >= n) idx = n - 1;
    return sorted[idx];
}

/// Fill one forecast row with the grid quantiles of a sample (sorted copy).
inline void grid_quantiles(std::vector<double> sample, const QuantileGrid& grid, double* out_row) {
    std::sort(sample.begin(), sample.end());
    for (std::size_t j = 0; j < grid.size(); ++j)
        out_row[j] = empirical_quantile_sorted(sample, grid.levels[j]);
}

/// Weighted generalisation: inf{y : sum of weights of values <= y >= q}.
/// Pairs are (value, weight); weights need not be normalised exactly, the
/// total is used as the mass.
inline double weighted_quantile(std::vector<std::pair<double, double>>& pairs, double q) {
    if (pairs.empty()) throw std::runtime_error("weighted quantile of empty sample");
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    double cum = 0.0;
    for (const auto& [v, w] : pairs) {
        cum += w;
        if (cum >= q - kCdfTolerance) return v;
    }
    return pairs.back().first;
}

} // namespace loadbench
