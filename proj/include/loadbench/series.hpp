#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace loadbench {

/// One value column with an explicit missingness mask. A cell is missing
/// exactly when the mask is set; missing cells hold NaN so that accidental
/// use is loud.
struct Column {
    std::vector<double> values;
    std::vector<std::uint8_t> missing;

    std::size_t size() const { return values.size(); }

    void push(double v, bool miss) {
        if (miss || !std::isfinite(v)) {
            values.push_back(std::numeric_limits<double>::quiet_NaN());
            missing.push_back(1);
        } else {
            values.push_back(v);
            missing.push_back(0);
        }
    }

    void push_missing() { push(0.0, true); }

    bool complete() const {
        for (std::uint8_t m : missing)
            if (m) return false;
        return true;
    }

    std::size_t missing_count() const {
        std::size_t c = 0;
        for (std::uint8_t m : missing) c += m;
        return c;
    }
};

/// Aligned hourly series: strictly increasing timestamps (epoch seconds,
/// timezone-naive), a load column, and named covariate columns of equal
/// length. The constant 1-hour step is established by regularize_hourly.
struct SeriesTable {
    std::vector<std::int64_t> timestamps; // epoch seconds
    Column load;
    std::vector<std::pair<std::string, Column>> covariates; // keeps file order
    std::size_t zero_load_count = 0; // exact zeros seen at parse time

    std::size_t size() const { return timestamps.size(); }

    const Column* find_covariate(const std::string& name) const {
        for (const auto& [n, c] : covariates)
            if (n == name) return &c;
        return nullptr;
    }

    Column* find_covariate(const std::string& name) {
        for (auto& [n, c] : covariates)
            if (n == name) return &c;
        return nullptr;
    }

    /// Checks the shared-length and mask invariants; throws on violation.
    void validate() const {
        const std::size_t n = timestamps.size();
        auto check_col = [&](const Column& c, const std::string& what) {
            if (c.values.size() != n || c.missing.size() != n)
                throw std::runtime_error("series column '" + what + "' length mismatch");
            for (std::size_t i = 0; i < n; ++i) {
                const bool bad = !std::isfinite(c.values[i]);
                if (bad != (c.missing[i] != 0))
                    throw std::runtime_error("series column '" + what + "' mask inconsistent at row " +
                                             std::to_string(i));
            }
        };
        check_col(load, "load");
        for (const auto& [name, col] : covariates) check_col(col, name);
        for (std::size_t i = 1; i < n; ++i)
            if (timestamps[i] <= timestamps[i - 1])
                throw std::runtime_error("timestamps not strictly increasing at row " + std::to_string(i));
    }

    /// True once every step is exactly one hour.
    bool hourly_regular() const {
        for (std::size_t i = 1; i < timestamps.size(); ++i)
            if (timestamps[i] - timestamps[i - 1] != 3600) return false;
        return !timestamps.empty();
    }
};

/// Chronological split request. boundary_index is derived, see
/// split_train_test.
struct SplitSpec {
    double test_fraction = 0.25;
};

/// Concatenate two tables that abut in time (t1 ends right before t2
/// starts). Used after per-part imputation to rebuild the full series.
inline SeriesTable concat(const SeriesTable& a, const SeriesTable& b) {
    if (a.size() == 0) return b;
    if (b.size() == 0) return a;
    if (a.covariates.size() != b.covariates.size())
        throw std::runtime_error("concat: covariate sets differ");
    SeriesTable out = a;
    out.timestamps.insert(out.timestamps.end(), b.timestamps.begin(), b.timestamps.end());
    out.load.values.insert(out.load.values.end(), b.load.values.begin(), b.load.values.end());
    out.load.missing.insert(out.load.missing.end(), b.load.missing.begin(), b.load.missing.end());
    for (std::size_t c = 0; c < out.covariates.size(); ++c) {
        if (out.covariates[c].first != b.covariates[c].first)
            throw std::runtime_error("concat: covariate order differs");
        auto& dst = out.covariates[c].second;
        const auto& src = b.covariates[c].second;
        dst.values.insert(dst.values.end(), src.values.begin(), src.values.end());
        dst.missing.insert(dst.missing.end(), src.missing.begin(), src.missing.end());
    }
    out.zero_load_count += b.zero_load_count;
    out.validate();
    return out;
}

} // namespace loadbench
