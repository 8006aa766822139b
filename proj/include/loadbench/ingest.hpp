#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "loadbench/series.hpp"
#include "loadbench/timeutil.hpp"

namespace loadbench {

/// Column-name mapping for CSV ingestion. When covariate_columns is empty
/// every non-timestamp, non-load column is taken as a covariate.
struct CsvSchema {
    std::string timestamp_column = "timestamp";
    std::string load_column = "load";
    std::vector<std::string> covariate_columns;
};

struct ParseOptions {
    /// Exact zeros in the load column are treated as missing by default;
    /// the archive files use zero padding for meter outages.
    bool zeros_as_missing = true;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(field);
            field.clear();
        } else if (ch != '\r') {
            field += ch;
        }
    }
    out.push_back(field);
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

/// Blank cells and NaN literals are missing; anything unparseable is also
/// treated as missing rather than aborting the file.
inline std::optional<double> parse_cell(const std::string& raw) {
    std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    if (s == "NaN" || s == "nan" || s == "NAN" || s == "NA" || s == "null") return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

/// Parse an hourly load CSV into a SeriesTable. Rows with unparseable
/// timestamps are dropped; rows are sorted by time and duplicate
/// timestamps collapsed (first occurrence wins). The result is strictly
/// increasing but may still contain gaps; see regularize_hourly.
inline SeriesTable parse_csv(const std::string& path, const CsvSchema& schema,
                             const ParseOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_csv: cannot open '" + path + "'");

    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("parse_csv: empty file '" + path + "'");
    if (header.size() >= 3 && static_cast<unsigned char>(header[0]) == 0xEF) header = header.substr(3); // BOM

    std::vector<std::string> names = detail::split_csv_line(header);
    for (auto& n : names) n = detail::trim(n);

    auto col_index = [&](const std::string& name) -> int {
        auto it = std::find(names.begin(), names.end(), name);
        return it == names.end() ? -1 : static_cast<int>(it - names.begin());
    };

    const int ts_idx = col_index(schema.timestamp_column);
    if (ts_idx < 0)
        throw std::runtime_error("parse_csv: missing timestamp column '" + schema.timestamp_column + "'");
    const int load_idx = col_index(schema.load_column);
    if (load_idx < 0)
        throw std::runtime_error("parse_csv: missing load column '" + schema.load_column + "'");

    std::vector<std::pair<std::string, int>> cov_cols;
    if (schema.covariate_columns.empty()) {
        for (int i = 0; i < static_cast<int>(names.size()); ++i)
            if (i != ts_idx && i != load_idx && !names[i].empty()) cov_cols.emplace_back(names[i], i);
    } else {
        for (const auto& name : schema.covariate_columns) {
            int idx = col_index(name);
            if (idx < 0) throw std::runtime_error("parse_csv: missing covariate column '" + name + "'");
            cov_cols.emplace_back(name, idx);
        }
    }

    struct Row {
        std::int64_t ts;
        std::optional<double> load;
        std::vector<std::optional<double>> covs;
    };
    std::vector<Row> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> fields = detail::split_csv_line(line);
        if (static_cast<int>(fields.size()) <= std::max(ts_idx, load_idx)) continue;
        auto ts = parse_timestamp(detail::trim(fields[ts_idx]));
        if (!ts) continue; // unparseable timestamp: row rejected
        Row r;
        r.ts = *ts;
        r.load = detail::parse_cell(fields[load_idx]);
        r.covs.reserve(cov_cols.size());
        for (const auto& [name, idx] : cov_cols)
            r.covs.push_back(idx < static_cast<int>(fields.size()) ? detail::parse_cell(fields[idx])
                                                                   : std::nullopt);
        rows.push_back(std::move(r));
    }

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.ts < b.ts; });

    SeriesTable t;
    for (const auto& [name, idx] : cov_cols) t.covariates.emplace_back(name, Column{});
    for (const Row& r : rows) {
        if (!t.timestamps.empty() && r.ts == t.timestamps.back()) continue; // duplicate: first wins
        t.timestamps.push_back(r.ts);
        bool load_missing = !r.load.has_value();
        double load_val = r.load.value_or(0.0);
        if (!load_missing && load_val == 0.0) {
            ++t.zero_load_count;
            if (opts.zeros_as_missing) load_missing = true;
        }
        t.load.push(load_val, load_missing);
        for (std::size_t c = 0; c < cov_cols.size(); ++c)
            t.covariates[c].second.push(r.covs[c].value_or(0.0), !r.covs[c].has_value());
    }
    t.validate();
    return t;
}

/// Canonical CSV output: `timestamp,load,<covariate...>`, empty string for
/// missing cells, %.17g values so a round trip is bit-exact.
inline void write_csv(const SeriesTable& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "'");
    out << "timestamp,load";
    for (const auto& [name, col] : t.covariates) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << format_timestamp(t.timestamps[i]) << ',';
        if (!t.load.missing[i]) out << detail::format_double(t.load.values[i]);
        for (const auto& [name, col] : t.covariates) {
            out << ',';
            if (!col.missing[i]) out << detail::format_double(col.values[i]);
        }
        out << '\n';
    }
}

/// Align a strictly increasing table to the constant 1-hour grid: gaps are
/// filled with explicit missing rows. Timestamps off the hour mean the base
/// resolution is not hourly and are rejected.
inline SeriesTable regularize_hourly(const SeriesTable& t) {
    if (t.size() == 0) return t;
    for (std::int64_t ts : t.timestamps)
        if (ts % 3600 != 0)
            throw std::runtime_error("regularize_hourly: timestamp " + format_timestamp(ts) +
                                     " is not on the hour (sub-hourly data unsupported)");
    SeriesTable out;
    for (const auto& [name, col] : t.covariates) out.covariates.emplace_back(name, Column{});
    out.zero_load_count = t.zero_load_count;

    std::int64_t expect = t.timestamps.front();
    for (std::size_t i = 0; i < t.size(); ++i) {
        while (expect < t.timestamps[i]) { // gap: insert masked rows
            out.timestamps.push_back(expect);
            out.load.push_missing();
            for (auto& [name, col] : out.covariates) col.push_missing();
            expect += 3600;
        }
        out.timestamps.push_back(t.timestamps[i]);
        out.load.push(t.load.values[i], t.load.missing[i] != 0);
        for (std::size_t c = 0; c < out.covariates.size(); ++c)
            out.covariates[c].second.push(t.covariates[c].second.values[i],
                                          t.covariates[c].second.missing[i] != 0);
        expect = t.timestamps[i] + 3600;
    }
    out.validate();
    return out;
}

/// Chronological split at floor((1-test_fraction)*n) rounded down to a day
/// boundary (multiples of 24 rows from the series start). Both parts must
/// keep at least 8 full days: the day-ahead setting consumes 7 lag days.
inline std::pair<SeriesTable, SeriesTable> split_train_test(const SeriesTable& t, const SplitSpec& s) {
    if (!(s.test_fraction > 0.0 && s.test_fraction < 1.0))
        throw std::runtime_error("split_train_test: test_fraction must be in (0,1)");
    if (!t.hourly_regular()) throw std::runtime_error("split_train_test: table is not hourly-regular");

    const std::size_t n = t.size();
    std::size_t boundary = static_cast<std::size_t>(std::floor((1.0 - s.test_fraction) * static_cast<double>(n)));
    boundary -= boundary % 24;

    if (boundary < 8 * 24 || n - boundary < 8 * 24)
        throw std::runtime_error("split_train_test: split leaves fewer than 8 full days in a part");

    auto take = [&](std::size_t b, std::size_t e) {
        SeriesTable part;
        part.timestamps.assign(t.timestamps.begin() + b, t.timestamps.begin() + e);
        part.load.values.assign(t.load.values.begin() + b, t.load.values.begin() + e);
        part.load.missing.assign(t.load.missing.begin() + b, t.load.missing.begin() + e);
        for (const auto& [name, col] : t.covariates) {
            Column c;
            c.values.assign(col.values.begin() + b, col.values.begin() + e);
            c.missing.assign(col.missing.begin() + b, col.missing.begin() + e);
            part.covariates.emplace_back(name, std::move(c));
        }
        return part;
    };
    return {take(0, boundary), take(boundary, n)};
}

} // namespace loadbench
