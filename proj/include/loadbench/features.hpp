#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "loadbench/series.hpp"
#include "loadbench/timeutil.hpp"

namespace loadbench {

constexpr int kLagDays = 7;          // same-hour lags of the previous 7 days
constexpr int kOneHotDim = 24 + 7 + 12;
constexpr int kTempPowers = 3;

struct CalendarVector {
    int hour;    // 0..23
    int weekday; // 0 = Monday .. 6 = Sunday
    int month;   // 1..12
};

inline CalendarVector calendar_from_timestamp(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    CivilDate cd = civil_from_days(days);
    return {static_cast<int>(rem / 3600), weekday_from_days(days), static_cast<int>(cd.month)};
}

/// 43-dim one-hot: hour block [0,24), weekday block [24,31), month block
/// [31,43). Exactly three ones for any valid input.
inline void onehot(const CalendarVector& c, std::span<double> out) {
    if (c.hour < 0 || c.hour > 23 || c.weekday < 0 || c.weekday > 6 || c.month < 1 || c.month > 12)
        throw std::runtime_error("onehot: calendar field out of range");
    if (out.size() != kOneHotDim) throw std::runtime_error("onehot: output must be 43-dim");
    for (double& v : out) v = 0.0;
    out[c.hour] = 1.0;
    out[24 + c.weekday] = 1.0;
    out[31 + (c.month - 1)] = 1.0;
}

inline std::vector<double> onehot(const CalendarVector& c) {
    std::vector<double> v(kOneHotDim, 0.0);
    onehot(c, v);
    return v;
}

/// Calendar-temperature coupling: entry (i,p) = onehot[i] * T^(p+1),
/// p in {0,1,2}. Emulates per-calendar-cell temperature response models.
inline void couple(std::span<const double> onehot_vec, double temperature, std::span<double> out) {
    if (!std::isfinite(temperature)) throw std::runtime_error("couple: non-finite temperature");
    if (onehot_vec.size() != kOneHotDim || out.size() != kOneHotDim * kTempPowers)
        throw std::runtime_error("couple: bad dimensions");
    const double t1 = temperature, t2 = t1 * t1, t3 = t2 * t1;
    for (int i = 0; i < kOneHotDim; ++i) {
        out[i * 3 + 0] = onehot_vec[i] * t1;
        out[i * 3 + 1] = onehot_vec[i] * t2;
        out[i * 3 + 2] = onehot_vec[i] * t3;
    }
}

inline std::vector<double> couple(std::span<const double> onehot_vec, double temperature) {
    std::vector<double> v(kOneHotDim * kTempPowers, 0.0);
    couple(onehot_vec, temperature, v);
    return v;
}

/// Block layout of one design-matrix row:
/// [lag_block | calendar_block | temp_block | coupled_block].
struct FeatureLayout {
    int lag_dim = kLagDays;
    int calendar_dim = 0;
    int temp_dim = 0;
    int coupled_dim = 0;
    bool use_coupling = false;
    bool raw_calendar = false;
    bool has_temperature = false;

    int total() const { return lag_dim + calendar_dim + temp_dim + coupled_dim; }
};

/// Per-(day,hour) design matrix for the day-ahead setting, plus the hourly
/// load history it was built from. The history backs the window/persistence
/// baselines, which look up realized same-hour values by timestamp.
struct DayAheadMatrix {
    FeatureLayout layout;
    std::vector<double> features; // row-major, rows() x layout.total()
    std::vector<double> targets;
    std::vector<std::int64_t> timestamps; // target instants, epoch seconds

    std::int64_t history_start = 0; // epoch seconds of history[0]
    std::vector<double> history;    // contiguous hourly loads

    std::size_t rows() const { return targets.size(); }
    int cols() const { return layout.total(); }

    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * static_cast<std::size_t>(cols()), static_cast<std::size_t>(cols())};
    }

    /// Realized load at an hourly instant, or NaN outside the history span.
    double history_at(std::int64_t ts) const {
        std::int64_t idx = (ts - history_start) / 3600;
        if (idx < 0 || idx >= static_cast<std::int64_t>(history.size()) || (ts - history_start) % 3600 != 0)
            return std::numeric_limits<double>::quiet_NaN();
        return history[idx];
    }
};

/// Build the day-ahead matrix: one row per (day, hour) with day >= 7. The
/// table must be complete and hourly-regular. Feature modes:
///  - use_coupling: one-hot calendar, temperature powers, coupled products
///  - use_raw_calendar (and no coupling): integers hour/weekday/month plus
///    raw temperature, the untransformed baseline
///  - neither: one-hot calendar plus temperature powers, no coupling
inline DayAheadMatrix build_day_ahead(const SeriesTable& t, bool use_coupling, bool use_raw_calendar,
                                      const std::string& temperature_column = "") {
    if (!t.hourly_regular()) throw std::runtime_error("build_day_ahead: table is not hourly-regular");
    if (!t.load.complete()) throw std::runtime_error("build_day_ahead: table has missing load cells");
    const std::size_t n = t.size();
    if (n < 8 * 24) throw std::runtime_error("build_day_ahead: series shorter than 8 days");

    const Column* temp = nullptr;
    if (!temperature_column.empty()) {
        temp = t.find_covariate(temperature_column);
        if (temp == nullptr)
            throw std::runtime_error("build_day_ahead: temperature column '" + temperature_column +
                                     "' not found");
        if (!temp->complete())
            throw std::runtime_error("build_day_ahead: temperature column has missing cells");
    }

    DayAheadMatrix m;
    m.layout.has_temperature = temp != nullptr;
    m.layout.use_coupling = use_coupling;
    m.layout.raw_calendar = !use_coupling && use_raw_calendar;
    if (use_coupling) {
        m.layout.calendar_dim = kOneHotDim;
        m.layout.temp_dim = temp ? kTempPowers : 0;
        m.layout.coupled_dim = temp ? kOneHotDim * kTempPowers : 0;
    } else if (use_raw_calendar) {
        m.layout.calendar_dim = 3;
        m.layout.temp_dim = temp ? 1 : 0;
    } else {
        m.layout.calendar_dim = kOneHotDim;
        m.layout.temp_dim = temp ? kTempPowers : 0;
    }

    const int p = m.layout.total();
    const std::size_t first = static_cast<std::size_t>(kLagDays) * 24;
    m.features.reserve((n - first) * static_cast<std::size_t>(p));
    std::vector<double> oh(kOneHotDim), cp(kOneHotDim * kTempPowers);

    for (std::size_t i = first; i < n; ++i) {
        for (int d = kLagDays; d >= 1; --d) // oldest lag (d-7) first
            m.features.push_back(t.load.values[i - static_cast<std::size_t>(d) * 24]);

        CalendarVector cal = calendar_from_timestamp(t.timestamps[i]);
        if (m.layout.raw_calendar) {
            m.features.push_back(static_cast<double>(cal.hour));
            m.features.push_back(static_cast<double>(cal.weekday));
            m.features.push_back(static_cast<double>(cal.month));
            if (temp) m.features.push_back(temp->values[i]);
        } else {
            onehot(cal, oh);
            m.features.insert(m.features.end(), oh.begin(), oh.end());
            if (temp) {
                const double T = temp->values[i];
                m.features.push_back(T);
                m.features.push_back(T * T);
                m.features.push_back(T * T * T);
                if (use_coupling) {
                    couple(oh, T, cp);
                    m.features.insert(m.features.end(), cp.begin(), cp.end());
                }
            }
        }
        m.targets.push_back(t.load.values[i]);
        m.timestamps.push_back(t.timestamps[i]);
    }

    m.history_start = t.timestamps.front();
    m.history = t.load.values;
    return m;
}

/// Partition matrix rows chronologically at a boundary instant. The train
/// part's history is truncated at the boundary so a model fitted on it
/// cannot see test-period values; the test part keeps the full history for
/// rolling-window baselines (realized values strictly before each row).
inline std::pair<DayAheadMatrix, DayAheadMatrix> split_matrix(const DayAheadMatrix& m,
                                                              std::int64_t boundary_ts) {
    DayAheadMatrix train, test;
    train.layout = test.layout = m.layout;
    const int p = m.cols();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        DayAheadMatrix& dst = m.timestamps[i] < boundary_ts ? train : test;
        auto r = m.row(i);
        dst.features.insert(dst.features.end(), r.begin(), r.end());
        dst.targets.push_back(m.targets[i]);
        dst.timestamps.push_back(m.timestamps[i]);
    }
    (void)p;
    train.history_start = test.history_start = m.history_start;
    std::int64_t keep = (boundary_ts - m.history_start) / 3600;
    keep = std::max<std::int64_t>(0, std::min<std::int64_t>(keep, static_cast<std::int64_t>(m.history.size())));
    train.history.assign(m.history.begin(), m.history.begin() + keep);
    test.history = m.history;
    return {train, test};
}

/// Sample autocorrelation, acf[0] = 1. Errors on constant input.
inline std::vector<double> acf(const std::vector<double>& x, int max_lag) {
    const std::size_t n = x.size();
    if (max_lag < 0 || static_cast<std::size_t>(max_lag) >= n)
        throw std::runtime_error("acf: max_lag must be < series length");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    if (var <= 0.0) throw std::runtime_error("acf: series has zero variance");

    std::vector<double> out(static_cast<std::size_t>(max_lag) + 1, 0.0);
    out[0] = 1.0;
    for (int lag = 1; lag <= max_lag; ++lag) {
        double cov = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) cov += (x[t] - mean) * (x[t + lag] - mean);
        out[lag] = cov / var;
    }
    return out;
}

/// Partial autocorrelation by Durbin-Levinson on the acf sequence;
/// pacf[0] = 1 and pacf[1] = acf[1]. A numerically singular step is
/// reported rather than clamped.
inline std::vector<double> pacf(const std::vector<double>& x, int max_lag) {
    std::vector<double> rho = acf(x, max_lag);
    std::vector<double> out(rho.size(), 0.0);
    out[0] = 1.0;
    if (max_lag == 0) return out;

    std::vector<double> phi_prev(rho.size(), 0.0), phi(rho.size(), 0.0);
    double denom_acc = 1.0; // prediction error variance ratio
    out[1] = rho[1];
    phi_prev[1] = rho[1];
    denom_acc *= (1.0 - rho[1] * rho[1]);

    for (int k = 2; k <= max_lag; ++k) {
        if (!(std::fabs(denom_acc) > 1e-12))
            throw std::runtime_error("pacf: Durbin-Levinson system numerically singular at lag " +
                                     std::to_string(k));
        double num = rho[k];
        for (int j = 1; j < k; ++j) num -= phi_prev[j] * rho[k - j];
        double phik = num / denom_acc;
        for (int j = 1; j < k; ++j) phi[j] = phi_prev[j] - phik * phi_prev[k - j];
        phi[k] = phik;
        out[k] = phik;
        denom_acc *= (1.0 - phik * phik);
        std::swap(phi, phi_prev);
    }
    return out;
}

/// Diagnostic export, `lag,acf,pacf`.
inline void write_acf_pacf_csv(const std::vector<double>& x, int max_lag, const std::string& path) {
    std::vector<double> a = acf(x, max_lag);
    std::vector<double> p = pacf(x, max_lag);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_acf_pacf_csv: cannot open '" + path + "'");
    out << "lag,acf,pacf\n";
    for (std::size_t i = 0; i < a.size(); ++i) {
        char buf[80];
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", i, a[i], p[i]);
        out << buf;
    }
}

} // namespace loadbench
