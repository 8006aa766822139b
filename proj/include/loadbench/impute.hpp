#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "loadbench/series.hpp"

namespace loadbench {

enum class ImputeMethod { linear, knn, state_space };

struct ImputePolicy {
    ImputeMethod method = ImputeMethod::linear;
    int k = 5;              // knn neighbour count
    int pattern_hours = 24; // knn window length, daily periodicity default
    double process_noise = 1.0;
    double observation_noise = 1.0;

    void validate() const {
        if (k < 1) throw std::runtime_error("impute: k must be >= 1");
        if (pattern_hours < 1) throw std::runtime_error("impute: pattern_hours must be >= 1");
        if (!(process_noise > 0.0) || !(observation_noise > 0.0))
            throw std::runtime_error("impute: noise variances must be > 0");
    }
};

inline ImputeMethod impute_method_from_string(const std::string& s) {
    if (s == "linear") return ImputeMethod::linear;
    if (s == "knn") return ImputeMethod::knn;
    if (s == "state_space") return ImputeMethod::state_space;
    throw std::runtime_error("impute: unknown method '" + s + "'");
}

/// Interior gaps are interpolated between the nearest observed neighbours;
/// leading/trailing gaps extend the nearest observed value.
inline std::vector<double> impute_linear(const Column& col) {
    const std::size_t n = col.size();
    std::vector<double> out(n);
    std::vector<std::size_t> obs;
    for (std::size_t i = 0; i < n; ++i)
        if (!col.missing[i]) obs.push_back(i);
    if (obs.empty()) throw std::runtime_error("impute_linear: all values missing");

    for (std::size_t i = 0; i < n; ++i) {
        if (!col.missing[i]) {
            out[i] = col.values[i];
            continue;
        }
        auto right = std::lower_bound(obs.begin(), obs.end(), i);
        if (right == obs.begin()) {
            out[i] = col.values[obs.front()];
        } else if (right == obs.end()) {
            out[i] = col.values[obs.back()];
        } else {
            std::size_t r = *right, l = *(right - 1);
            double w = static_cast<double>(i - l) / static_cast<double>(r - l);
            out[i] = (1.0 - w) * col.values[l] + w * col.values[r];
        }
    }
    return out;
}

/// Pattern-matching fill: for each missing cell, compare its surrounding
/// window (observed positions only) against every complete window in the
/// series and average the center values of the k nearest matches.
inline std::vector<double> impute_knn(const Column& col, const ImputePolicy& policy) {
    policy.validate();
    const std::size_t n = col.size();
    const int w = policy.pattern_hours;
    const int lo = -(w / 2);            // window offsets lo..hi, center included,
    const int hi = lo + w - 1;          // total length == pattern_hours

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = col.values[i];

    // candidate centers whose full window is observed
    std::vector<std::size_t> candidates;
    for (std::size_t c = 0; c < n; ++c) {
        bool ok = static_cast<std::int64_t>(c) + lo >= 0 && c + hi < n;
        for (int off = lo; ok && off <= hi; ++off)
            if (col.missing[c + off]) ok = false;
        if (ok) candidates.push_back(c);
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!col.missing[i]) continue;
        // observed offsets of the query window
        std::vector<int> offsets;
        for (int off = lo; off <= hi; ++off) {
            if (off == 0) continue;
            std::int64_t j = static_cast<std::int64_t>(i) + off;
            if (j >= 0 && j < static_cast<std::int64_t>(n) && !col.missing[j]) offsets.push_back(off);
        }
        if (offsets.empty() || candidates.empty())
            throw std::runtime_error("impute_knn: no candidate window shares an observed position");

        std::vector<std::pair<double, std::size_t>> scored; // (distance, center)
        scored.reserve(candidates.size());
        for (std::size_t c : candidates) {
            if (c == i) continue;
            double d2 = 0.0;
            for (int off : offsets) {
                double diff = col.values[i + off] - col.values[c + off];
                d2 += diff * diff;
            }
            scored.emplace_back(d2, c);
        }
        if (scored.empty())
            throw std::runtime_error("impute_knn: no candidate window shares an observed position");
        std::stable_sort(scored.begin(), scored.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::size_t use = std::min<std::size_t>(static_cast<std::size_t>(policy.k), scored.size());
        double sum = 0.0;
        for (std::size_t j = 0; j < use; ++j) sum += col.values[scored[j].second];
        out[i] = sum / static_cast<double>(use);
    }
    return out;
}

namespace detail {

/// Local-level Kalman filter + RTS smoother. Random-walk state, Gaussian
/// observation; missing observations skip the update step.
inline std::vector<double> local_level_smooth(const std::vector<double>& y,
                                              const std::vector<std::uint8_t>& miss, double q, double r) {
    const std::size_t n = y.size();
    std::vector<double> x_pred(n), p_pred(n), x_filt(n), p_filt(n);

    // diffuse start around the first observation
    double x0 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (!miss[i]) {
            x0 = y[i];
            break;
        }
    double x = x0, p = 1e7 * (q + r);

    for (std::size_t t = 0; t < n; ++t) {
        if (t > 0) p += q;
        x_pred[t] = x;
        p_pred[t] = p;
        if (!miss[t]) {
            double gain = p / (p + r);
            x += gain * (y[t] - x);
            p *= (1.0 - gain);
        }
        x_filt[t] = x;
        p_filt[t] = p;
    }

    std::vector<double> x_smooth(n);
    x_smooth[n - 1] = x_filt[n - 1];
    for (std::size_t t = n - 1; t-- > 0;) {
        double c = p_filt[t] / p_pred[t + 1];
        x_smooth[t] = x_filt[t] + c * (x_smooth[t + 1] - x_pred[t + 1]);
    }
    return x_smooth;
}

} // namespace detail

/// ARIMA-family fill via its simplest member: the local-level state-space
/// model, forward filtered and backward smoothed. Missing cells receive the
/// smoothed state mean; observed cells are kept verbatim.
inline std::vector<double> impute_state_space(const Column& col, const ImputePolicy& policy) {
    policy.validate();
    const std::size_t n = col.size();
    std::size_t observed = n - col.missing_count();
    if (observed < 2) throw std::runtime_error("impute_state_space: needs >= 2 observed values");

    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) y[i] = col.missing[i] ? 0.0 : col.values[i];
    std::vector<double> sm =
        detail::local_level_smooth(y, col.missing, policy.process_noise, policy.observation_noise);

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = col.missing[i] ? sm[i] : col.values[i];
    return out;
}

inline std::vector<double> impute_column(const Column& col, const ImputePolicy& policy) {
    switch (policy.method) {
        case ImputeMethod::linear: return impute_linear(col);
        case ImputeMethod::knn: return impute_knn(col, policy);
        case ImputeMethod::state_space: return impute_state_space(col, policy);
    }
    throw std::runtime_error("impute_column: bad method");
}

/// Fill load and every covariate with the same policy, independently per
/// column. The returned table is complete (no missing cells).
inline SeriesTable impute_table(const SeriesTable& t, const ImputePolicy& policy) {
    SeriesTable out = t;
    auto fill = [&](Column& c) {
        if (c.complete()) return;
        std::vector<double> v = impute_column(c, policy);
        c.values = std::move(v);
        std::fill(c.missing.begin(), c.missing.end(), 0);
    };
    fill(out.load);
    for (auto& [name, col] : out.covariates) fill(col);
    out.validate();
    return out;
}

} // namespace loadbench
