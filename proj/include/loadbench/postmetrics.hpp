#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "loadbench/quantiles.hpp"

namespace loadbench {

/// Repair quantile crossing: each row's values sorted ascending, grid
/// unchanged. The multiset of values per row is preserved.
inline QuantileForecast reorder_quantiles(const QuantileForecast& f) {
    QuantileForecast out = f;
    const std::size_t q = f.grid.size();
    for (std::size_t r = 0; r < out.rows(); ++r)
        std::sort(out.values.begin() + r * q, out.values.begin() + (r + 1) * q);
    return out;
}

struct PinballResult {
    std::vector<double> per_level;
    double grand_mean = 0.0;
};

/// Mean pinball loss per level, q*(y-f)+ + (1-q)*(f-y)+, plus the grand
/// mean across levels (the benchmark's headline score).
inline PinballResult pinball(const QuantileForecast& f, const std::vector<double>& actual) {
    if (actual.size() != f.rows()) throw std::runtime_error("pinball: length mismatch");
    if (f.rows() == 0) throw std::runtime_error("pinball: empty forecast");
    PinballResult res;
    res.per_level.assign(f.grid.size(), 0.0);
    for (std::size_t r = 0; r < f.rows(); ++r) {
        for (std::size_t j = 0; j < f.grid.size(); ++j) {
            const double q = f.grid.levels[j];
            const double d = actual[r] - f.at(r, j);
            res.per_level[j] += d >= 0.0 ? q * d : (q - 1.0) * d;
        }
    }
    for (double& v : res.per_level) v /= static_cast<double>(f.rows());
    for (double v : res.per_level) res.grand_mean += v;
    res.grand_mean /= static_cast<double>(f.grid.size());
    return res;
}

/// Winkler interval score at miss rate alpha: the [alpha/2, 1-alpha/2]
/// interval width plus 2/alpha-weighted penalties for misses; mean over
/// rows. Both interval levels must exist on the grid.
inline double winkler(const QuantileForecast& f, const std::vector<double>& actual, double alpha) {
    if (actual.size() != f.rows()) throw std::runtime_error("winkler: length mismatch");
    int lo_idx = f.grid.index_of(alpha / 2.0);
    int hi_idx = f.grid.index_of(1.0 - alpha / 2.0);
    if (lo_idx < 0 || hi_idx < 0)
        throw std::runtime_error("winkler: interval levels not on the forecast grid");
    double sum = 0.0;
    for (std::size_t r = 0; r < f.rows(); ++r) {
        const double l = f.at(r, lo_idx), u = f.at(r, hi_idx), y = actual[r];
        double score = u - l;
        if (y < l) score += 2.0 * (l - y) / alpha;
        if (y > u) score += 2.0 * (y - u) / alpha;
        sum += score;
    }
    return sum / static_cast<double>(f.rows());
}

/// Per level: empirical coverage minus nominal, P(y <= f_q) - q.
inline std::vector<double> coverage_error(const QuantileForecast& f, const std::vector<double>& actual) {
    if (actual.size() != f.rows()) throw std::runtime_error("coverage_error: length mismatch");
    std::vector<double> out(f.grid.size(), 0.0);
    for (std::size_t r = 0; r < f.rows(); ++r)
        for (std::size_t j = 0; j < f.grid.size(); ++j)
            if (actual[r] <= f.at(r, j)) out[j] += 1.0;
    for (std::size_t j = 0; j < f.grid.size(); ++j)
        out[j] = out[j] / static_cast<double>(f.rows()) - f.grid.levels[j];
    return out;
}

/// Mean absolute deviation between nominal levels and empirical coverage.
inline double calibration_error(const QuantileForecast& f, const std::vector<double>& actual) {
    std::vector<double> cov = coverage_error(f, actual);
    double sum = 0.0;
    for (double v : cov) sum += std::fabs(v);
    return sum / static_cast<double>(cov.size());
}

/// Riemann approximation of the CRPS quantile integral: twice the
/// grand-mean pinball. Requires a reasonably dense grid.
inline double crps_approx(const QuantileForecast& f, const std::vector<double>& actual) {
    if (f.grid.size() < 10) throw std::runtime_error("crps_approx: grid too sparse (< 10 levels)");
    return 2.0 * pinball(f, actual).grand_mean;
}

struct PointMetrics {
    double mape = 0.0; // percent, denominator floored as in compute_fep
    double mae = 0.0;
    double rmse = 0.0;
};

inline PointMetrics point_metrics(const std::vector<double>& pred, const std::vector<double>& actual,
                                  double fep_floor = 1e-8) {
    if (pred.size() != actual.size() || pred.empty())
        throw std::runtime_error("point_metrics: length mismatch or empty");
    PointMetrics m;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - actual[i];
        m.mae += std::fabs(e);
        m.rmse += e * e;
        m.mape += std::fabs(e) / std::max(std::fabs(actual[i]), fep_floor);
    }
    const double n = static_cast<double>(pred.size());
    m.mae /= n;
    m.rmse = std::sqrt(m.rmse / n);
    m.mape = 100.0 * m.mape / n;
    return m;
}

/// (quantile level x metric) table plus scalar aggregates. The Winkler
/// column is the score at the reporting alpha (0.10 by default); scores at
/// every requested alpha live in `winkler_by_alpha`.
struct MetricMatrix {
    std::vector<double> levels;
    std::vector<double> pinball_col;
    double winkler_value = 0.0;     // reporting alpha
    double winkler_alpha = 0.10;
    std::vector<double> coverage_col;
    std::vector<double> calibration_col; // |coverage error| contributions
    std::map<double, double> winkler_by_alpha;

    double crps = 0.0;
    double mape = 0.0;
    double mae = 0.0;
    double rmse = 0.0;

    double grand_mean_pinball = 0.0;
    double calibration = 0.0;

    std::size_t rows() const { return levels.size(); }
    static constexpr int kColumns = 4;
};

/// Assemble the full matrix. The forecast should be reordered first; the
/// point metrics read the median column as the point forecast.
inline MetricMatrix metric_matrix(const QuantileForecast& f, const std::vector<double>& actual,
                                  const std::vector<double>& alphas = {0.02, 0.10, 0.20},
                                  double fep_floor = 1e-8) {
    MetricMatrix m;
    m.levels = f.grid.levels;
    PinballResult pb = pinball(f, actual);
    m.pinball_col = pb.per_level;
    m.grand_mean_pinball = pb.grand_mean;
    m.coverage_col = coverage_error(f, actual);
    m.calibration_col.resize(m.coverage_col.size());
    for (std::size_t j = 0; j < m.coverage_col.size(); ++j)
        m.calibration_col[j] = std::fabs(m.coverage_col[j]);
    m.calibration = calibration_error(f, actual);
    for (double a : alphas) m.winkler_by_alpha[a] = winkler(f, actual, a);
    m.winkler_alpha = m.winkler_by_alpha.count(0.10) ? 0.10 : alphas.front();
    m.winkler_value = m.winkler_by_alpha.at(m.winkler_alpha);
    m.crps = crps_approx(f, actual);

    int med = f.grid.index_of(0.5);
    if (med >= 0) {
        std::vector<double> point(f.rows());
        for (std::size_t r = 0; r < f.rows(); ++r) point[r] = f.at(r, med);
        PointMetrics pm = point_metrics(point, actual, fep_floor);
        m.mape = pm.mape;
        m.mae = pm.mae;
        m.rmse = pm.rmse;
    }
    return m;
}

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

/// CSV export, one row per quantile:
/// `quantile,pinball,winkler_a10,coverage_error,calibration_contrib`.
inline void write_metric_matrix_csv(const MetricMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_metric_matrix_csv: cannot open '" + path + "'");
    out << "quantile,pinball,winkler_a" << static_cast<int>(std::lround(m.winkler_alpha * 100))
        << ",coverage_error,calibration_contrib\n";
    for (std::size_t j = 0; j < m.rows(); ++j)
        out << detail::fmt17(m.levels[j]) << ',' << detail::fmt17(m.pinball_col[j]) << ','
            << detail::fmt17(m.winkler_value) << ',' << detail::fmt17(m.coverage_col[j]) << ','
            << detail::fmt17(m.calibration_col[j]) << '\n';
}

inline MetricMatrix read_metric_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_metric_matrix_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_metric_matrix_csv: empty file");
    MetricMatrix m;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double q, pb, wk, cov, cal;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &q, &pb, &wk, &cov, &cal) == 5) {
            m.levels.push_back(q);
            m.pinball_col.push_back(pb);
            m.winkler_value = wk;
            m.coverage_col.push_back(cov);
            m.calibration_col.push_back(cal);
        }
    }
    double s = 0.0;
    for (double v : m.pinball_col) s += v;
    m.grand_mean_pinball = m.pinball_col.empty() ? 0.0 : s / static_cast<double>(m.pinball_col.size());
    return m;
}

/// Minimal heatmap: one <rect class="cell"> per matrix cell, columns
/// normalised independently.
inline void write_metric_matrix_svg(const MetricMatrix& m, const std::string& path) {
    const int cell_w = 90, cell_h = 7, left = 60, top = 30;
    const int cols = MetricMatrix::kColumns;
    const char* col_names[cols] = {"pinball", "winkler", "coverage_err", "calib_contrib"};

    auto column = [&](int c) -> const std::vector<double>* {
        switch (c) {
            case 0: return &m.pinball_col;
            case 2: return &m.coverage_col;
            case 3: return &m.calibration_col;
            default: return nullptr; // winkler column is the constant score
        }
    };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_metric_matrix_svg: cannot open '" + path + "'");
    const int width = left + cols * cell_w + 20;
    const int height = top + static_cast<int>(m.rows()) * cell_h + 20;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\">\n";
    for (int c = 0; c < cols; ++c)
        out << "<text x=\"" << left + c * cell_w + 4 << "\" y=\"" << top - 8
            << "\" font-size=\"10\">" << col_names[c] << "</text>\n";

    for (int c = 0; c < cols; ++c) {
        const std::vector<double>* col = column(c);
        double mn = 0.0, mx = 1.0;
        if (col && !col->empty()) {
            mn = *std::min_element(col->begin(), col->end());
            mx = *std::max_element(col->begin(), col->end());
        }
        for (std::size_t r = 0; r < m.rows(); ++r) {
            double v = col ? (*col)[r] : m.winkler_value;
            double t = col && mx > mn ? (v - mn) / (mx - mn) : 0.5;
            int red = static_cast<int>(255 * t);
            int blue = static_cast<int>(255 * (1.0 - t));
            out << "<rect class=\"cell\" x=\"" << left + c * cell_w << "\" y=\""
                << top + static_cast<int>(r) * cell_h << "\" width=\"" << cell_w << "\" height=\""
                << cell_h << "\" fill=\"rgb(" << red << ",80," << blue << ")\"/>\n";
        }
    }
    for (std::size_t r = 0; r < m.rows(); r += 10)
        out << "<text x=\"4\" y=\"" << top + static_cast<int>(r) * cell_h + cell_h
            << "\" font-size=\"9\">" << m.levels[r] << "</text>\n";
    out << "</svg>\n";
}

} // namespace loadbench
