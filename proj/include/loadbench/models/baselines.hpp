#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "loadbench/features.hpp"
#include "loadbench/models/common.hpp"
#include "loadbench/quantiles.hpp"

namespace loadbench {

/// BEQ: every test row receives the empirical grid quantiles of all
/// training targets (a constant forecast).
inline QuantileForecast fit_predict_beq(const DayAheadMatrix& train, const DayAheadMatrix& test,
                                        const QuantileGrid& grid) {
    if (train.rows() == 0) throw std::runtime_error("beq: empty training matrix");
    grid.validate();
    std::vector<double> sorted = train.targets;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> row(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
        row[j] = empirical_quantile_sorted(sorted, grid.levels[j]);

    QuantileForecast f;
    f.grid = grid;
    f.timestamps = test.timestamps;
    f.values.reserve(test.rows() * grid.size());
    for (std::size_t r = 0; r < test.rows(); ++r)
        f.values.insert(f.values.end(), row.begin(), row.end());
    return f;
}

/// BMQ: moving-window quantiles of the same-hour loads over the
/// window_days days immediately preceding each test row, rolling through
/// the test period on realized history.
inline QuantileForecast fit_predict_bmq(const DayAheadMatrix& train, const DayAheadMatrix& test,
                                        const QuantileGrid& grid, int window_days) {
    (void)train; // realized history travels with the test matrix
    if (window_days < 1) throw std::runtime_error("bmq: window_days must be >= 1");
    grid.validate();

    QuantileForecast f;
    f.grid = grid;
    f.timestamps = test.timestamps;
    f.values.resize(test.rows() * grid.size());
    std::vector<double> window(static_cast<std::size_t>(window_days));
    for (std::size_t r = 0; r < test.rows(); ++r) {
        const std::int64_t ts = test.timestamps[r];
        for (int d = 1; d <= window_days; ++d) {
            double v = test.history_at(ts - static_cast<std::int64_t>(d) * 86400);
            if (!std::isfinite(v))
                throw std::runtime_error("bmq: window exceeds available history at the first test day");
            window[static_cast<std::size_t>(d - 1)] = v;
        }
        grid_quantiles(window, grid, &f.values[r * grid.size()]);
    }
    return f;
}

/// BCEP: persistence point forecast (same hour, previous day) plus the
/// empirical quantiles of the training persistence errors.
inline QuantileForecast fit_predict_bcep(const DayAheadMatrix& train, const DayAheadMatrix& test,
                                         const QuantileGrid& grid) {
    if (train.rows() == 0) throw std::runtime_error("bcep: empty training matrix");
    grid.validate();
    const int lag_newest = train.layout.lag_dim - 1; // d-1 sits last in the lag block

    std::vector<double> errors(train.rows());
    for (std::size_t r = 0; r < train.rows(); ++r)
        errors[r] = train.targets[r] - train.row(r)[lag_newest];
    std::sort(errors.begin(), errors.end());
    std::vector<double> err_q(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
        err_q[j] = empirical_quantile_sorted(errors, grid.levels[j]);

    QuantileForecast f;
    f.grid = grid;
    f.timestamps = test.timestamps;
    f.values.resize(test.rows() * grid.size());
    for (std::size_t r = 0; r < test.rows(); ++r) {
        const double persistence = test.row(r)[lag_newest];
        for (std::size_t j = 0; j < grid.size(); ++j) f.at(r, j) = persistence + err_q[j];
    }
    return f;
}

/// QCE: ordinary least squares (ridge-stabilised normal equations, the
/// one-hot blocks are collinear with the intercept) plus empirical
/// residual quantiles.
inline QuantileForecast fit_predict_qce(const DayAheadMatrix& train, const DayAheadMatrix& test,
                                        const QuantileGrid& grid, double ridge = 1e-8) {
    if (train.rows() == 0) throw std::runtime_error("qce: empty training matrix");
    grid.validate();
    const int p = train.cols() + 1; // intercept first
    const std::size_t n = train.rows();

    Eigen::MatrixXd a(n, p);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, 0) = 1.0;
        auto r = train.row(i);
        for (int j = 0; j < train.cols(); ++j) a(i, j + 1) = r[j];
        y(i) = train.targets[i];
    }
    Eigen::MatrixXd ata = a.transpose() * a;
    ata.diagonal().array() += ridge;
    Eigen::VectorXd beta = Eigen::LDLT<Eigen::MatrixXd>(ata).solve(a.transpose() * y);
    if (!beta.allFinite()) throw std::runtime_error("qce: non-finite least-squares solution");

    std::vector<double> residuals(n);
    for (std::size_t i = 0; i < n; ++i) residuals[i] = y(i) - a.row(i).dot(beta);
    std::sort(residuals.begin(), residuals.end());
    std::vector<double> res_q(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
        res_q[j] = empirical_quantile_sorted(residuals, grid.levels[j]);

    QuantileForecast f;
    f.grid = grid;
    f.timestamps = test.timestamps;
    f.values.resize(test.rows() * grid.size());
    for (std::size_t r = 0; r < test.rows(); ++r) {
        double pred = beta(0);
        auto row = test.row(r);
        for (int j = 0; j < test.cols(); ++j) pred += beta(j + 1) * row[j];
        for (std::size_t j = 0; j < grid.size(); ++j) f.at(r, j) = pred + res_q[j];
    }
    return f;
}

/// QKNN: grid quantiles of the k nearest training targets in standardised
/// feature space (Euclidean distance, index tie-break for determinism).
inline QuantileForecast fit_predict_qknn(const DayAheadMatrix& train, const DayAheadMatrix& test,
                                         const QuantileGrid& grid, int k) {
    if (k < 1 || static_cast<std::size_t>(k) > train.rows())
        throw std::runtime_error("qknn: k must be in [1, train rows]");
    grid.validate();
    const int p = train.cols();
    Standardizer std_ = Standardizer::fit(train);

    std::vector<double> ztrain(train.rows() * static_cast<std::size_t>(p));
    for (std::size_t i = 0; i < train.rows(); ++i)
        std_.apply(train.row(i), {ztrain.data() + i * p, static_cast<std::size_t>(p)});

    QuantileForecast f;
    f.grid = grid;
    f.timestamps = test.timestamps;
    f.values.resize(test.rows() * grid.size());

    std::vector<double> zrow(p);
    std::vector<std::pair<double, std::size_t>> dist(train.rows());
    std::vector<double> neigh(static_cast<std::size_t>(k));
    for (std::size_t r = 0; r < test.rows(); ++r) {
        std_.apply(test.row(r), zrow);
        for (std::size_t i = 0; i < train.rows(); ++i) {
            double d2 = 0.0;
            const double* zi = ztrain.data() + i * p;
            for (int j = 0; j < p; ++j) {
                double d = zrow[j] - zi[j];
                d2 += d * d;
            }
            dist[i] = {d2, i};
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        for (int i = 0; i < k; ++i) neigh[static_cast<std::size_t>(i)] = train.targets[dist[i].second];
        grid_quantiles(neigh, grid, &f.values[r * grid.size()]);
    }
    return f;
}

} // namespace loadbench
