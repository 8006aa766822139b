#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "loadbench/impute.hpp"
#include "loadbench/rng.hpp"

using namespace loadbench;

namespace {

Column make_column(const std::vector<double>& vals, const std::vector<int>& missing_idx) {
    Column c;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        bool miss = std::find(missing_idx.begin(), missing_idx.end(), static_cast<int>(i)) !=
                    missing_idx.end();
        c.push(vals[i], miss);
    }
    return c;
}

/// Independent smoother oracle: the posterior mean of the local-level
/// model solves a tridiagonal system (observation terms 1/r on observed
/// cells, coupling terms 1/q between neighbours, diffuse start). Solved
/// densely here, no Kalman recursion involved.
std::vector<double> dense_smoother_oracle(const Column& col, double q, double r) {
    const int n = static_cast<int>(col.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (int t = 0; t < n; ++t) {
        if (!col.missing[t]) {
            a(t, t) += 1.0 / r;
            b(t) += col.values[t] / r;
        }
        if (t + 1 < n) {
            a(t, t) += 1.0 / q;
            a(t + 1, t + 1) += 1.0 / q;
            a(t, t + 1) -= 1.0 / q;
            a(t + 1, t) -= 1.0 / q;
        }
    }
    Eigen::VectorXd x = a.ldlt().solve(b);
    return {x.data(), x.data() + n};
}

} // namespace

TEST_CASE("impute_linear midpoint, edges, two-point formula") {
    REQUIRE(impute_linear(make_column({1, 0, 3}, {1})) == std::vector<double>{1, 2, 3});
    REQUIRE(impute_linear(make_column({0, 5, 5}, {0})) == std::vector<double>{5, 5, 5});
    REQUIRE(impute_linear(make_column({0, 0, 0, 3}, {1, 2})) == std::vector<double>{0, 1, 2, 3});
    REQUIRE_THROWS(impute_linear(make_column({0, 0}, {0, 1})));
}

TEST_CASE("impute_linear stays within the observed neighbour range") {
    Rng rng(11);
    std::vector<double> vals(200);
    std::vector<int> missing;
    for (int i = 0; i < 200; ++i) {
        vals[i] = rng.uniform(0.0, 100.0);
        if (i > 0 && i < 199 && rng.uniform() < 0.3) missing.push_back(i);
    }
    Column c = make_column(vals, missing);
    std::vector<double> out = impute_linear(c);
    for (int i : missing) {
        int l = i, r = i;
        while (c.missing[l]) --l;
        while (c.missing[r]) ++r;
        REQUIRE(out[i] >= std::min(vals[l], vals[r]) - 1e-12);
        REQUIRE(out[i] <= std::max(vals[l], vals[r]) + 1e-12);
    }
}

TEST_CASE("impute_knn periodic series uses the daily twin") {
    std::vector<double> vals(240);
    for (int i = 0; i < 240; ++i) vals[i] = 5.0 + 10.0 * std::sin(2.0 * M_PI * i / 24.0);
    Column c = make_column(vals, {120});
    ImputePolicy p;
    p.method = ImputeMethod::knn;
    p.k = 1;
    p.pattern_hours = 24;
    std::vector<double> out = impute_knn(c, p);
    REQUIRE(out[120] == Catch::Approx(vals[120 - 24]).margin(1e-12));
}

TEST_CASE("impute_knn constant series fills the constant") {
    std::vector<double> vals(100, 7.5);
    Column c = make_column(vals, {50});
    ImputePolicy p;
    p.method = ImputeMethod::knn;
    p.k = 5;
    p.pattern_hours = 8;
    REQUIRE(impute_knn(c, p)[50] == 7.5);
}

TEST_CASE("impute_knn with k above candidate count averages all candidates") {
    // window length 4 (offsets -2..+1); candidates need 4 observed cells
    std::vector<double> vals = {1, 2, 3, 4, 5, 0, 7, 8, 9, 10, 11, 12};
    Column c = make_column(vals, {5});
    ImputePolicy p;
    p.method = ImputeMethod::knn;
    p.k = 1000;
    p.pattern_hours = 4;

    // oracle: enumerate complete windows directly
    std::vector<double> centers;
    for (int ctr = 2; ctr + 1 < static_cast<int>(vals.size()); ++ctr) {
        bool complete = true;
        for (int off = -2; off <= 1; ++off)
            if (c.missing[ctr + off]) complete = false;
        if (complete && ctr != 5) centers.push_back(vals[ctr]);
    }
    double mean = 0.0;
    for (double v : centers) mean += v;
    mean /= static_cast<double>(centers.size());

    REQUIRE(impute_knn(c, p)[5] == Catch::Approx(mean).margin(1e-12));
}

TEST_CASE("impute_state_space constant series is a fixed point") {
    std::vector<double> vals(50, 3.25);
    Column c = make_column(vals, {10, 11, 30});
    ImputePolicy p;
    p.method = ImputeMethod::state_space;
    std::vector<double> out = impute_state_space(c, p);
    for (double v : out) REQUIRE(v == Catch::Approx(3.25).margin(1e-6));
}

TEST_CASE("impute_state_space linear ramp is recovered near-linearly") {
    std::vector<double> vals(11);
    for (int i = 0; i <= 10; ++i) vals[i] = i;
    Column c = make_column(vals, {5});
    ImputePolicy p;
    p.method = ImputeMethod::state_space;
    p.process_noise = 1.0;
    p.observation_noise = 0.01;
    std::vector<double> out = impute_state_space(c, p);
    REQUIRE(std::fabs(out[5] - 5.0) < 0.5);

    std::vector<double> oracle = dense_smoother_oracle(c, p.process_noise, p.observation_noise);
    REQUIRE(out[5] == Catch::Approx(oracle[5]).margin(1e-3));
}

TEST_CASE("impute_state_space matches the dense solver oracle on random gaps") {
    Rng rng(23);
    std::vector<double> vals(120);
    std::vector<int> missing;
    for (int i = 0; i < 120; ++i) {
        vals[i] = 10.0 + 3.0 * std::sin(i / 7.0) + rng.normal(0.0, 0.4);
        if (i % 9 == 4) missing.push_back(i);
    }
    Column c = make_column(vals, missing);
    ImputePolicy p;
    p.method = ImputeMethod::state_space;
    p.process_noise = 0.5;
    p.observation_noise = 0.3;
    std::vector<double> out = impute_state_space(c, p);
    std::vector<double> oracle = dense_smoother_oracle(c, p.process_noise, p.observation_noise);
    for (int i : missing) REQUIRE(out[i] == Catch::Approx(oracle[i]).margin(1e-4));
}

TEST_CASE("impute_state_space endpoints only gives a monotone fill") {
    std::vector<double> vals(20, 0.0);
    vals[0] = 1.0;
    vals[19] = 5.0;
    std::vector<int> missing;
    for (int i = 1; i < 19; ++i) missing.push_back(i);
    Column c = make_column(vals, missing);
    ImputePolicy p;
    p.method = ImputeMethod::state_space;
    std::vector<double> out = impute_state_space(c, p);
    for (int i = 1; i < 20; ++i) REQUIRE(out[i] >= out[i - 1] - 1e-9);
    std::vector<double> oracle = dense_smoother_oracle(c, p.process_noise, p.observation_noise);
    for (int i = 1; i < 19; ++i) REQUIRE(out[i] == Catch::Approx(oracle[i]).margin(1e-3));
}

TEST_CASE("all imputers are the identity on complete series and clear the mask") {
    Rng rng(5);
    std::vector<double> vals(80);
    for (auto& v : vals) v = rng.uniform(10.0, 20.0);
    Column complete = make_column(vals, {});
    Column gappy = make_column(vals, {7, 8, 40});

    for (ImputeMethod m : {ImputeMethod::linear, ImputeMethod::knn, ImputeMethod::state_space}) {
        ImputePolicy p;
        p.method = m;
        p.pattern_hours = 6;
        REQUIRE(impute_column(complete, p) == vals);
        std::vector<double> out = impute_column(gappy, p);
        for (double v : out) REQUIRE(std::isfinite(v));
        for (std::size_t i = 0; i < vals.size(); ++i)
            if (!gappy.missing[i]) REQUIRE(out[i] == vals[i]);
    }
}

TEST_CASE("impute policy validation") {
    ImputePolicy p;
    p.k = 0;
    REQUIRE_THROWS(p.validate());
    p = ImputePolicy{};
    p.process_noise = 0.0;
    REQUIRE_THROWS(p.validate());
    p = ImputePolicy{};
    p.method = ImputeMethod::state_space;
    Column c = make_column({1.0, 0, 0}, {1, 2}); // single observation
    REQUIRE_THROWS(impute_state_space(c, p));
}

TEST_CASE("impute_table fills load and covariates independently") {
    SeriesTable t;
    for (int i = 0; i < 48; ++i) {
        t.timestamps.push_back(1600000000 + i * 3600);
        t.load.push(100.0 + i, i == 5);
    }
    t.covariates.emplace_back("airTemperature", Column{});
    for (int i = 0; i < 48; ++i) t.covariates[0].second.push(15.0, i == 20);
    ImputePolicy p;
    SeriesTable out = impute_table(t, p);
    REQUIRE(out.load.complete());
    REQUIRE(out.covariates[0].second.complete());
    REQUIRE(out.load.values[5] == Catch::Approx(105.0));
    REQUIRE(out.covariates[0].second.values[20] == Catch::Approx(15.0));
}
