// Acceptance suite: runs every acceptance criterion at its stated
// tolerance and prints one PASS/FAIL line per criterion. Exits nonzero if
// any criterion fails. argv[1] (optional) is the path to the loadbench CLI
// binary, used by the pipeline-determinism criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "loadbench/bench.hpp"
#include "loadbench/lossfit.hpp"
#include "loadbench/models/zoo.hpp"
#include "loadbench/postmetrics.hpp"
#include "loadbench/rng.hpp"
#include "loadbench/synth.hpp"

using namespace loadbench;
namespace fs = std::filesystem;

namespace {

std::string g_cli_path;

struct Check {
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    template <typename T>
    void expect_le(T a, T b, const std::string& what) {
        if (!(a <= b)) {
            std::ostringstream os;
            os << what << " (" << a << " > " << b << ")";
            failures.push_back(os.str());
        }
    }
};

double l2_distance(const std::function<double(double)>& f, const std::function<double(double)>& g,
                   double lo, double hi, int intervals = 2000) {
    double h = (hi - lo) / intervals;
    auto sq = [&](double x) {
        double d = f(x) - g(x);
        return d * d;
    };
    double sum = sq(lo) + sq(hi);
    for (int i = 1; i < intervals; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * sq(lo + i * h);
    return std::sqrt(sum * h / 3.0);
}

std::vector<ErrorCostSample> dense_curve(const std::function<double(double)>& fn, double lo, double hi,
                                         int n) {
    std::vector<ErrorCostSample> out;
    for (int i = 0; i < n; ++i) {
        double e = lo + (hi - lo) * i / (n - 1.0);
        out.push_back({e, fn(e)});
    }
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---- criterion 1: loss-bound suite ---------------------------------------

Check criterion_1() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(20260801);
    int violations = 0;
    for (int rep = 0; rep < 24; ++rep) {
        // random smooth curve: cubic with non-trivial curvature
        double c2 = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 2.0);
        double c3 = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);
        double c1 = rng.uniform(-0.5, 0.5);
        auto curve = [=](double e) { return c1 * e + c2 * e * e + c3 * e * e * e; };
        double lo = -rng.uniform(0.6, 1.0), hi = rng.uniform(0.6, 1.0);

        std::vector<ErrorCostSample> samples = dense_curve(curve, lo, hi, 3000);
        SplineFit s = fit_cubic_spline(samples, 8);
        double tol = rng.uniform(0.01, 0.06);
        int k = required_segments(s, tol);

        std::vector<double> eps(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) eps[i] = samples[i].epsilon;
        PiecewiseLinearLoss pw = fit_piecewise_linear(samples, place_breakpoints(eps, k));

        double bound = curvature_functional(s) / (std::sqrt(120.0) * k * k);
        double dist = l2_distance([&](double e) { return s.value(e); },
                                  [&](double e) { return pw.eval(e).first; }, s.lo, s.hi);
        if (!(dist <= bound)) ++violations;
    }
    c.expect(violations == 0, "bound violated in " + std::to_string(violations) + " of 24 curves");
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect_le(secs, 30.0, "runtime budget");
    return c;
}

// ---- criterion 2: K worked example ----------------------------------------

Check criterion_2() {
    Check c;
    std::vector<ErrorCostSample> samples =
        dense_curve([](double e) { return e * e; }, -1.0, 1.0, 2001);
    SplineFit s = fit_cubic_spline(samples, 6);
    const double closed_integral = 2.0 * std::pow(2.0, 0.4); // integral of 2^(2/5) over [-1,1]
    double integral = std::pow(curvature_functional(s), 0.4);
    c.expect_le(std::fabs(integral - closed_integral), 1e-6, "Simpson integral vs closed form");
    c.expect(required_segments(s, 0.1) == 4,
             "K = " + std::to_string(required_segments(s, 0.1)) + ", want 4");
    c.expect_le(std::fabs(curvature_functional(s) - 11.313708498984761), 1e-4, "A vs 2^(7/2)");
    return c;
}

// ---- criterion 3: C1 smoothing + adapter gradient --------------------------

Check criterion_3() {
    Check c;
    Rng rng(333);
    double max_disc = 0.0;
    std::vector<PiecewiseLinearLoss> losses;
    for (int rep = 0; rep < 100; ++rep) {
        CostCurveSpec shape;
        shape.coeffs = {0.0, rng.uniform(-0.5, 0.5), rng.uniform(0.5, 2.5), rng.uniform(-1.2, 1.2)};
        shape.eps_min = -rng.uniform(0.3, 0.6);
        shape.eps_max = rng.uniform(0.3, 0.6);
        std::vector<ErrorCostSample> samples = simulate_cost_curve(shape, 1200, 0.02, 40000 + rep);
        LossFitConfig cfg;
        cfg.tolerance = rng.uniform(0.02, 0.08);
        PiecewiseLinearLoss loss = fit_loss(samples, cfg);
        losses.push_back(loss);

        for (std::size_t i = 0; i < loss.breakpoints.size(); ++i) {
            double b = loss.breakpoints[i];
            // analytic one-sided derivatives at both smoothing-cell edges
            double left_gap = std::fabs(loss.slopes[i] - loss.eval(b - loss.delta).second);
            double right_gap = std::fabs(loss.slopes[i + 1] - loss.eval(b + loss.delta).second);
            max_disc = std::max({max_disc, left_gap, right_gap});
        }
    }
    c.expect_le(max_disc, 1e-10, "max derivative discontinuity at breakpoints/cell edges");

    // adapter gradient vs central finite differences at 1000 random points
    const double h = 1e-6;
    double max_rel = 0.0;
    int checked = 0;
    std::size_t li = 0;
    while (checked < 1000) {
        const PiecewiseLinearLoss& loss = losses[li++ % losses.size()];
        double actual = rng.uniform(0.5, 2.0);
        double floor = 0.1;
        double forecast = actual * (1.0 + rng.uniform(-0.45, 0.45));
        double denom_fep = std::max(std::fabs(actual), floor);
        double eps = (forecast - actual) / denom_fep;
        bool near_edge = false;
        for (double b : loss.breakpoints)
            if (std::fabs(std::fabs(eps - b) - loss.delta) < 4 * h / denom_fep) near_edge = true;
        if (near_edge) continue; // FD stencil must not straddle a curvature jump
        ++checked;
        double analytic = training_loss_adapter(loss, forecast, actual, floor).second;
        double numeric = (training_loss_adapter(loss, forecast + h, actual, floor).first -
                          training_loss_adapter(loss, forecast - h, actual, floor).first) /
                         (2.0 * h);
        double rel = std::fabs(analytic - numeric) / std::max({std::fabs(analytic), std::fabs(numeric), 1e-3});
        max_rel = std::max(max_rel, rel);
    }
    c.expect_le(max_rel, 1e-5, "adapter gradient vs finite differences");
    return c;
}

// ---- criterion 4: forest oracle equivalence --------------------------------

double forest_oracle_quantile(const QuantileForestModel& model, std::span<const double> row, double q) {
    std::vector<std::pair<double, double>> pool;
    const double tw = 1.0 / static_cast<double>(model.trees().size());
    for (const Tree& t : model.trees()) {
        int cur = 0;
        while (t.nodes[cur].feature >= 0) {
            const TreeNode& nd = t.nodes[cur];
            cur = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
        }
        const auto& targets = t.nodes[cur].leaf_targets;
        for (double v : targets) pool.emplace_back(v, tw / static_cast<double>(targets.size()));
    }
    std::stable_sort(pool.begin(), pool.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    double cum = 0.0;
    for (const auto& [v, w] : pool) {
        cum += w;
        if (cum >= q - kCdfTolerance) return v;
    }
    return pool.back().first;
}

Check criterion_4() {
    Check c;
    Rng rng(444);
    QuantileGrid grid = QuantileGrid::default_grid();
    int mismatches = 0;
    for (int rep = 0; rep < 4; ++rep) {
        DayAheadMatrix train, test;
        train.layout.lag_dim = 4;
        train.layout.calendar_dim = 0;
        test.layout = train.layout;
        const int n = 150 + rep * 10, p = 4;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) train.features.push_back(rng.uniform(0.0, 1.0));
            train.targets.push_back(rng.uniform(0.0, 100.0));
            train.timestamps.push_back(i);
        }
        for (int i = 0; i < 30; ++i) {
            for (int j = 0; j < p; ++j) test.features.push_back(rng.uniform(0.0, 1.0));
            test.targets.push_back(0.0);
            test.timestamps.push_back(i);
        }
        ForestConfig cfg;
        cfg.n_trees = 2 + rep; // 2..5 trees
        cfg.min_leaf = 3;
        cfg.seed = 1000 + rep;
        cfg.split_rule = rep % 2 == 0 ? SplitRule::best : SplitRule::random;
        cfg.leaf_mode = rep < 2 ? LeafMode::all : LeafMode::sample;

        QuantileForestModel model = QuantileForestModel::fit(train, cfg);
        QuantileForecast f = model.predict(test, grid);
        for (std::size_t r = 0; r < test.rows(); ++r)
            for (std::size_t j = 0; j < grid.size(); ++j)
                if (f.at(r, j) != forest_oracle_quantile(model, test.row(r), grid.levels[j]))
                    ++mismatches;
    }
    c.expect(mismatches == 0,
             "forest vs weighted-CDF oracle: " + std::to_string(mismatches) + " mismatches");
    return c;
}

// ---- criterion 5: FFNN quantile recovery -----------------------------------

Check criterion_5() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(555);
    auto draw = [&](int n, DayAheadMatrix& m) {
        m.layout.lag_dim = 1;
        m.layout.calendar_dim = 0;
        for (int i = 0; i < n; ++i) {
            double x = rng.uniform(0.0, 10.0);
            m.features.push_back(x);
            m.targets.push_back(x + rng.uniform(-1.0, 1.0));
            m.timestamps.push_back(i);
        }
    };
    DayAheadMatrix train, test;
    draw(20000, train);
    draw(10000, test);

    NetConfig cfg;
    cfg.hidden_width = 64;
    cfg.epochs = 150;
    cfg.learning_rate = 0.02;
    cfg.lr_decay = 0.97;
    cfg.batch_size = 128;
    cfg.seed = 7;
    QuantileGrid grid = QuantileGrid::default_grid();
    FfnnModel model(train, grid, cfg);
    model.fit(train);
    QuantileForecast f = reorder_quantiles(model.predict(test));

    PinballResult pb = pinball(f, test.targets);
    double worst_ratio = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        double q = grid.levels[j];
        double optimum = q * (1.0 - q); // analytic for U(-1,1) noise
        worst_ratio = std::max(worst_ratio, pb.per_level[j] / optimum);
    }
    c.expect_le(worst_ratio, 1.10, "per-level pinball within 10% of the analytic optimum");

    std::vector<double> cov = coverage_error(f, test.targets);
    for (double level : {0.1, 0.5, 0.9}) {
        int idx = grid.index_of(level);
        c.expect_le(std::fabs(cov[idx]), 0.03,
                    "coverage error at level " + std::to_string(level));
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect_le(secs, 300.0, "runtime budget");
    return c;
}

// ---- criteria 6/7 shared pipeline ------------------------------------------

struct PreparedData {
    DayAheadMatrix raw_train, raw_test, coupled_train, coupled_test;
    double fep_floor = 1.0;
};

PreparedData prepare(const SynthSpec& spec, std::uint64_t seed) {
    SeriesTable t = synth_dataset(spec, seed);
    auto [train_tbl, test_tbl] = split_train_test(t, SplitSpec{0.25});
    std::int64_t boundary = test_tbl.timestamps.front();
    SeriesTable joined = concat(train_tbl, test_tbl);
    PreparedData d;
    DayAheadMatrix raw = build_day_ahead(joined, false, true, "airTemperature");
    std::tie(d.raw_train, d.raw_test) = split_matrix(raw, boundary);
    DayAheadMatrix coupled = build_day_ahead(joined, true, false, "airTemperature");
    std::tie(d.coupled_train, d.coupled_test) = split_matrix(coupled, boundary);
    double mean = std::accumulate(train_tbl.load.values.begin(), train_tbl.load.values.end(), 0.0) /
                  static_cast<double>(train_tbl.size());
    d.fep_floor = 0.01 * std::fabs(mean);
    return d;
}

SynthSpec regime_spec() {
    SynthSpec spec;
    spec.n_hours = 24 * 80;
    spec.daily_amplitude = 10.0;
    spec.weekly_amplitude = 4.0;
    spec.noise_sd = 2.0;
    spec.temp_noise = 2.5;
    spec.v_slope = 4.0;
    spec.v_weekday_variation = 0.6;
    return spec;
}

Check criterion_6() {
    Check c;
    QuantileGrid grid = QuantileGrid::default_grid();
    int qce_wins = 0, ffnn_wins = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        PreparedData d = prepare(regime_spec(), seed);

        ZooParams params;
        params.net.hidden_width = 32;
        params.net.epochs = 40;
        params.net.learning_rate = 0.01;
        params.net.batch_size = 64;
        params.net.seed = seed;
        params.forest.seed = seed;

        auto grand_pinball = [&](const char* name, const DayAheadMatrix& tr, const DayAheadMatrix& te) {
            QuantileForecast f = run_quantile_model(name, tr, te, grid, params);
            return pinball(reorder_quantiles(f), te.targets).grand_mean;
        };
        double qce = grand_pinball("QCE", d.raw_train, d.raw_test);
        double qce_t = grand_pinball("QCE", d.coupled_train, d.coupled_test);
        if (qce_t < qce) ++qce_wins;

        double ffnn = grand_pinball("FFNN", d.raw_train, d.raw_test);
        double ffnn_t = grand_pinball("FFNN", d.coupled_train, d.coupled_test);
        if (ffnn_t < ffnn) ++ffnn_wins;
    }
    c.expect(qce_wins >= 8, "QCE_T beat QCE on " + std::to_string(qce_wins) + "/10 seeds, want >= 8");
    c.expect(ffnn_wins >= 8,
             "FFNN_T beat FFNN on " + std::to_string(ffnn_wins) + "/10 seeds, want >= 8");
    return c;
}

Check criterion_7() {
    Check c;
    CostCurveSpec shape; // default asymmetric polynomial
    std::vector<ErrorCostSample> samples = simulate_cost_curve(shape, 3000, 0.01, 777);
    LossFitConfig lf;
    lf.tolerance = 0.03;
    PiecewiseLinearLoss fitted = fit_loss(samples, lf);

    int asym_wins = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SynthSpec spec = regime_spec();
        spec.n_hours = 24 * 60;
        spec.noise_sd = 6.0;
        PreparedData d = prepare(spec, 900 + seed);

        NetConfig net;
        net.hidden_width = 32;
        net.epochs = 40;
        net.learning_rate = 0.01;
        net.batch_size = 64;
        net.seed = seed;

        MseLoss mse;
        std::vector<double> pred_mse = fit_predict_ffnn_point(d.coupled_train, d.coupled_test, net, mse);
        AsymmetricLoss asym(fitted, d.fep_floor);
        std::vector<double> pred_asym =
            fit_predict_ffnn_point(d.coupled_train, d.coupled_test, net, asym);

        // realized cost under the generator's true cost curve
        auto realized = [&](const std::vector<double>& pred) {
            double sum = 0.0;
            for (std::size_t i = 0; i < pred.size(); ++i)
                sum += shape.true_cost(compute_fep(pred[i], d.coupled_test.targets[i], d.fep_floor));
            return sum / static_cast<double>(pred.size());
        };
        if (realized(pred_asym) < realized(pred_mse)) ++asym_wins;
    }
    c.expect(asym_wins >= 8,
             "asymmetric training beat MSE on " + std::to_string(asym_wins) + "/10 seeds, want >= 8");
    return c;
}

// ---- criterion 8: metric hand examples ------------------------------------

Check criterion_8() {
    Check c;
    auto single = [](double level, double value) {
        QuantileForecast f;
        f.grid.levels = {level};
        f.timestamps = {0};
        f.values = {value};
        return f;
    };
    // hand values like 0.1*2 are compared at double round-off
    auto close = [](double a, double b) { return std::fabs(a - b) <= 1e-15; };
    c.expect(close(pinball(single(0.9, 8.0), {10.0}).per_level[0], 0.9 * 2.0), "pinball under-forecast");
    c.expect(close(pinball(single(0.9, 12.0), {10.0}).per_level[0], 0.1 * 2.0), "pinball over-forecast");
    c.expect(pinball(single(0.5, 10.0), {10.0}).per_level[0] == 0.0, "pinball exact");

    QuantileForecast iv;
    iv.grid.levels = {0.05, 0.95};
    iv.timestamps = {0};
    iv.values = {10.0, 20.0};
    c.expect(winkler(iv, {15.0}, 0.1) == 10.0, "winkler inside");
    c.expect(winkler(iv, {25.0}, 0.1) == 110.0, "winkler above");
    c.expect(winkler(iv, {9.0}, 0.1) == 30.0, "winkler below");

    QuantileForecast cov;
    cov.grid.levels = {0.5};
    for (int r = 0; r < 4; ++r) {
        cov.timestamps.push_back(r);
        cov.values.push_back(100.0);
    }
    c.expect(coverage_error(cov, {1, 2, 3, 4})[0] == 0.5, "coverage all-covered");
    QuantileForecast cov2 = cov;
    for (double& v : cov2.values) v = -100.0;
    c.expect(coverage_error(cov2, {1, 2, 3, 4})[0] == -0.5, "coverage none-covered");

    QuantileForecast cal;
    cal.grid = QuantileGrid::default_grid();
    cal.timestamps = {0};
    for (int j = 0; j < 99; ++j) cal.values.push_back(10.0);
    c.expect(std::fabs(calibration_error(cal, {5.0}) - 0.5) < 1e-12, "calibration degenerate 0.5");

    Rng rng(888);
    QuantileForecast rand_f;
    rand_f.grid = QuantileGrid::default_grid();
    const int rows = 10000 / 99 + 1;
    for (int r = 0; r < rows; ++r) {
        rand_f.timestamps.push_back(r);
        for (int j = 0; j < 99; ++j) rand_f.values.push_back(rng.uniform(-100.0, 100.0));
    }
    QuantileForecast sorted_f = reorder_quantiles(rand_f);
    int violations = 0;
    for (std::size_t r = 0; r < sorted_f.rows(); ++r)
        for (std::size_t j = 1; j < 99; ++j)
            if (sorted_f.at(r, j) < sorted_f.at(r, j - 1)) ++violations;
    c.expect(violations == 0, "reordering monotonicity violations");
    return c;
}

// ---- criterion 9: pipeline determinism through the CLI ---------------------

Check criterion_9() {
    Check c;
    if (g_cli_path.empty()) {
        c.expect(false, "CLI path not supplied (argv[1])");
        return c;
    }
    std::string base = (fs::temp_directory_path() / "lb_accept9").string();
    fs::remove_all(base);
    fs::create_directories(base);

    auto config_for = [&](const std::string& out_dir) {
        nlohmann::json j{
            {"output_dir", out_dir},
            {"seed", 11},
            {"split", {{"test_fraction", 0.25}}},
            {"datasets",
             {{{"name", "s1"}, {"synth", {{"n_hours", 1440}, {"missing_rate", 0.01}}}, {"seed", 1}},
              {{"name", "s2"}, {"synth", {{"n_hours", 1440}, {"v_slope", 1.5}}}, {"seed", 2}}}},
            {"models", {"BEQ", "BMQ", "QCE_T", "QRFR"}},
            {"model_params",
             {{"window_days", 7}, {"forest", {{"n_trees", 16}, {"min_leaf", 5}}}}}};
        return j;
    };
    auto write_cfg = [&](const std::string& name, const nlohmann::json& j) {
        std::string p = base + "/" + name;
        std::ofstream out(p);
        out << j.dump(2);
        return p;
    };

    std::string cfg_a = write_cfg("a.json", config_for(base + "/out_a"));
    std::string cfg_b = write_cfg("b.json", config_for(base + "/out_b"));
    std::string cfg_c = write_cfg("c.json", config_for(base + "/out_c"));

    auto run_cli = [&](const std::string& cfg, int threads) {
        std::string cmd = "\"" + g_cli_path + "\" run --config \"" + cfg + "\" --threads " +
                          std::to_string(threads) + " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    c.expect(run_cli(cfg_a, 1) == 0, "CLI run (1 thread) exit code");
    c.expect(run_cli(cfg_b, 8) == 0, "CLI run (8 threads) exit code");
    c.expect(run_cli(cfg_c, 1) == 0, "CLI rerun exit code");

    for (const char* d : {"s1", "s2"})
        for (const char* m : {"BEQ", "BMQ", "QCE_T", "QRFR"}) {
            std::string rel = std::string(d) + "__" + m + ".metrics.csv";
            std::string a = slurp(base + "/out_a/" + rel);
            c.expect(!a.empty(), rel + " missing");
            c.expect(a == slurp(base + "/out_b/" + rel), rel + " differs across thread counts");
            c.expect(a == slurp(base + "/out_c/" + rel), rel + " differs across reruns");
        }
    return c;
}

// ---- criterion 10: improvement-report arithmetic ---------------------------

Check criterion_10() {
    Check c;
    std::string table = (fs::temp_directory_path() / "lb_accept10.csv").string();
    {
        std::ofstream out(table);
        out << "dataset,model,value\n";
        out << "GEF14,FFNN,36.17\n";     // published pair
        out << "GEF14,FFNN_T,25.97\n";
        out << "GEF14,QCE,46.61\n";
        out << "GEF14,QCE_T,27.71\n";
        out << "Spanish,QCE,733.49\n";
        out << "Spanish,QCE_T,640.76\n";
        out << "Covid19,FFNN,8970.64\n";
        out << "Covid19,FFNN_T,22225.40\n";
    }
    std::vector<RunRow> rows = report_rows_from_table(table, "feature_T");
    ImprovementReport rep = improvement_report(rows, "feature_T", "pinball");

    bool gef14_improved = false;
    for (const auto& p : rep.pairs)
        if (p.dataset == "GEF14" && p.model == "FFNN")
            gef14_improved = p.improved && p.base_value == 36.17 && p.variant_value == 25.97;
    c.expect(gef14_improved, "GEF14 FFNN pair classified as improvement");

    // caption definitions: DP = improved deep fraction, NP = improved
    // non-deep fraction; Covid19 FFNN worsens, both QCE pairs improve
    c.expect(rep.categories.at("deep").total == 2 && rep.categories.at("deep").improved == 1,
             "deep category counts");
    c.expect(std::fabs(rep.categories.at("deep").proportion() - 0.5) < 1e-12, "DP = 0.5");
    c.expect(rep.categories.at("non_deep").total == 2 && rep.categories.at("non_deep").improved == 2,
             "non-deep category counts");
    nlohmann::json j = improvement_report_to_json(rep);
    c.expect(j["categories"]["deep"]["DP"].get<double>() == 0.5, "DP in JSON");
    c.expect(j["categories"]["deep"]["DNP"].get<double>() == 0.5, "DNP in JSON");
    c.expect(j["categories"]["non_deep"]["NP"].get<double>() == 1.0, "NP in JSON");
    return c;
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_cli_path = argv[1];

    struct Criterion {
        int id;
        const char* name;
        std::function<Check()> fn;
    };
    std::vector<Criterion> criteria = {
        {1, "loss-bound suite (24 random smooth curves)", criterion_1},
        {2, "segment-count worked example (K=4)", criterion_2},
        {3, "C1 smoothing + adapter gradient checks", criterion_3},
        {4, "quantile-forest weighted-CDF oracle equivalence", criterion_4},
        {5, "FFNN 99-head quantile recovery", criterion_5},
        {6, "directional feature-coupling improvement (QCE/FFNN)", criterion_6},
        {7, "directional asymmetric-loss improvement", criterion_7},
        {8, "metric hand examples + reordering", criterion_8},
        {9, "pipeline determinism across threads and reruns", criterion_9},
        {10, "improvement-report arithmetic on published numbers", criterion_10},
    };

    int failed = 0;
    for (const auto& cr : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Check c;
        try {
            c = cr.fn();
        } catch (const std::exception& e) {
            c.failures.push_back(std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.failures.empty()) {
            std::printf("PASS  criterion %2d  %-55s (%.1fs)\n", cr.id, cr.name, secs);
        } else {
            ++failed;
            std::printf("FAIL  criterion %2d  %-55s (%.1fs)\n", cr.id, cr.name, secs);
            for (const auto& f : c.failures) std::printf("      - %s\n", f.c_str());
        }
        std::fflush(stdout);
    }
    if (failed > 0) std::printf("%d criterion(s) failed\n", failed);
    return failed == 0 ? 0 : 1;
}
