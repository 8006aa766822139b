#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "loadbench/features.hpp"
#include "loadbench/impute.hpp"
#include "loadbench/ingest.hpp"
#include "loadbench/lossfit.hpp"
#include "loadbench/models/zoo.hpp"
#include "loadbench/postmetrics.hpp"
#include "loadbench/synth.hpp"

namespace loadbench {

struct DatasetSpec {
    std::string name;
    // file-backed
    std::string path;
    CsvSchema schema;
    bool zeros_as_missing = true;
    // or generated
    std::optional<SynthSpec> synth;
    std::uint64_t synth_seed = 0;

    std::string temperature_column; // empty: no temperature features
};

struct ModelEntry {
    std::string name;                     // zoo name, `_T` selects coupled features
    std::string loss_mode = "pinball_grid"; // pinball_grid | mse | asymmetric

    std::string key() const {
        return loss_mode == "pinball_grid" ? name : name + "-" + loss_mode;
    }
};

struct RunConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<ModelEntry> models;
    std::string output_dir = "runs";
    std::uint64_t seed = 0;
    SplitSpec split;
    ImputePolicy impute;
    ZooParams params;
    std::vector<double> winkler_alphas = {0.02, 0.10, 0.20};

    // asymmetric point loss: either a fitted-loss JSON or a simulation spec
    std::string fitted_loss_path;
    CostCurveSpec cost_curve;
    int cost_curve_samples = 2000;
    double cost_curve_noise = 0.02;
    LossFitConfig loss_fit;
    double fep_floor_fraction = 0.01; // of the train mean load
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    c.output_dir = j.value("output_dir", c.output_dir);
    c.seed = j.value("seed", c.seed);
    if (j.contains("split")) c.split.test_fraction = j["split"].value("test_fraction", 0.25);

    if (j.contains("impute")) {
        const auto& ji = j["impute"];
        c.impute.method = impute_method_from_string(ji.value("method", std::string("linear")));
        c.impute.k = ji.value("k", c.impute.k);
        c.impute.pattern_hours = ji.value("pattern_hours", c.impute.pattern_hours);
        c.impute.process_noise = ji.value("process_noise", c.impute.process_noise);
        c.impute.observation_noise = ji.value("observation_noise", c.impute.observation_noise);
    }

    if (j.contains("model_params")) {
        const auto& jp = j["model_params"];
        c.params.window_days = jp.value("window_days", c.params.window_days);
        c.params.knn_k = jp.value("knn_k", c.params.knn_k);
        c.params.qce_ridge = jp.value("qce_ridge", c.params.qce_ridge);
        if (jp.contains("forest")) {
            const auto& jf = jp["forest"];
            c.params.forest.n_trees = jf.value("n_trees", c.params.forest.n_trees);
            c.params.forest.max_depth = jf.value("max_depth", c.params.forest.max_depth);
            c.params.forest.min_leaf = jf.value("min_leaf", c.params.forest.min_leaf);
        }
        if (jp.contains("net")) {
            const auto& jn = jp["net"];
            c.params.net.hidden_width = jn.value("hidden_width", c.params.net.hidden_width);
            c.params.net.epochs = jn.value("epochs", c.params.net.epochs);
            c.params.net.learning_rate = jn.value("learning_rate", c.params.net.learning_rate);
            c.params.net.lr_decay = jn.value("lr_decay", c.params.net.lr_decay);
            c.params.net.batch_size = jn.value("batch_size", c.params.net.batch_size);
            c.params.net.trend_concat = jn.value("trend_concat", c.params.net.trend_concat);
        }
    }

    if (j.contains("loss")) {
        const auto& jl = j["loss"];
        c.fitted_loss_path = jl.value("fitted_loss_path", std::string());
        c.loss_fit.tolerance = jl.value("tolerance", c.loss_fit.tolerance);
        c.fep_floor_fraction = jl.value("fep_floor_fraction", c.fep_floor_fraction);
        c.cost_curve_samples = jl.value("simulate_samples", c.cost_curve_samples);
        c.cost_curve_noise = jl.value("simulate_noise", c.cost_curve_noise);
        if (jl.contains("simulate_shape"))
            c.cost_curve.coeffs = jl["simulate_shape"].get<std::vector<double>>();
    }

    if (!j.contains("datasets") || !j.contains("models"))
        throw std::runtime_error("run config: 'datasets' and 'models' are required");

    for (const auto& jd : j["datasets"]) {
        DatasetSpec d;
        d.name = jd.at("name").get<std::string>();
        if (jd.contains("synth")) {
            d.synth = synth_spec_from_json(jd["synth"]);
            d.synth_seed = jd.value("seed", 0);
            if (d.synth->with_temperature) d.temperature_column = "airTemperature";
        } else {
            d.path = jd.at("path").get<std::string>();
            if (jd.contains("schema")) {
                const auto& js = jd["schema"];
                d.schema.timestamp_column = js.value("timestamp", d.schema.timestamp_column);
                d.schema.load_column = js.value("load", d.schema.load_column);
                if (js.contains("covariates"))
                    d.schema.covariate_columns = js["covariates"].get<std::vector<std::string>>();
            }
            d.zeros_as_missing = jd.value("zeros_as_missing", true);
        }
        d.temperature_column = jd.value("temperature_column", d.temperature_column);
        c.datasets.push_back(std::move(d));
    }

    for (const auto& jm : j["models"]) {
        ModelEntry m;
        if (jm.is_string()) {
            m.name = jm.get<std::string>();
        } else {
            m.name = jm.at("name").get<std::string>();
            m.loss_mode = jm.value("loss", m.loss_mode);
        }
        if (!model_exists(m.name)) throw std::runtime_error("run config: unknown model '" + m.name + "'");
        if (m.loss_mode != "pinball_grid" && m.loss_mode != "mse" && m.loss_mode != "asymmetric")
            throw std::runtime_error("run config: unknown loss mode '" + m.loss_mode + "'");
        if (m.loss_mode != "pinball_grid" && base_model_name(m.name) != "FFNN")
            throw std::runtime_error("run config: point loss modes apply to the FFNN only");
        c.models.push_back(std::move(m));
    }
    return c;
}

inline RunConfig run_config_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("run config: cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;
    return run_config_from_json(j);
}

/// Prepared per-dataset state shared read-only by the tasks touching it.
struct DatasetBundle {
    DayAheadMatrix raw_train, raw_test;       // untransformed baseline features
    DayAheadMatrix coupled_train, coupled_test; // `_T` features
    double fep_floor = 1.0;
    double train_mean_load = 0.0;
};

/// ingest -> regularize -> chronological split -> per-part imputation ->
/// feature construction on the rejoined series -> row partition at the
/// boundary. Imputing the parts independently keeps test values out of the
/// training fills.
inline DatasetBundle prepare_dataset(const DatasetSpec& spec, const RunConfig& cfg) {
    SeriesTable raw;
    if (spec.synth) {
        raw = synth_dataset(*spec.synth, spec.synth_seed);
    } else {
        ParseOptions opts;
        opts.zeros_as_missing = spec.zeros_as_missing;
        raw = parse_csv(spec.path, spec.schema, opts);
    }
    SeriesTable regular = regularize_hourly(raw);
    auto [train_tbl, test_tbl] = split_train_test(regular, cfg.split);
    const std::int64_t boundary_ts = test_tbl.timestamps.front();

    SeriesTable train_full = impute_table(train_tbl, cfg.impute);
    SeriesTable test_full = impute_table(test_tbl, cfg.impute);
    SeriesTable joined = concat(train_full, test_full);

    DatasetBundle b;
    DayAheadMatrix raw_m = build_day_ahead(joined, false, true, spec.temperature_column);
    std::tie(b.raw_train, b.raw_test) = split_matrix(raw_m, boundary_ts);
    DayAheadMatrix coupled_m = build_day_ahead(joined, true, false, spec.temperature_column);
    std::tie(b.coupled_train, b.coupled_test) = split_matrix(coupled_m, boundary_ts);

    double sum = 0.0;
    for (double v : train_full.load.values) sum += v;
    b.train_mean_load = sum / static_cast<double>(train_full.size());
    b.fep_floor = std::max(1e-8, cfg.fep_floor_fraction * std::fabs(b.train_mean_load));
    return b;
}

namespace detail {

inline void write_quantile_forecast_csv(const QuantileForecast& f, const std::vector<double>& actual,
                                        const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open forecast file '" + path + "'");
    out << "timestamp,actual";
    for (double q : f.grid.levels) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), ",q%.2f", q);
        out << buf;
    }
    out << '\n';
    for (std::size_t r = 0; r < f.rows(); ++r) {
        out << format_timestamp(f.timestamps[r]) << ',' << fmt17(actual[r]);
        for (std::size_t j = 0; j < f.grid.size(); ++j) out << ',' << fmt17(f.at(r, j));
        out << '\n';
    }
}

inline void write_point_forecast_csv(const std::vector<std::int64_t>& ts, const std::vector<double>& pred,
                                     const std::vector<double>& actual, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open forecast file '" + path + "'");
    out << "timestamp,actual,prediction\n";
    for (std::size_t r = 0; r < pred.size(); ++r)
        out << format_timestamp(ts[r]) << ',' << fmt17(actual[r]) << ',' << fmt17(pred[r]) << '\n';
}

} // namespace detail

struct TaskResult {
    std::string dataset;
    std::string key; // <model>[-<loss>]
    bool ok = false;
    std::string error;
    std::vector<std::string> artifacts;
    nlohmann::json meta;
};

struct BenchResult {
    int total = 0;
    int failed = 0;
    std::string manifest_path;
    std::vector<TaskResult> tasks;
};

inline int thread_cap_from_env() {
    const char* env = std::getenv("LOADBENCH_THREADS");
    if (env == nullptr) return 0;
    int v = std::atoi(env);
    return v > 0 ? v : 0;
}

/// Execute the full benchmark. Tasks are isolated: a failing task logs its
/// error and the run continues; the caller maps failures to exit codes.
inline BenchResult run_benchmark(const RunConfig& cfg, int threads = 0) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);

    if (threads <= 0) threads = thread_cap_from_env();
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, threads);

    // shared read-only caches, built up-front by the coordinator
    std::map<std::string, DatasetBundle> bundles;
    std::map<std::string, std::string> dataset_errors;
    for (const auto& d : cfg.datasets) {
        try {
            bundles.emplace(d.name, prepare_dataset(d, cfg));
        } catch (const std::exception& e) {
            dataset_errors[d.name] = e.what();
        }
    }

    std::optional<AsymmetricLoss> asym_loss;
    std::string asym_error;
    bool needs_asym = false;
    for (const auto& m : cfg.models) needs_asym |= m.loss_mode == "asymmetric";
    if (needs_asym) {
        try {
            PiecewiseLinearLoss fitted =
                !cfg.fitted_loss_path.empty()
                    ? load_loss(cfg.fitted_loss_path)
                    : fit_loss(simulate_cost_curve(cfg.cost_curve, cfg.cost_curve_samples,
                                                   cfg.cost_curve_noise, cfg.seed ^ 0xC057ull),
                               cfg.loss_fit);
            asym_loss.emplace(std::move(fitted), 1.0); // per-task floor applied below
        } catch (const std::exception& e) {
            asym_error = e.what();
        }
    }

    struct Task {
        const DatasetSpec* dataset;
        const ModelEntry* model;
    };
    std::vector<Task> tasks;
    for (const auto& d : cfg.datasets)
        for (const auto& m : cfg.models) tasks.push_back({&d, &m});

    std::vector<TaskResult> results(tasks.size());

    auto run_task = [&](std::size_t t) {
        const DatasetSpec& d = *tasks[t].dataset;
        const ModelEntry& m = *tasks[t].model;
        TaskResult& res = results[t];
        res.dataset = d.name;
        res.key = m.key();
        const auto t0 = std::chrono::steady_clock::now();
        try {
            auto it = bundles.find(d.name);
            if (it == bundles.end())
                throw std::runtime_error("dataset failed to prepare: " + dataset_errors[d.name]);
            const DatasetBundle& b = it->second;
            const bool coupled = is_t_variant(m.name);
            const DayAheadMatrix& train = coupled ? b.coupled_train : b.raw_train;
            const DayAheadMatrix& test = coupled ? b.coupled_test : b.raw_test;

            ZooParams params = cfg.params;
            params.forest.seed = cfg.seed;
            params.net.seed = cfg.seed;

            const std::string stem = cfg.output_dir + "/" + d.name + "__" + res.key;
            nlohmann::json meta{{"dataset", d.name},
                                {"model", m.name},
                                {"loss_mode", m.loss_mode},
                                {"seed", cfg.seed},
                                {"test_fraction", cfg.split.test_fraction},
                                {"rows_train", train.rows()},
                                {"rows_test", test.rows()}};

            if (m.loss_mode == "pinball_grid") {
                QuantileGrid grid = QuantileGrid::default_grid();
                QuantileForecast f = run_quantile_model(m.name, train, test, grid, params);
                f = reorder_quantiles(f);
                MetricMatrix mm = metric_matrix(f, test.targets, cfg.winkler_alphas, b.fep_floor);

                detail::write_quantile_forecast_csv(f, test.targets, stem + ".forecast.csv");
                write_metric_matrix_csv(mm, stem + ".metrics.csv");
                write_metric_matrix_svg(mm, stem + ".heatmap.svg");
                res.artifacts = {stem + ".forecast.csv", stem + ".metrics.csv", stem + ".heatmap.svg"};

                nlohmann::json wj;
                for (const auto& [a, v] : mm.winkler_by_alpha) wj[std::to_string(a)] = v;
                meta["metrics"] = {{"grand_mean_pinball", mm.grand_mean_pinball},
                                   {"crps", mm.crps},
                                   {"calibration_error", mm.calibration},
                                   {"mape", mm.mape},
                                   {"mae", mm.mae},
                                   {"rmse", mm.rmse},
                                   {"winkler", wj}};
            } else {
                std::vector<double> pred;
                if (m.loss_mode == "mse") {
                    MseLoss loss;
                    pred = fit_predict_ffnn_point(train, test, params.net, loss);
                } else {
                    if (!asym_loss) throw std::runtime_error("asymmetric loss unavailable: " + asym_error);
                    AsymmetricLoss loss(asym_loss->fitted(), b.fep_floor);
                    pred = fit_predict_ffnn_point(train, test, params.net, loss);
                }
                PointMetrics pm = point_metrics(pred, test.targets, b.fep_floor);
                detail::write_point_forecast_csv(test.timestamps, pred, test.targets,
                                                 stem + ".forecast.csv");
                std::ofstream mout(stem + ".metrics.csv");
                mout << "metric,value\nmape," << detail::fmt17(pm.mape) << "\nmae,"
                     << detail::fmt17(pm.mae) << "\nrmse," << detail::fmt17(pm.rmse) << '\n';
                mout.close();
                res.artifacts = {stem + ".forecast.csv", stem + ".metrics.csv"};
                meta["metrics"] = {{"mape", pm.mape}, {"mae", pm.mae}, {"rmse", pm.rmse}};
            }

            const auto t1 = std::chrono::steady_clock::now();
            meta["timing_seconds"] = std::chrono::duration<double>(t1 - t0).count();
            nlohmann::json artifacts_j = nlohmann::json::array();
            for (const auto& a : res.artifacts) artifacts_j.push_back(a);
            meta["artifacts"] = artifacts_j;
            std::ofstream mj(stem + ".meta.json");
            mj << meta.dump(2) << '\n';
            res.artifacts.push_back(stem + ".meta.json");
            res.meta = std::move(meta);
            res.ok = true;
        } catch (const std::exception& e) {
            res.ok = false;
            res.error = e.what();
        }
    };

    if (threads == 1 || tasks.size() <= 1) {
        for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int nw = std::min<int>(threads, static_cast<int>(tasks.size()));
        for (int w = 0; w < nw; ++w)
            pool.emplace_back([&] {
                for (std::size_t t = next.fetch_add(1); t < tasks.size(); t = next.fetch_add(1))
                    run_task(t);
            });
        for (auto& th : pool) th.join();
    }

    BenchResult out;
    out.total = static_cast<int>(tasks.size());
    nlohmann::json manifest{{"seed", cfg.seed}, {"tasks", nlohmann::json::array()}};
    for (const auto& r : results) {
        if (!r.ok) ++out.failed;
        nlohmann::json tj{{"dataset", r.dataset}, {"model_key", r.key}, {"ok", r.ok}};
        if (r.ok) {
            nlohmann::json aj = nlohmann::json::array();
            for (const auto& a : r.artifacts) aj.push_back(a);
            tj["artifacts"] = aj;
        } else {
            tj["error"] = r.error;
        }
        manifest["tasks"].push_back(tj);
    }
    out.manifest_path = cfg.output_dir + "/manifest.json";
    std::ofstream mf(out.manifest_path);
    mf << manifest.dump(2) << '\n';
    out.tasks = std::move(results);
    return out;
}

// --- improvement reports (Fig 4 / Fig 5 style) ----------------------------

struct RunRow {
    std::string dataset;
    std::string model;    // base name, no `_T`
    bool variant = false; // `_T` (feature pairing) or asymmetric (loss pairing)
    double value = 0.0;
};

struct PairDelta {
    std::string dataset;
    std::string model;
    double base_value = 0.0;
    double variant_value = 0.0;
    bool improved = false;
};

struct CategoryStat {
    int improved = 0;
    int total = 0;
    double proportion() const { return total == 0 ? 0.0 : static_cast<double>(improved) / total; }
};

struct ImprovementReport {
    std::string pairing; // feature_T | loss_asym
    std::string metric;
    std::map<std::string, CategoryStat> categories; // deep / non_deep, or all
    std::vector<PairDelta> pairs;
};

/// Pair matched rows and count strict decreases as improvements. Rows that
/// lack their partner are rejected; categories with no pairs are omitted.
inline ImprovementReport improvement_report(const std::vector<RunRow>& rows, const std::string& pairing,
                                            const std::string& metric) {
    ImprovementReport rep;
    rep.pairing = pairing;
    rep.metric = metric;

    std::map<std::pair<std::string, std::string>, std::pair<std::optional<double>, std::optional<double>>>
        matched;
    for (const auto& r : rows) {
        auto& slot = matched[{r.dataset, r.model}];
        (r.variant ? slot.second : slot.first) = r.value;
    }
    for (const auto& [key, vals] : matched) {
        if (!vals.first || !vals.second)
            throw std::runtime_error("improvement_report: unmatched pair for " + key.first + "/" +
                                     key.second);
        PairDelta p;
        p.dataset = key.first;
        p.model = key.second;
        p.base_value = *vals.first;
        p.variant_value = *vals.second;
        p.improved = p.variant_value < p.base_value; // strict decrease
        rep.pairs.push_back(p);

        std::string cat = pairing == "feature_T" ? (is_deep_model(p.model) ? "deep" : "non_deep") : "all";
        auto& stat = rep.categories[cat];
        ++stat.total;
        if (p.improved) ++stat.improved;
    }
    return rep;
}

/// Fig-4/Fig-5 caption labels: deep -> DP/DNP, non-deep -> NP/NNP,
/// loss pairing -> P/NP.
inline nlohmann::json improvement_report_to_json(const ImprovementReport& rep) {
    nlohmann::json j{{"pairing", rep.pairing}, {"metric", rep.metric}};
    nlohmann::json cats;
    for (const auto& [name, stat] : rep.categories) {
        double p = stat.proportion();
        nlohmann::json cj{{"improved", stat.improved}, {"total", stat.total}};
        if (name == "deep") {
            cj["DP"] = p;
            cj["DNP"] = 1.0 - p;
        } else if (name == "non_deep") {
            cj["NP"] = p;
            cj["NNP"] = 1.0 - p;
        } else {
            cj["P"] = p;
            cj["NP"] = 1.0 - p;
        }
        cats[name] = cj;
    }
    j["categories"] = cats;
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : rep.pairs)
        pairs.push_back(nlohmann::json{{"dataset", p.dataset},
                                       {"model", p.model},
                                       {"base", p.base_value},
                                       {"variant", p.variant_value},
                                       {"improved", p.improved}});
    j["pairs"] = pairs;
    return j;
}

/// Collect report rows from the meta.json files of a finished run.
inline std::vector<RunRow> report_rows_from_run_dir(const std::string& dir, const std::string& pairing,
                                                    const std::string& metric) {
    namespace fs = std::filesystem;
    std::vector<fs::path> metas;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".json" && e.path().filename() != "manifest.json" &&
            e.path().string().ends_with(".meta.json"))
            metas.push_back(e.path());
    std::sort(metas.begin(), metas.end());

    std::vector<RunRow> rows;
    for (const auto& p : metas) {
        std::ifstream in(p);
        nlohmann::json j;
        in >> j;
        const std::string model = j.value("model", "");
        const std::string loss_mode = j.value("loss_mode", "pinball_grid");
        if (!j.contains("metrics")) continue;
        const auto& mj = j["metrics"];

        RunRow r;
        r.dataset = j.value("dataset", "");
        if (pairing == "feature_T") {
            if (loss_mode != "pinball_grid") continue;
            r.model = base_model_name(model);
            r.variant = is_t_variant(model);
            const char* key = metric == "mape" ? "mape" : "grand_mean_pinball";
            if (!mj.contains(key)) continue;
            r.value = mj[key].get<double>();
        } else if (pairing == "loss_asym") {
            if (loss_mode == "pinball_grid") continue;
            r.model = model;
            r.variant = loss_mode == "asymmetric";
            const char* key = metric == "rmse" ? "rmse" : (metric == "mae" ? "mae" : "mape");
            if (!mj.contains(key)) continue;
            r.value = mj[key].get<double>();
        } else {
            throw std::runtime_error("unknown pairing '" + pairing + "'");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Plain-table input, e.g. published benchmark numbers. Columns:
/// `dataset,model,value` (feature_T pairing, `_T` suffix marks the variant)
/// or `dataset,model,loss,value` (loss_asym pairing).
inline std::vector<RunRow> report_rows_from_table(const std::string& path, const std::string& pairing) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("report table: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("report table: empty file");
    const bool has_loss_col = line.find("loss") != std::string::npos;

    std::vector<RunRow> rows;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_csv_line(line);
        RunRow r;
        if (pairing == "feature_T") {
            if (fields.size() < 3) continue;
            r.dataset = detail::trim(fields[0]);
            std::string model = detail::trim(fields[1]);
            r.model = base_model_name(model);
            r.variant = is_t_variant(model);
            r.value = std::strtod(fields[2].c_str(), nullptr);
        } else {
            if (!has_loss_col || fields.size() < 4)
                throw std::runtime_error("report table: loss_asym needs dataset,model,loss,value");
            r.dataset = detail::trim(fields[0]);
            r.model = detail::trim(fields[1]);
            r.variant = detail::trim(fields[2]) == "asymmetric";
            r.value = std::strtod(fields[3].c_str(), nullptr);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace loadbench
