// loadbench: day-ahead load forecasting benchmark CLI.
//
// Exit codes: 0 success, 1 partial task failure, 2 configuration error.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include "loadbench/bench.hpp"
#include "loadbench/ingest.hpp"
#include "loadbench/lossfit.hpp"
#include "loadbench/synth.hpp"

using namespace loadbench;

namespace {

int cmd_run(const std::string& config_path, int threads) {
    RunConfig cfg;
    try {
        cfg = run_config_from_file(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    BenchResult res = run_benchmark(cfg, threads);
    for (const auto& t : res.tasks) {
        if (t.ok)
            std::printf("[ok]   %s %s\n", t.dataset.c_str(), t.key.c_str());
        else
            std::printf("[fail] %s %s: %s\n", t.dataset.c_str(), t.key.c_str(), t.error.c_str());
    }
    std::printf("%d/%d tasks succeeded; manifest: %s\n", res.total - res.failed, res.total,
                res.manifest_path.c_str());
    return res.failed > 0 ? 1 : 0;
}

int cmd_report(const std::string& runs_dir, const std::string& table, const std::string& pairing,
               const std::string& metric, const std::string& out_path) {
    try {
        std::vector<RunRow> rows = !table.empty() ? report_rows_from_table(table, pairing)
                                                  : report_rows_from_run_dir(runs_dir, pairing, metric);
        ImprovementReport rep = improvement_report(rows, pairing, metric);
        nlohmann::json j = improvement_report_to_json(rep);
        if (!out_path.empty()) {
            std::ofstream out(out_path);
            out << j.dump(2) << '\n';
        }
        std::cout << j.dump(2) << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "report error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_fit_loss(const std::string& input, double tolerance, const std::string& out_path, int n_knots) {
    try {
        std::vector<ErrorCostSample> samples = read_error_cost_csv(input);
        LossFitConfig cfg;
        cfg.tolerance = tolerance;
        cfg.n_knots = n_knots;
        PiecewiseLinearLoss loss = fit_loss(samples, cfg);
        save_loss(loss, out_path);
        std::printf("fitted %zu segments (%zu breakpoints), delta=%g -> %s\n", loss.segments(),
                    loss.breakpoints.size(), loss.delta, out_path.c_str());
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "fit-loss error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_synth(const std::string& spec_path, const std::string& out_path, std::uint64_t seed) {
    try {
        SynthSpec spec;
        if (!spec_path.empty()) {
            std::ifstream in(spec_path);
            if (!in) throw std::runtime_error("cannot open spec '" + spec_path + "'");
            nlohmann::json j;
            in >> j;
            spec = synth_spec_from_json(j);
        }
        SeriesTable t = synth_dataset(spec, seed);
        write_csv(t, out_path);
        std::printf("wrote %zu hourly rows -> %s\n", t.size(), out_path.c_str());
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "synth error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"day-ahead load forecasting benchmark"};
    app.require_subcommand(1);

    std::string config_path;
    int threads = 0; // 0: LOADBENCH_THREADS, then hardware
    auto* run = app.add_subcommand("run", "execute a benchmark run from a JSON config");
    run->add_option("--config", config_path, "run configuration JSON")->required();
    run->add_option("--threads", threads, "worker thread cap (overrides LOADBENCH_THREADS)");

    std::string runs_dir, table, pairing = "feature_T", metric = "pinball", report_out;
    auto* report = app.add_subcommand("report", "improvement-proportion report over matched runs");
    report->add_option("--runs", runs_dir, "directory of run artifacts");
    report->add_option("--table", table, "plain CSV table instead of a run directory");
    report->add_option("--pairing", pairing, "feature_T or loss_asym");
    report->add_option("--metric", metric, "pinball or mape (rmse/mae for loss_asym)");
    report->add_option("--out", report_out, "write the report JSON here");

    std::string fit_input, fit_out;
    double tolerance = 0.05;
    int n_knots = -1;
    auto* fit = app.add_subcommand("fit-loss", "fit a differentiable loss from epsilon,cost samples");
    fit->add_option("--input", fit_input, "CSV with header epsilon,cost")->required();
    fit->add_option("--tolerance", tolerance, "L2 fitting-error upper bound");
    fit->add_option("--out", fit_out, "fitted loss JSON")->required();
    fit->add_option("--knots", n_knots, "spline knot count (-1 = auto)");

    std::string synth_spec, synth_out;
    std::uint64_t synth_seed = 0;
    auto* synth = app.add_subcommand("synth", "generate a synthetic hourly dataset CSV");
    synth->add_option("--spec", synth_spec, "generator spec JSON (defaults used when omitted)");
    synth->add_option("--out", synth_out, "output CSV")->required();
    synth->add_option("--seed", synth_seed, "generator seed");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(config_path, threads);
    if (report->parsed()) {
        if (runs_dir.empty() && table.empty()) {
            std::cerr << "report error: --runs or --table is required\n";
            return 2;
        }
        return cmd_report(runs_dir, table, pairing, metric, report_out);
    }
    if (fit->parsed()) return cmd_fit_loss(fit_input, tolerance, fit_out, n_knots);
    if (synth->parsed()) return cmd_synth(synth_spec, synth_out, synth_seed);
    return 2;
}
