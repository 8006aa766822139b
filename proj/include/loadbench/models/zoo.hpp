#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "loadbench/models/baselines.hpp"
#include "loadbench/models/ffnn.hpp"
#include "loadbench/models/forest.hpp"

namespace loadbench {

/// Shared knobs for the zoo. The `_T` suffix is handled upstream: the
/// bench builds the coupled design matrix for `_T` variants and the raw
/// one otherwise, then dispatches on the base name.
struct ZooParams {
    int window_days = 30; // BMQ
    int knn_k = 20;       // QKNNR
    double qce_ridge = 1e-8;
    ForestConfig forest;
    NetConfig net;
};

inline const std::vector<std::string>& model_names() {
    static const std::vector<std::string> names = {
        "BEQ",  "BMQ",    "BCEP",    "QCE",  "QCE_T",  "QKNNR", "QKNNR_T", "QRFR", "QRFR_T",
        "QSRFR", "QSRFR_T", "QERT", "QERT_T", "QSERT", "QSERT_T", "FFNN", "FFNN_T"};
    return names;
}

inline bool is_t_variant(const std::string& name) {
    return name.size() > 2 && name.compare(name.size() - 2, 2, "_T") == 0;
}

inline std::string base_model_name(const std::string& name) {
    return is_t_variant(name) ? name.substr(0, name.size() - 2) : name;
}

/// Fig-4 style category split: the FFNN family stands in for the deep
/// methods, everything else is non-deep.
inline bool is_deep_model(const std::string& name) {
    return base_model_name(name) == "FFNN";
}

inline bool model_exists(const std::string& name) {
    for (const auto& n : model_names())
        if (n == name) return true;
    return false;
}

inline QuantileForecast run_quantile_model(const std::string& name, const DayAheadMatrix& train,
                                           const DayAheadMatrix& test, const QuantileGrid& grid,
                                           const ZooParams& params) {
    const std::string base = base_model_name(name);
    if (base == "BEQ") return fit_predict_beq(train, test, grid);
    if (base == "BMQ") return fit_predict_bmq(train, test, grid, params.window_days);
    if (base == "BCEP") return fit_predict_bcep(train, test, grid);
    if (base == "QCE") return fit_predict_qce(train, test, grid, params.qce_ridge);
    if (base == "QKNNR") return fit_predict_qknn(train, test, grid, params.knn_k);
    if (base == "QRFR" || base == "QSRFR" || base == "QERT" || base == "QSERT") {
        ForestConfig cfg = params.forest;
        cfg.split_rule = (base == "QERT" || base == "QSERT") ? SplitRule::random : SplitRule::best;
        cfg.leaf_mode = (base == "QSRFR" || base == "QSERT") ? LeafMode::sample : LeafMode::all;
        return fit_predict_forest(train, test, grid, cfg);
    }
    if (base == "FFNN") return fit_predict_ffnn(train, test, grid, params.net);
    throw std::runtime_error("unknown model '" + name + "'");
}

} // namespace loadbench
