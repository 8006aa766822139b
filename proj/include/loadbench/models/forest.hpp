#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "loadbench/features.hpp"
#include "loadbench/quantiles.hpp"
#include "loadbench/rng.hpp"

namespace loadbench {

enum class SplitRule { best, random };
enum class LeafMode { all, sample };

struct ForestConfig {
    int n_trees = 100;
    int max_depth = -1; // -1: unlimited
    int min_leaf = 5;
    SplitRule split_rule = SplitRule::best;
    LeafMode leaf_mode = LeafMode::all;
    std::uint64_t seed = 0;
    int fit_threads = 1; // per-tree seeding keeps results thread-count independent

    void validate() const {
        if (n_trees < 1) throw std::runtime_error("forest: n_trees must be >= 1");
        if (min_leaf < 1) throw std::runtime_error("forest: min_leaf must be >= 1");
    }
};

struct TreeNode {
    int feature = -1; // -1: leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> leaf_targets; // all members, or the one sampled target
};

struct Tree {
    std::vector<TreeNode> nodes;

    const TreeNode& leaf_for(std::span<const double> row) const {
        int cur = 0;
        while (nodes[cur].feature >= 0)
            cur = row[nodes[cur].feature] <= nodes[cur].threshold ? nodes[cur].left : nodes[cur].right;
        return nodes[cur];
    }
};

namespace detail {

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

struct TreeBuilder {
    const DayAheadMatrix& data;
    const std::vector<std::size_t>& sample; // bootstrap row indices
    const ForestConfig& cfg;
    Rng& rng;      // structure stream: bootstrap, feature subsets, thresholds
    Rng& leaf_rng; // separate stream so leaf_mode never changes the trees
    Tree tree;

    double value(std::size_t sample_pos, int feature) const {
        return data.row(sample[sample_pos])[feature];
    }

    /// Exhaustive variance-reduction split over one feature: sort member
    /// values, scan boundaries between distinct values with running sums.
    SplitCandidate best_split_on(const std::vector<std::size_t>& members, int f) const {
        std::vector<std::pair<double, double>> vt(members.size()); // (value, target)
        for (std::size_t i = 0; i < members.size(); ++i)
            vt[i] = {data.row(members[i])[f], data.targets[members[i]]};
        std::sort(vt.begin(), vt.end());

        SplitCandidate best;
        double left_sum = 0.0, left_sq = 0.0;
        double total_sum = 0.0, total_sq = 0.0;
        for (const auto& [v, t] : vt) {
            total_sum += t;
            total_sq += t * t;
        }
        const std::size_t n = vt.size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_sum += vt[i].second;
            left_sq += vt[i].second * vt[i].second;
            if (vt[i].first == vt[i + 1].first) continue; // no boundary here
            const std::size_t nl = i + 1, nr = n - nl;
            if (nl < static_cast<std::size_t>(cfg.min_leaf) || nr < static_cast<std::size_t>(cfg.min_leaf))
                continue;
            const double right_sum = total_sum - left_sum;
            const double right_sq = total_sq - left_sq;
            const double sse = (left_sq - left_sum * left_sum / static_cast<double>(nl)) +
                               (right_sq - right_sum * right_sum / static_cast<double>(nr));
            if (sse < best.sse) {
                best.feature = f;
                best.threshold = 0.5 * (vt[i].first + vt[i + 1].first);
                best.sse = sse;
            }
        }
        return best;
    }

    /// Extremely-randomised variant: one uniform threshold per candidate
    /// feature, keep the best by variance reduction.
    SplitCandidate random_split_on(const std::vector<std::size_t>& members, int f) const {
        double mn = value_of(members.front(), f), mx = mn;
        for (std::size_t m : members) {
            double v = data.row(m)[f];
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        SplitCandidate best;
        if (!(mx > mn)) return best;
        const double thr = rng.uniform(mn, mx);

        double ls = 0.0, lq = 0.0, rs = 0.0, rq = 0.0;
        std::size_t nl = 0, nr = 0;
        for (std::size_t m : members) {
            double t = data.targets[m];
            if (data.row(m)[f] <= thr) {
                ls += t;
                lq += t * t;
                ++nl;
            } else {
                rs += t;
                rq += t * t;
                ++nr;
            }
        }
        if (nl < static_cast<std::size_t>(cfg.min_leaf) || nr < static_cast<std::size_t>(cfg.min_leaf))
            return best;
        best.feature = f;
        best.threshold = thr;
        best.sse = (lq - ls * ls / static_cast<double>(nl)) + (rq - rs * rs / static_cast<double>(nr));
        return best;
    }

    double value_of(std::size_t row, int f) const { return data.row(row)[f]; }

    int build(std::vector<std::size_t> members, int depth) {
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        bool pure = true;
        for (std::size_t i = 1; i < members.size(); ++i)
            if (data.targets[members[i]] != data.targets[members[0]]) {
                pure = false;
                break;
            }
        const bool stop = members.size() < 2 * static_cast<std::size_t>(cfg.min_leaf) || pure ||
                          (cfg.max_depth >= 0 && depth >= cfg.max_depth);

        SplitCandidate best;
        if (!stop) {
            // random feature subset of size ceil(sqrt(p)), without replacement
            const int p = data.cols();
            int mtry = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));
            std::vector<int> feats(p);
            for (int i = 0; i < p; ++i) feats[i] = i;
            for (int i = 0; i < mtry; ++i) {
                int j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(p - i)));
                std::swap(feats[i], feats[j]);
            }
            for (int i = 0; i < mtry; ++i) {
                SplitCandidate c = cfg.split_rule == SplitRule::best
                                       ? best_split_on(members, feats[i])
                                       : random_split_on(members, feats[i]);
                if (c.feature >= 0 && c.sse < best.sse) best = c;
            }
        }

        if (best.feature < 0) {
            TreeNode& leaf = tree.nodes[node_id];
            if (cfg.leaf_mode == LeafMode::sample) {
                std::size_t pick = static_cast<std::size_t>(leaf_rng.uniform_index(members.size()));
                leaf.leaf_targets.push_back(data.targets[members[pick]]);
            } else {
                leaf.leaf_targets.reserve(members.size());
                for (std::size_t m : members) leaf.leaf_targets.push_back(data.targets[m]);
            }
            return node_id;
        }

        std::vector<std::size_t> left, right;
        for (std::size_t m : members)
            (data.row(m)[best.feature] <= best.threshold ? left : right).push_back(m);

        tree.nodes[node_id].feature = best.feature;
        tree.nodes[node_id].threshold = best.threshold;
        int l = build(std::move(left), depth + 1);
        tree.nodes[node_id].left = l;
        int r = build(std::move(right), depth + 1);
        tree.nodes[node_id].right = r;
        return node_id;
    }
};

} // namespace detail

/// Meinshausen-style quantile forest: CART regression trees on bootstrap
/// samples; leaves keep all member targets (leaf_mode=all) or one uniformly
/// sampled member target (leaf_mode=sample).
class QuantileForestModel {
public:
    static QuantileForestModel fit(const DayAheadMatrix& train, const ForestConfig& cfg) {
        cfg.validate();
        if (train.rows() == 0) throw std::runtime_error("forest: empty training matrix");
        QuantileForestModel model;
        model.cfg_ = cfg;
        model.trees_.resize(static_cast<std::size_t>(cfg.n_trees));

        auto fit_tree = [&](int t) {
            Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(t));
            Rng leaf_rng = Rng::stream(cfg.seed ^ 0x1eafull, static_cast<std::uint64_t>(t));
            std::vector<std::size_t> boot(train.rows());
            for (std::size_t i = 0; i < train.rows(); ++i)
                boot[i] = static_cast<std::size_t>(rng.uniform_index(train.rows()));
            std::sort(boot.begin(), boot.end()); // canonical member order within nodes
            detail::TreeBuilder builder{train, boot, cfg, rng, leaf_rng, {}};
            builder.build(boot, 0);
            model.trees_[static_cast<std::size_t>(t)] = std::move(builder.tree);
        };

        const int threads = std::max(1, cfg.fit_threads);
        if (threads == 1 || cfg.n_trees == 1) {
            for (int t = 0; t < cfg.n_trees; ++t) fit_tree(t);
        } else {
            std::vector<std::thread> pool;
            std::atomic<int> next{0};
            for (int w = 0; w < threads; ++w)
                pool.emplace_back([&] {
                    for (int t = next.fetch_add(1); t < cfg.n_trees; t = next.fetch_add(1)) fit_tree(t);
                });
            for (auto& th : pool) th.join();
        }
        return model;
    }

    /// Weighted-CDF prediction: each reached leaf member carries weight
    /// 1/(n_trees * leaf_size) (all) or 1/n_trees (sample); quantile q is
    /// inf{y : weighted CDF(y) >= q}.
    QuantileForecast predict(const DayAheadMatrix& test, const QuantileGrid& grid) const {
        grid.validate();
        QuantileForecast f;
        f.grid = grid;
        f.timestamps = test.timestamps;
        f.values.resize(test.rows() * grid.size());

        const double tree_w = 1.0 / static_cast<double>(trees_.size());
        std::vector<std::pair<double, double>> pool; // (value, weight)
        for (std::size_t r = 0; r < test.rows(); ++r) {
            pool.clear();
            for (const Tree& tree : trees_) {
                const TreeNode& leaf = tree.leaf_for(test.row(r));
                const double w = tree_w / static_cast<double>(leaf.leaf_targets.size());
                for (double v : leaf.leaf_targets) pool.emplace_back(v, w);
            }
            std::stable_sort(pool.begin(), pool.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            double cum = 0.0;
            std::size_t pos = 0;
            for (std::size_t j = 0; j < grid.size(); ++j) {
                while (pos < pool.size() && cum + pool[pos].second < grid.levels[j] - kCdfTolerance)
                    cum += pool[pos++].second;
                // pos now sits on the first value whose cumulative mass reaches q
                f.at(r, j) = pool[std::min(pos, pool.size() - 1)].first;
            }
        }
        return f;
    }

    const std::vector<Tree>& trees() const { return trees_; }
    const ForestConfig& config() const { return cfg_; }

private:
    ForestConfig cfg_;
    std::vector<Tree> trees_;
};

inline QuantileForecast fit_predict_forest(const DayAheadMatrix& train, const DayAheadMatrix& test,
                                           const QuantileGrid& grid, const ForestConfig& cfg) {
    return QuantileForestModel::fit(train, cfg).predict(test, grid);
}

} // namespace loadbench
