#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "loadbench/features.hpp"
#include "loadbench/models/common.hpp"
#include "loadbench/quantiles.hpp"
#include "loadbench/rng.hpp"

namespace loadbench {

enum class NetOutputMode { quantile_grid, point };

struct NetConfig {
    int hidden_width = 64;
    int epochs = 100;
    double learning_rate = 1e-3;
    double lr_decay = 1.0; // per-epoch multiplicative decay; 1 = constant
    int batch_size = 128;
    std::uint64_t seed = 0;
    bool trend_concat = false;
    NetOutputMode output_mode = NetOutputMode::quantile_grid;

    void validate() const {
        if (hidden_width < 1 || epochs < 0 || batch_size < 1 || !(learning_rate > 0.0))
            throw std::runtime_error("ffnn: hyperparameters must be positive");
        if (!(lr_decay > 0.0 && lr_decay <= 1.0))
            throw std::runtime_error("ffnn: lr_decay must be in (0,1]");
    }
};

namespace detail {

inline double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    if (x >= 0.0) {
        double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace detail

/// One-hidden-layer network with a smooth rectifier (softplus), trained by
/// seeded mini-batch SGD on standardised inputs and mean-scaled targets.
///
/// trend_concat routes only the lag block through the hidden layer and
/// concatenates the hidden activations with the remaining feature blocks
/// before the final affine layer, mirroring the trend-variable treatment of
/// sequence models; otherwise all blocks feed the hidden layer.
///
/// Parameters live in one flat vector [w1 | b1 | w2 | b2] so training and
/// gradient checks share the exact same code path.
class FfnnModel {
public:
    FfnnModel(const DayAheadMatrix& train, const QuantileGrid& grid, const NetConfig& cfg,
              const PointLoss* point_loss = nullptr)
        : cfg_(cfg), grid_(grid), point_loss_(point_loss) {
        cfg_.validate();
        if (train.rows() == 0) throw std::runtime_error("ffnn: empty training matrix");
        if (cfg_.output_mode == NetOutputMode::point && point_loss_ == nullptr)
            throw std::runtime_error("ffnn: point mode needs a training loss");
        if (cfg_.output_mode == NetOutputMode::quantile_grid) grid_.validate();

        p_ = train.cols();
        lag_dim_ = train.layout.lag_dim;
        hidden_in_ = cfg_.trend_concat ? lag_dim_ : p_;
        direct_ = cfg_.trend_concat ? p_ - lag_dim_ : 0;
        heads_ = cfg_.output_mode == NetOutputMode::quantile_grid ? static_cast<int>(grid_.size()) : 1;
        hidden_ = cfg_.hidden_width;

        std_ = Standardizer::fit(train);
        double mean = std::accumulate(train.targets.begin(), train.targets.end(), 0.0) /
                      static_cast<double>(train.rows());
        yscale_ = std::fabs(mean) > 1e-12 ? mean : 1.0;

        params_.assign(param_count(), 0.0);
        Rng rng(cfg_.seed);
        const double a1 = 1.0 / std::sqrt(static_cast<double>(hidden_in_));
        for (int i = 0; i < hidden_ * hidden_in_; ++i) params_[w1_off() + i] = rng.uniform(-a1, a1);
        const double a2 = 1.0 / std::sqrt(static_cast<double>(hidden_ + direct_));
        for (int i = 0; i < heads_ * (hidden_ + direct_); ++i) params_[w2_off() + i] = rng.uniform(-a2, a2);
        for (int q = 0; q < heads_; ++q) params_[b2_off() + q] = 1.0; // scaled target mean
    }

    void fit(const DayAheadMatrix& train) {
        const std::size_t n = train.rows();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng(cfg_.seed ^ 0x5bf03635ul);
        std::vector<double> grad(params_.size());

        double lr = cfg_.learning_rate;
        for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
            shuffle_rng.shuffle(order);
            double epoch_loss = 0.0;
            for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg_.batch_size)) {
                std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg_.batch_size));
                std::span<const std::size_t> batch(order.data() + start, end - start);
                epoch_loss += loss_and_gradient(train, batch, grad) * static_cast<double>(batch.size());
                for (std::size_t i = 0; i < params_.size(); ++i) params_[i] -= lr * grad[i];
            }
            if (!std::isfinite(epoch_loss))
                throw std::runtime_error("ffnn: training diverged (non-finite loss) at epoch " +
                                         std::to_string(epoch));
            lr *= cfg_.lr_decay;
        }
    }

    /// Mean loss over the index set and its gradient w.r.t. every
    /// parameter. Public so finite-difference checks can drive it.
    double loss_and_gradient(const DayAheadMatrix& data, std::span<const std::size_t> idx,
                             std::vector<double>& grad) const {
        grad.assign(params_.size(), 0.0);
        std::vector<double> z(p_), pre(hidden_), act(hidden_ + direct_), out(heads_), dout(heads_);
        double total = 0.0;
        for (std::size_t i : idx) {
            forward(data.row(i), z, pre, act, out);
            total += loss_and_dout(out, data.targets[i], dout);
            backward(z, pre, act, dout, grad);
        }
        const double inv = 1.0 / static_cast<double>(idx.size());
        for (double& g : grad) g *= inv;
        return total * inv;
    }

    QuantileForecast predict(const DayAheadMatrix& test) const {
        if (cfg_.output_mode != NetOutputMode::quantile_grid)
            throw std::runtime_error("ffnn: not a quantile-grid model");
        QuantileForecast f;
        f.grid = grid_;
        f.timestamps = test.timestamps;
        f.values.resize(test.rows() * grid_.size());
        std::vector<double> z(p_), pre(hidden_), act(hidden_ + direct_), out(heads_);
        for (std::size_t r = 0; r < test.rows(); ++r) {
            forward(test.row(r), z, pre, act, out);
            for (int q = 0; q < heads_; ++q) f.at(r, static_cast<std::size_t>(q)) = out[q] * yscale_;
        }
        return f;
    }

    std::vector<double> predict_point(const DayAheadMatrix& test) const {
        std::vector<double> preds(test.rows());
        std::vector<double> z(p_), pre(hidden_), act(hidden_ + direct_), out(heads_);
        for (std::size_t r = 0; r < test.rows(); ++r) {
            forward(test.row(r), z, pre, act, out);
            preds[r] = out[0] * yscale_;
        }
        return preds;
    }

    std::vector<double>& parameters() { return params_; }
    const std::vector<double>& parameters() const { return params_; }
    double target_scale() const { return yscale_; }

private:
    int param_count() const {
        return hidden_ * hidden_in_ + hidden_ + heads_ * (hidden_ + direct_) + heads_;
    }
    int w1_off() const { return 0; }
    int b1_off() const { return hidden_ * hidden_in_; }
    int w2_off() const { return b1_off() + hidden_; }
    int b2_off() const { return w2_off() + heads_ * (hidden_ + direct_); }

    void forward(std::span<const double> raw, std::vector<double>& z, std::vector<double>& pre,
                 std::vector<double>& act, std::vector<double>& out) const {
        std_.apply(raw, z);
        const double* w1 = params_.data() + w1_off();
        const double* b1 = params_.data() + b1_off();
        for (int j = 0; j < hidden_; ++j) {
            double s = b1[j];
            const double* wj = w1 + j * hidden_in_;
            for (int i = 0; i < hidden_in_; ++i) s += wj[i] * z[i];
            pre[j] = s;
            act[j] = detail::softplus(s);
        }
        for (int d = 0; d < direct_; ++d) act[hidden_ + d] = z[lag_dim_ + d];
        const double* w2 = params_.data() + w2_off();
        const double* b2 = params_.data() + b2_off();
        const int m = hidden_ + direct_;
        for (int q = 0; q < heads_; ++q) {
            double s = b2[q];
            const double* wq = w2 + q * m;
            for (int i = 0; i < m; ++i) s += wq[i] * act[i];
            out[q] = s;
        }
    }

    /// Loss for one sample given head outputs (scaled space) and the
    /// gradient of the loss w.r.t. each head output.
    double loss_and_dout(const std::vector<double>& out, double target, std::vector<double>& dout) const {
        if (cfg_.output_mode == NetOutputMode::quantile_grid) {
            const double y = target / yscale_;
            double loss = 0.0;
            for (int q = 0; q < heads_; ++q) {
                const double level = grid_.levels[static_cast<std::size_t>(q)];
                const double u = y - out[q];
                loss += u >= 0.0 ? level * u : (level - 1.0) * u;
                dout[q] = u > 0.0 ? -level : (1.0 - level);
            }
            return loss;
        }
        auto [value, dout0] = point_loss_->eval_scaled(out[0], target, yscale_);
        dout[0] = dout0;
        return value;
    }

    void backward(const std::vector<double>& z, const std::vector<double>& pre,
                  const std::vector<double>& act, const std::vector<double>& dout,
                  std::vector<double>& grad) const {
        double* g1 = grad.data() + w1_off();
        double* gb1 = grad.data() + b1_off();
        double* g2 = grad.data() + w2_off();
        double* gb2 = grad.data() + b2_off();
        const double* w2 = params_.data() + w2_off();
        const int m = hidden_ + direct_;

        thread_local std::vector<double> dact;
        dact.assign(static_cast<std::size_t>(hidden_), 0.0);
        for (int q = 0; q < heads_; ++q) {
            const double d = dout[q];
            if (d == 0.0) continue;
            double* gq = g2 + q * m;
            const double* wq = w2 + q * m;
            for (int i = 0; i < m; ++i) gq[i] += d * act[i];
            gb2[q] += d;
            for (int j = 0; j < hidden_; ++j) dact[j] += d * wq[j];
        }
        for (int j = 0; j < hidden_; ++j) {
            const double dpre = dact[j] * detail::sigmoid(pre[j]);
            if (dpre == 0.0) continue;
            double* gj = g1 + j * hidden_in_;
            for (int i = 0; i < hidden_in_; ++i) gj[i] += dpre * z[i];
            gb1[j] += dpre;
        }
    }

    NetConfig cfg_;
    QuantileGrid grid_;
    const PointLoss* point_loss_;
    int p_ = 0, lag_dim_ = 0, hidden_in_ = 0, direct_ = 0, heads_ = 0, hidden_ = 0;
    Standardizer std_;
    double yscale_ = 1.0;
    std::vector<double> params_;
};

inline QuantileForecast fit_predict_ffnn(const DayAheadMatrix& train, const DayAheadMatrix& test,
                                         const QuantileGrid& grid, const NetConfig& cfg) {
    NetConfig c = cfg;
    c.output_mode = NetOutputMode::quantile_grid;
    FfnnModel model(train, grid, c);
    model.fit(train);
    return model.predict(test);
}

inline std::vector<double> fit_predict_ffnn_point(const DayAheadMatrix& train, const DayAheadMatrix& test,
                                                  const NetConfig& cfg, const PointLoss& loss) {
    NetConfig c = cfg;
    c.output_mode = NetOutputMode::point;
    FfnnModel model(train, QuantileGrid{}, c, &loss);
    model.fit(train);
    return model.predict_point(test);
}

} // namespace loadbench
