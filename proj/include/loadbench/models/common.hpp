#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "loadbench/features.hpp"
#include "loadbench/lossfit.hpp"

namespace loadbench {

/// Per-column affine transform fitted on training rows; models standardise
/// internally so the raw matrices stay interpretable.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> inv_sd;

    static Standardizer fit(const DayAheadMatrix& m) {
        const int p = m.cols();
        const std::size_t n = m.rows();
        if (n == 0) throw std::runtime_error("standardizer: empty training matrix");
        Standardizer s;
        s.mean.assign(p, 0.0);
        s.inv_sd.assign(p, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto r = m.row(i);
            for (int j = 0; j < p; ++j) s.mean[j] += r[j];
        }
        for (int j = 0; j < p; ++j) s.mean[j] /= static_cast<double>(n);
        std::vector<double> var(p, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto r = m.row(i);
            for (int j = 0; j < p; ++j) {
                double d = r[j] - s.mean[j];
                var[j] += d * d;
            }
        }
        for (int j = 0; j < p; ++j) {
            double sd = std::sqrt(var[j] / static_cast<double>(n));
            s.inv_sd[j] = sd > 1e-12 ? 1.0 / sd : 1.0; // constant columns pass through
        }
        return s;
    }

    void apply(std::span<const double> in, std::span<double> out) const {
        for (std::size_t j = 0; j < in.size(); ++j) out[j] = (in[j] - mean[j]) * inv_sd[j];
    }
};

/// Training loss for point-forecast mode: value and derivative with
/// respect to the forecast, in natural (unscaled) units.
///
/// The network trains in mean-scaled target space; eval_scaled is the loss
/// the optimiser sees, with out = forecast / yscale. The default chains
/// through the unscaling, which suits scale-invariant losses (the FEP-based
/// asymmetric loss); quadratic losses override it to stay O(1).
class PointLoss {
public:
    virtual ~PointLoss() = default;
    virtual std::pair<double, double> eval(double forecast, double actual) const = 0;
    virtual std::string name() const = 0;

    virtual std::pair<double, double> eval_scaled(double out, double actual, double yscale) const {
        auto [value, dfdx] = eval(out * yscale, actual);
        return {value, dfdx * yscale};
    }
};

class MseLoss final : public PointLoss {
public:
    std::pair<double, double> eval(double forecast, double actual) const override {
        const double e = forecast - actual;
        return {e * e, 2.0 * e};
    }
    std::string name() const override { return "mse"; }

    /// Squared error in scaled space; same minimiser, load-scale-free
    /// gradients.
    std::pair<double, double> eval_scaled(double out, double actual, double yscale) const override {
        const double e = out - actual / yscale;
        return {e * e, 2.0 * e};
    }
};

/// Data-fitted asymmetric loss evaluated through the FEP coordinate.
class AsymmetricLoss final : public PointLoss {
public:
    AsymmetricLoss(PiecewiseLinearLoss loss, double fep_floor)
        : loss_(std::move(loss)), floor_(fep_floor) {}

    std::pair<double, double> eval(double forecast, double actual) const override {
        return training_loss_adapter(loss_, forecast, actual, floor_);
    }
    std::string name() const override { return "asymmetric"; }

    const PiecewiseLinearLoss& fitted() const { return loss_; }
    double floor() const { return floor_; }

private:
    PiecewiseLinearLoss loss_;
    double floor_;
};

} // namespace loadbench
