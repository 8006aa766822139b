#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "loadbench/rng.hpp"

namespace loadbench {

/// One (forecasting-error, cost) observation. epsilon is the FEP
/// (forecast - actual) / actual; cost is min-max normalised to [0,1].
struct ErrorCostSample {
    double epsilon;
    double cost;
};

/// FEP with a positive floor on the denominator so near-zero loads cannot
/// blow up the error coordinate.
inline double compute_fep(double forecast, double actual, double floor) {
    if (!(floor > 0.0)) throw std::runtime_error("compute_fep: floor must be positive");
    if (!std::isfinite(forecast) || !std::isfinite(actual))
        throw std::runtime_error("compute_fep: non-finite input");
    return (forecast - actual) / std::max(std::fabs(actual), floor);
}

/// Min-max scaling onto [0,1].
inline std::vector<double> normalize_costs(const std::vector<double>& costs) {
    if (costs.size() < 2) throw std::runtime_error("normalize_costs: need at least two values");
    auto [mn, mx] = std::minmax_element(costs.begin(), costs.end());
    if (!(*mx > *mn)) throw std::runtime_error("normalize_costs: all costs equal");
    std::vector<double> out(costs.size());
    double span = *mx - *mn;
    for (std::size_t i = 0; i < costs.size(); ++i) out[i] = (costs[i] - *mn) / span;
    return out;
}

/// Least-squares C2 cubic spline in the truncated-power basis
/// {1, u, u^2, u^3, (u-k_j)^3+} on u = (eps - lo)/(hi - lo). The basis
/// spans all cubics, so exact cubic data is reproduced.
struct SplineFit {
    double lo = 0.0, hi = 1.0;     // domain in epsilon
    std::vector<double> knots_u;   // interior knots, scaled coordinates
    std::vector<double> coef;      // 4 + knots_u.size() coefficients

    double scale() const { return hi - lo; }

    double value(double eps) const {
        const double u = (eps - lo) / scale();
        double s = coef[0] + u * (coef[1] + u * (coef[2] + u * coef[3]));
        for (std::size_t j = 0; j < knots_u.size(); ++j) {
            double z = u - knots_u[j];
            if (z > 0.0) s += coef[4 + j] * z * z * z;
        }
        return s;
    }

    /// Second derivative with respect to epsilon.
    double second_derivative(double eps) const {
        const double u = (eps - lo) / scale();
        double s2 = 2.0 * coef[2] + 6.0 * coef[3] * u;
        for (std::size_t j = 0; j < knots_u.size(); ++j) {
            double z = u - knots_u[j];
            if (z > 0.0) s2 += 6.0 * coef[4 + j] * z;
        }
        return s2 / (scale() * scale());
    }
};

namespace detail {

inline void spline_basis_row(const SplineFit& s, double eps, double* row) {
    const double u = (eps - s.lo) / s.scale();
    row[0] = 1.0;
    row[1] = u;
    row[2] = u * u;
    row[3] = u * u * u;
    for (std::size_t j = 0; j < s.knots_u.size(); ++j) {
        double z = u - s.knots_u[j];
        row[4 + j] = z > 0.0 ? z * z * z : 0.0;
    }
}

/// Normal-equations solve with one step of iterative refinement; the
/// truncated-power basis squares the condition number, refinement recovers
/// the digits needed by the exact-reproduction contracts.
inline Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
    Eigen::MatrixXd ata = a.transpose() * a;
    Eigen::VectorXd aty = a.transpose() * y;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(ata);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("normal equations: factorisation failed (singular system)");
    Eigen::VectorXd beta = ldlt.solve(aty);
    Eigen::VectorXd r = aty - ata * beta;
    beta += ldlt.solve(r);
    if (!beta.allFinite()) throw std::runtime_error("normal equations: non-finite solution");
    return beta;
}

inline double poly_eval(const std::vector<double>& coeffs, double x) {
    double v = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) v = v * x + coeffs[i];
    return v;
}

} // namespace detail

/// Fit the cost curve with a least-squares cubic spline, interior knots at
/// epsilon-quantiles of the samples.
inline SplineFit fit_cubic_spline(std::vector<ErrorCostSample> samples, int n_knots) {
    if (n_knots < 0) throw std::runtime_error("fit_cubic_spline: n_knots must be >= 0");
    if (samples.size() < static_cast<std::size_t>(n_knots) + 4)
        throw std::runtime_error("fit_cubic_spline: need at least n_knots + 4 samples");
    std::sort(samples.begin(), samples.end(),
              [](const ErrorCostSample& a, const ErrorCostSample& b) { return a.epsilon < b.epsilon; });

    SplineFit s;
    s.lo = samples.front().epsilon;
    s.hi = samples.back().epsilon;
    if (!(s.hi > s.lo)) throw std::runtime_error("fit_cubic_spline: epsilon values not distinct");

    const std::size_t n = samples.size();
    for (int j = 1; j <= n_knots; ++j) {
        double q = static_cast<double>(j) / (n_knots + 1);
        std::size_t idx = std::min<std::size_t>(n - 1, static_cast<std::size_t>(std::ceil(q * n)) - 1);
        double knot = (samples[idx].epsilon - s.lo) / s.scale();
        if (!s.knots_u.empty() && !(knot > s.knots_u.back() + 1e-12))
            throw std::runtime_error("fit_cubic_spline: duplicate knots (singular system)");
        if (!(knot > 0.0 && knot < 1.0))
            throw std::runtime_error("fit_cubic_spline: knot collides with domain edge");
        s.knots_u.push_back(knot);
    }

    const int p = 4 + n_knots;
    Eigen::MatrixXd a(n, p);
    Eigen::VectorXd y(n);
    std::vector<double> row(p);
    for (std::size_t i = 0; i < n; ++i) {
        detail::spline_basis_row(s, samples[i].epsilon, row.data());
        for (int j = 0; j < p; ++j) a(i, j) = row[j];
        y(i) = samples[i].cost;
    }
    Eigen::VectorXd beta = detail::solve_normal_equations(a, y);
    s.coef.assign(beta.data(), beta.data() + p);
    return s;
}

/// Segment count from the curvature bound
///   ||s - L||_2 <= (integral of |s''|^(2/5))^(5/2) / (sqrt(120) K^2):
/// K is the smallest integer making the right side <= tolerance. The
/// integral runs over the fit domain with composite Simpson on 1001 points.
inline int required_segments(const SplineFit& s, double tolerance) {
    if (!(tolerance > 0.0)) throw std::runtime_error("required_segments: tolerance must be > 0");
    const int intervals = 1000;
    const double h = (s.hi - s.lo) / intervals;
    auto g = [&](double eps) { return std::pow(std::fabs(s.second_derivative(eps)), 0.4); };
    double sum = g(s.lo) + g(s.hi);
    for (int i = 1; i < intervals; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * g(s.lo + i * h);
    double integral = sum * h / 3.0;
    double a = std::pow(integral, 2.5);
    if (!std::isfinite(a)) throw std::runtime_error("required_segments: non-finite curvature integral");
    if (a <= 0.0) return 1;
    int k = static_cast<int>(std::ceil(std::sqrt(a / (std::sqrt(120.0) * tolerance))));
    return std::max(1, k);
}

/// Curvature functional A = (integral |s''|^(2/5))^(5/2); exposed so the
/// bound itself can be evaluated alongside required_segments.
inline double curvature_functional(const SplineFit& s) {
    const int intervals = 1000;
    const double h = (s.hi - s.lo) / intervals;
    auto g = [&](double eps) { return std::pow(std::fabs(s.second_derivative(eps)), 0.4); };
    double sum = g(s.lo) + g(s.hi);
    for (int i = 1; i < intervals; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * g(s.lo + i * h);
    return std::pow(sum * h / 3.0, 2.5);
}

/// K-1 interior breakpoints at the j/K empirical sample quantiles, which
/// distributes the data points evenly across the K cells.
inline std::vector<double> place_breakpoints(std::vector<double> epsilons, int k) {
    if (k < 1) throw std::runtime_error("place_breakpoints: K must be >= 1");
    if (k == 1) return {};
    std::sort(epsilons.begin(), epsilons.end());
    const std::size_t n = epsilons.size();
    std::size_t distinct = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (i == 0 || epsilons[i] != epsilons[i - 1]) ++distinct;
    if (static_cast<std::size_t>(k - 1) >= distinct)
        throw std::runtime_error("place_breakpoints: K-1 exceeds distinct sample count");

    std::vector<double> b;
    for (int j = 1; j < k; ++j) {
        double q = static_cast<double>(j) / k;
        std::size_t idx = std::min<std::size_t>(n - 1, static_cast<std::size_t>(std::ceil(q * n)) - 1);
        b.push_back(epsilons[idx]);
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
        bool interior = b[j] > epsilons.front() && b[j] < epsilons.back();
        bool distinct_prev = j == 0 || b[j] > b[j - 1];
        if (!interior || !distinct_prev)
            throw std::runtime_error("place_breakpoints: ties leave too few distinct cell boundaries");
    }
    return b;
}

/// Continuous piecewise-linear loss with optional quadratic smoothing cells
/// of half-width delta around each breakpoint. delta = 0 means unsmoothed.
struct PiecewiseLinearLoss {
    std::vector<double> breakpoints; // K-1, strictly increasing
    std::vector<double> slopes;      // K
    std::vector<double> intercepts;  // K
    double delta = 0.0;
    double domain_lo = 0.0, domain_hi = 0.0;

    std::size_t segments() const { return slopes.size(); }

    /// Value and exact first derivative. Outside the fit domain the edge
    /// segments extend, keeping training gradients bounded and nonzero.
    std::pair<double, double> eval(double eps) const {
        // segment index: first breakpoint strictly greater than eps
        std::size_t seg =
            std::upper_bound(breakpoints.begin(), breakpoints.end(), eps) - breakpoints.begin();
        if (delta > 0.0) {
            // at most one smoothing cell can contain eps
            if (seg < breakpoints.size() && eps >= breakpoints[seg] - delta)
                return eval_cell(seg, eps);
            if (seg > 0 && eps <= breakpoints[seg - 1] + delta) return eval_cell(seg - 1, eps);
        }
        return {slopes[seg] * eps + intercepts[seg], slopes[seg]};
    }

    double min_spacing() const {
        if (breakpoints.empty()) return domain_hi - domain_lo;
        double m = breakpoints.front() - domain_lo;
        for (std::size_t i = 1; i < breakpoints.size(); ++i)
            m = std::min(m, breakpoints[i] - breakpoints[i - 1]);
        m = std::min(m, domain_hi - breakpoints.back());
        return m;
    }

private:
    /// Quadratic on [b-delta, b+delta] matching value and slope of the left
    /// segment at b-delta and the slope of the right segment at b+delta;
    /// value continuity on the right then follows.
    std::pair<double, double> eval_cell(std::size_t bp, double eps) const {
        const double b = breakpoints[bp];
        const double m1 = slopes[bp], m2 = slopes[bp + 1];
        const double v = m1 * b + intercepts[bp];
        const double z = eps - b + delta;
        double value = v - m1 * delta + m1 * z + (m2 - m1) * z * z / (4.0 * delta);
        double deriv = m1 + (m2 - m1) * z / (2.0 * delta);
        return {value, deriv};
    }
};

/// Continuous linear-spline least squares on the hinge basis
/// {1, eps, (eps-b_1)+, ..., (eps-b_{K-1})+}; continuity at breakpoints is
/// built into the basis.
inline PiecewiseLinearLoss fit_piecewise_linear(const std::vector<ErrorCostSample>& samples,
                                                const std::vector<double>& breakpoints) {
    const std::size_t n = samples.size();
    const std::size_t k = breakpoints.size() + 1;
    if (n < 2 * k) throw std::runtime_error("fit_piecewise_linear: fewer than 2 samples per cell");

    // occupancy check, cells right-closed at their breakpoint
    std::vector<std::size_t> count(k, 0);
    double lo = samples[0].epsilon, hi = samples[0].epsilon;
    for (const auto& s : samples) {
        std::size_t cell =
            std::lower_bound(breakpoints.begin(), breakpoints.end(), s.epsilon) - breakpoints.begin();
        ++count[cell];
        lo = std::min(lo, s.epsilon);
        hi = std::max(hi, s.epsilon);
    }
    for (std::size_t c = 0; c < k; ++c)
        if (count[c] < 2) throw std::runtime_error("fit_piecewise_linear: cell with fewer than 2 samples");

    const std::size_t p = k + 1;
    Eigen::MatrixXd a(n, p);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = samples[i].epsilon;
        for (std::size_t j = 0; j < breakpoints.size(); ++j) {
            double z = samples[i].epsilon - breakpoints[j];
            a(i, 2 + j) = z > 0.0 ? z : 0.0;
        }
        y(i) = samples[i].cost;
    }
    Eigen::VectorXd beta = detail::solve_normal_equations(a, y);

    PiecewiseLinearLoss out;
    out.breakpoints = breakpoints;
    out.domain_lo = lo;
    out.domain_hi = hi;
    out.slopes.resize(k);
    out.intercepts.resize(k);
    out.slopes[0] = beta(1);
    out.intercepts[0] = beta(0);
    for (std::size_t j = 1; j < k; ++j) {
        out.slopes[j] = out.slopes[j - 1] + beta(1 + j);
        out.intercepts[j] = out.intercepts[j - 1] - beta(1 + j) * breakpoints[j - 1];
    }
    return out;
}

/// Install quadratic smoothing cells. delta must stay below half the
/// minimum spacing between consecutive breakpoints and the domain edges.
inline PiecewiseLinearLoss smooth_breakpoints(const PiecewiseLinearLoss& unsmoothed, double delta) {
    if (!(delta > 0.0)) throw std::runtime_error("smooth_breakpoints: delta must be > 0");
    if (!unsmoothed.breakpoints.empty() && !(delta < 0.5 * unsmoothed.min_spacing()))
        throw std::runtime_error("smooth_breakpoints: delta violates the spacing precondition");
    PiecewiseLinearLoss out = unsmoothed;
    out.delta = unsmoothed.breakpoints.empty() ? 0.0 : delta;
    return out;
}

inline std::pair<double, double> eval_loss(const PiecewiseLinearLoss& loss, double eps) {
    return loss.eval(eps);
}

/// Chain rule through the FEP coordinate: returns the loss value and its
/// derivative with respect to the forecast.
inline std::pair<double, double> training_loss_adapter(const PiecewiseLinearLoss& loss, double forecast,
                                                       double actual, double floor) {
    const double denom = std::max(std::fabs(actual), floor);
    auto [value, deps] = loss.eval((forecast - actual) / denom);
    return {value, deps / denom};
}

/// Stand-in for the paper's appendix polynomial simulator: epsilon uniform
/// on [eps_min, eps_max], cost = clip(polynomial(eps), >= 0) + Gaussian
/// noise, then min-max normalised. Default shape 1.5 eps^2 + 0.8 eps^3 is
/// increasing in |eps| on the default interval and asymmetric.
struct CostCurveSpec {
    std::vector<double> coeffs = {0.0, 0.0, 1.5, 0.8}; // c0 + c1 e + c2 e^2 + c3 e^3
    double eps_min = -0.5;
    double eps_max = 0.5;
    bool clip_at_zero = true;

    double true_cost(double eps) const {
        double v = detail::poly_eval(coeffs, eps);
        return clip_at_zero ? std::max(0.0, v) : v;
    }
};

inline std::vector<ErrorCostSample> simulate_cost_curve(const CostCurveSpec& shape, int n, double noise,
                                                        std::uint64_t seed) {
    if (n < 10) throw std::runtime_error("simulate_cost_curve: n must be >= 10");
    Rng rng(seed);
    std::vector<ErrorCostSample> out(static_cast<std::size_t>(n));
    std::vector<double> costs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double eps = rng.uniform(shape.eps_min, shape.eps_max);
        out[i].epsilon = eps;
        costs[i] = shape.true_cost(eps) + (noise > 0.0 ? rng.normal(0.0, noise) : 0.0);
    }
    std::vector<double> norm = normalize_costs(costs); // throws on a degenerate constant shape
    for (int i = 0; i < n; ++i) out[i].cost = norm[i];
    return out;
}

struct LossFitConfig {
    double tolerance = 0.05;
    int n_knots = -1;            // -1: min(20, n/30)
    double delta_fraction = 0.25; // of the minimum breakpoint spacing
};

/// Full pipeline: spline fit -> segment bound -> breakpoint placement ->
/// hinge least squares -> quadratic smoothing.
inline PiecewiseLinearLoss fit_loss(const std::vector<ErrorCostSample>& samples,
                                    const LossFitConfig& cfg = {}) {
    int n_knots = cfg.n_knots >= 0
                      ? cfg.n_knots
                      : std::min<int>(20, static_cast<int>(samples.size()) / 30);
    SplineFit spline = fit_cubic_spline(samples, n_knots);
    int k = required_segments(spline, cfg.tolerance);

    std::vector<double> eps(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) eps[i] = samples[i].epsilon;
    std::vector<double> bp = place_breakpoints(eps, k);
    PiecewiseLinearLoss pw = fit_piecewise_linear(samples, bp);
    if (!bp.empty()) pw = smooth_breakpoints(pw, cfg.delta_fraction * pw.min_spacing());
    return pw;
}

// --- JSON export/import (bit-exact round trip) ---------------------------

inline nlohmann::json loss_to_json(const PiecewiseLinearLoss& loss) {
    return nlohmann::json{{"breakpoints", loss.breakpoints},
                          {"slopes", loss.slopes},
                          {"intercepts", loss.intercepts},
                          {"delta", loss.delta},
                          {"domain", {loss.domain_lo, loss.domain_hi}}};
}

inline PiecewiseLinearLoss loss_from_json(const nlohmann::json& j) {
    PiecewiseLinearLoss loss;
    loss.breakpoints = j.at("breakpoints").get<std::vector<double>>();
    loss.slopes = j.at("slopes").get<std::vector<double>>();
    loss.intercepts = j.at("intercepts").get<std::vector<double>>();
    loss.delta = j.at("delta").get<double>();
    loss.domain_lo = j.at("domain").at(0).get<double>();
    loss.domain_hi = j.at("domain").at(1).get<double>();
    if (loss.slopes.size() != loss.intercepts.size() ||
        loss.slopes.size() != loss.breakpoints.size() + 1)
        throw std::runtime_error("loss_from_json: inconsistent segment counts");
    return loss;
}

inline void save_loss(const PiecewiseLinearLoss& loss, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_loss: cannot open '" + path + "'");
    out << loss_to_json(loss).dump(2) << '\n';
}

inline PiecewiseLinearLoss load_loss(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_loss: cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;
    return loss_from_json(j);
}

/// Fit input CSV `epsilon,cost`.
inline std::vector<ErrorCostSample> read_error_cost_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_error_cost_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_error_cost_csv: empty file");
    std::vector<ErrorCostSample> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double e = 0.0, c = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf", &e, &c) == 2) out.push_back({e, c});
    }
    return out;
}

inline void write_error_cost_csv(const std::vector<ErrorCostSample>& samples, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_error_cost_csv: cannot open '" + path + "'");
    out << "epsilon,cost\n";
    char buf[96];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", s.epsilon, s.cost);
        out << buf;
    }
}

} // namespace loadbench
