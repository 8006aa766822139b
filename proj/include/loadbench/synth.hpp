#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "loadbench/rng.hpp"
#include "loadbench/series.hpp"
#include "loadbench/timeutil.hpp"

namespace loadbench {

/// Synthetic hourly load generator standing in for the archive datasets in
/// tests: daily+weekly sinusoidal base, a temperature covariate, and a
/// V-shaped temperature-load response whose slope varies by weekday.
struct SynthSpec {
    int n_hours = 2880; // 120 days
    std::string start = "2017-01-01T00:00:00";

    double base_level = 100.0;
    double daily_amplitude = 20.0;
    double weekly_amplitude = 8.0;
    double noise_sd = 2.0;

    bool with_temperature = true;
    double temp_mean = 15.0;
    double temp_seasonal_amplitude = 10.0;
    double temp_daily_amplitude = 5.0;
    double temp_noise = 1.5;

    double v_slope = 3.0;              // load per degree of |T - v_ref|
    double v_ref = 18.0;               // comfort temperature
    double v_weekday_variation = 0.5;  // relative slope spread across weekdays

    double missing_rate = 0.0; // load cells masked independently

    void validate() const {
        if (n_hours < 1) throw std::runtime_error("synth: n_hours must be >= 1");
        if (missing_rate < 0.0 || missing_rate >= 1.0)
            throw std::runtime_error("synth: missing_rate must be in [0,1)");
    }
};

inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
    SynthSpec s;
    s.n_hours = j.value("n_hours", s.n_hours);
    s.start = j.value("start", s.start);
    s.base_level = j.value("base_level", s.base_level);
    s.daily_amplitude = j.value("daily_amplitude", s.daily_amplitude);
    s.weekly_amplitude = j.value("weekly_amplitude", s.weekly_amplitude);
    s.noise_sd = j.value("noise_sd", s.noise_sd);
    s.with_temperature = j.value("with_temperature", s.with_temperature);
    s.temp_mean = j.value("temp_mean", s.temp_mean);
    s.temp_seasonal_amplitude = j.value("temp_seasonal_amplitude", s.temp_seasonal_amplitude);
    s.temp_daily_amplitude = j.value("temp_daily_amplitude", s.temp_daily_amplitude);
    s.temp_noise = j.value("temp_noise", s.temp_noise);
    s.v_slope = j.value("v_slope", s.v_slope);
    s.v_ref = j.value("v_ref", s.v_ref);
    s.v_weekday_variation = j.value("v_weekday_variation", s.v_weekday_variation);
    s.missing_rate = j.value("missing_rate", s.missing_rate);
    s.validate();
    return s;
}

inline nlohmann::json synth_spec_to_json(const SynthSpec& s) {
    return nlohmann::json{{"n_hours", s.n_hours},
                          {"start", s.start},
                          {"base_level", s.base_level},
                          {"daily_amplitude", s.daily_amplitude},
                          {"weekly_amplitude", s.weekly_amplitude},
                          {"noise_sd", s.noise_sd},
                          {"with_temperature", s.with_temperature},
                          {"temp_mean", s.temp_mean},
                          {"temp_seasonal_amplitude", s.temp_seasonal_amplitude},
                          {"temp_daily_amplitude", s.temp_daily_amplitude},
                          {"temp_noise", s.temp_noise},
                          {"v_slope", s.v_slope},
                          {"v_ref", s.v_ref},
                          {"v_weekday_variation", s.v_weekday_variation},
                          {"missing_rate", s.missing_rate}};
}

inline SeriesTable synth_dataset(const SynthSpec& spec, std::uint64_t seed) {
    spec.validate();
    auto start = parse_timestamp(spec.start);
    if (!start || *start % 3600 != 0)
        throw std::runtime_error("synth: start must be a whole-hour timestamp");

    Rng rng(seed);
    SeriesTable t;
    if (spec.with_temperature) t.covariates.emplace_back("airTemperature", Column{});

    const double two_pi = 6.283185307179586476925286766559;
    for (int i = 0; i < spec.n_hours; ++i) {
        const std::int64_t ts = *start + static_cast<std::int64_t>(i) * 3600;
        t.timestamps.push_back(ts);

        const std::int64_t days = ts / 86400;
        const double hod = static_cast<double>((ts / 3600) % 24);
        const double how = static_cast<double>(weekday_from_days(days)) * 24.0 + hod;
        const int dow = weekday_from_days(days);
        const double doy_frac = static_cast<double>(days % 365) / 365.0;

        double temp = 0.0;
        if (spec.with_temperature) {
            temp = spec.temp_mean + spec.temp_seasonal_amplitude * std::sin(two_pi * doy_frac) +
                   spec.temp_daily_amplitude * std::sin(two_pi * (hod - 14.0) / 24.0) +
                   (spec.temp_noise > 0.0 ? rng.normal(0.0, spec.temp_noise) : 0.0);
            t.covariates[0].second.push(temp, false);
        }

        double load = spec.base_level +
                      spec.daily_amplitude * std::sin(two_pi * (hod - 6.0) / 24.0) +
                      spec.weekly_amplitude * std::sin(two_pi * how / 168.0);
        if (spec.with_temperature) {
            // weekday-dependent V response around the comfort temperature
            const double slope =
                spec.v_slope * (1.0 + spec.v_weekday_variation * (static_cast<double>(dow) - 3.0) / 3.0);
            load += slope * std::fabs(temp - spec.v_ref);
        }
        if (spec.noise_sd > 0.0) load += rng.normal(0.0, spec.noise_sd);

        const bool missing = spec.missing_rate > 0.0 && rng.uniform() < spec.missing_rate;
        t.load.push(load, missing);
    }
    t.validate();
    return t;
}

} // namespace loadbench
