#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "leakloc/errors.hpp"
#include "leakloc/hydraulics.hpp"
#include "leakloc/localizer.hpp"
#include "leakloc/types.hpp"
#include "leakloc/xcorr.hpp"

namespace leakloc {

struct CalibrationKey {
    double pressure_kgfcm2 = 0.0;
    double spacing_L_m = 0.0;
    Axis axis = Axis::X;
};

/// Calibration profiles keyed by (pressure, spacing, axis). Keys match with a
/// small tolerance since they travel through JSON and command lines.
class CalibrationTable {
public:
    struct Entry {
        CalibrationKey key;
        CalibrationProfile profile;
    };

    void set(const CalibrationKey& key, const CalibrationProfile& profile) {
        if (Entry* e = lookup(key)) {
            e->profile = profile;
            return;
        }
        entries_.push_back({key, profile});
    }

    std::optional<CalibrationProfile> find(double pressure_kgfcm2, double spacing_L_m,
                                           Axis axis) const {
        for (const auto& e : entries_)
            if (keys_match(e.key, {pressure_kgfcm2, spacing_L_m, axis})) return e.profile;
        return std::nullopt;
    }

    /// Per-axis profiles for one condition; unset axes default to zeros.
    std::array<CalibrationProfile, 3> find_axes(double pressure_kgfcm2,
                                                double spacing_L_m) const {
        std::array<CalibrationProfile, 3> out{};
        for (Axis a : kAllAxes)
            if (auto p = find(pressure_kgfcm2, spacing_L_m, a))
                out[static_cast<std::size_t>(a)] = *p;
        return out;
    }

    bool has_condition(double pressure_kgfcm2, double spacing_L_m) const {
        for (const auto& e : entries_)
            if (nearly(e.key.pressure_kgfcm2, pressure_kgfcm2) &&
                nearly(e.key.spacing_L_m, spacing_L_m))
                return true;
        return false;
    }

    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

private:
    static bool nearly(double a, double b) { return std::abs(a - b) <= 1e-6; }

    static bool keys_match(const CalibrationKey& a, const CalibrationKey& b) {
        return a.axis == b.axis && nearly(a.pressure_kgfcm2, b.pressure_kgfcm2) &&
               nearly(a.spacing_L_m, b.spacing_L_m);
    }

    Entry* lookup(const CalibrationKey& key) {
        for (auto& e : entries_)
            if (keys_match(e.key, key)) return &e;
        return nullptr;
    }

    std::vector<Entry> entries_;
};

inline nlohmann::json to_json(const CalibrationTable& table) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : table.entries()) {
        arr.push_back({{"pressure_kgfcm2", e.key.pressure_kgfcm2},
                       {"spacing_L_m", e.key.spacing_L_m},
                       {"axis", axis_name(e.key.axis)},
                       {"t_noLeak_s", e.profile.t_noLeak_s},
                       {"t_buffer_s", e.profile.t_buffer_s}});
    }
    return nlohmann::json{{"calibration", arr}};
}

inline CalibrationTable calibration_from_json(const nlohmann::json& j) {
    CalibrationTable table;
    try {
        for (const auto& e : j.at("calibration")) {
            const auto axis = axis_from_name(e.at("axis").get<std::string>());
            if (!axis)
                throw SchemaError("calibration entry with unknown axis");
            table.set({e.at("pressure_kgfcm2").get<double>(),
                       e.at("spacing_L_m").get<double>(), *axis},
                      {e.at("t_noLeak_s").get<double>(), e.at("t_buffer_s").get<double>()});
        }
    } catch (const nlohmann::json::exception& ex) {
        throw SchemaError(std::string("calibration file: ") + ex.what());
    }
    return table;
}

inline void save_calibration(const std::string& path, const CalibrationTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoFailure("cannot open " + path + " for writing");
    out << to_json(table).dump(2) << '\n';
    if (!out)
        throw IoFailure("calibration write failed: " + path);
}

inline CalibrationTable load_calibration(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoFailure("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
    return calibration_from_json(j);
}

struct CalibrateOptions {
    bool normalized = true;
    CorrMethod method = CorrMethod::Fft;
    bool fit_buffer = true;
    /// Filter leak pairs with an interference profile estimated from the
    /// condition's no-leak baseline before measuring their lag. No-leak lags
    /// are always measured unfiltered; their interference correlation is the
    /// very signal that exposes the clock skew.
    bool auto_profile = true;
    std::size_t top_k = kDefaultTopK;
    std::size_t estimation_window = kDefaultEstimationWindow;
    double notch_bandwidth_hz = kDefaultNotchBandwidthHz;
};

namespace detail {

// (pressure, spacing) quantized so doubles can key a map
using ConditionKey = std::pair<long long, long long>;

inline ConditionKey condition_key(double pressure, double spacing) {
    return {std::llround(pressure * 1e6), std::llround(spacing * 1e6)};
}

} // namespace detail

/// Build a calibration table from no-leak pairs (their peak lags become
/// t_noLeak per condition and axis) and, optionally, leak pairs with a known
/// leak position (their mean residual against the ideal delay becomes
/// t_buffer). Leak pairs under a condition that has no no-leak baseline
/// raise MissingBaseline.
inline CalibrationTable calibrate_from_pairs(std::span<const RecordingPair> pairs,
                                             const PipeSpec& spec,
                                             const CalibrateOptions& options = {}) {
    CalibrationTable table;

    struct Acc {
        double sum = 0.0;
        std::size_t count = 0;
    };
    std::map<std::tuple<long long, long long, int>, Acc> no_leak_acc, residual_acc;
    const auto quantize = [](double v) { return std::llround(v * 1e6); };

    const auto peak_lag = [&](const TriAxialSeries& right, const TriAxialSeries& left,
                              Axis a) {
        const auto corr = cross_correlate(right.axis(a), left.axis(a),
                                          left.sample_rate_hz(), options.normalized, a,
                                          options.method);
        return find_peak(corr).peak_lag_s;
    };

    std::map<detail::ConditionKey, const RecordingPair*> baseline_for;
    for (const auto& pair : pairs) {
        if (pair.left.scenario != Scenario::NoLeak) continue;
        baseline_for.try_emplace(
            detail::condition_key(pair.left.pressure_kgfcm2, pair.geometry.spacing_L_m),
            &pair);
        for (Axis a : kAllAxes) {
            auto& acc = no_leak_acc[{quantize(pair.left.pressure_kgfcm2),
                                     quantize(pair.geometry.spacing_L_m),
                                     static_cast<int>(a)}];
            acc.sum += peak_lag(pair.right.series, pair.left.series, a);
            acc.count += 1;
        }
    }
    for (const auto& [key, acc] : no_leak_acc) {
        const auto& [p, s, a] = key;
        table.set({static_cast<double>(p) / 1e6, static_cast<double>(s) / 1e6,
                   static_cast<Axis>(a)},
                  {acc.sum / static_cast<double>(acc.count), 0.0});
    }

    if (options.fit_buffer) {
        std::map<detail::ConditionKey, InterferenceProfile> profile_cache;
        const auto condition_profile =
            [&](const detail::ConditionKey& key) -> const InterferenceProfile* {
            if (!options.auto_profile) return nullptr;
            const auto hit = profile_cache.find(key);
            if (hit != profile_cache.end()) return &hit->second;
            const auto base = baseline_for.find(key);
            if (base == baseline_for.end()) return nullptr;
            auto profile = estimate_profile(base->second->left.series,
                                            InterferenceSource::Combined, options.top_k,
                                            options.estimation_window,
                                            base->second->left.pressure_kgfcm2);
            return &profile_cache.emplace(key, std::move(profile)).first->second;
        };

        for (const auto& pair : pairs) {
            if (pair.left.scenario != Scenario::Leak ||
                !pair.geometry.true_leak_from_left_m)
                continue;
            const double L = pair.geometry.spacing_L_m;
            const double c =
                wave_speed({pair.left.flow_lpm, pair.left.pressure_kgfcm2}, spec);
            // ideal delay for the known position, referenced from the right sensor
            const double d_truth = L - *pair.geometry.true_leak_from_left_m;
            const double dt_ideal = (L - 2.0 * d_truth) / c;

            const auto key = detail::condition_key(pair.left.pressure_kgfcm2, L);
            const InterferenceProfile* profile = condition_profile(key);
            std::optional<TriAxialSeries> fl, fr;
            if (profile && !profile->dominant_bins.empty()) {
                fl = filter_series(pair.left.series, *profile, options.notch_bandwidth_hz);
                fr = filter_series(pair.right.series, *profile, options.notch_bandwidth_hz);
            }
            const TriAxialSeries& left = fl ? *fl : pair.left.series;
            const TriAxialSeries& right = fr ? *fr : pair.right.series;

            for (Axis a : kAllAxes) {
                const auto cal = table.find(pair.left.pressure_kgfcm2, L, a);
                if (!cal)
                    throw MissingBaseline(
                        "calibrate: leak pair at pressure " +
                        std::to_string(pair.left.pressure_kgfcm2) + ", spacing " +
                        std::to_string(L) + " has no no-leak baseline");
                auto& acc = residual_acc[{quantize(pair.left.pressure_kgfcm2), quantize(L),
                                          static_cast<int>(a)}];
                acc.sum += peak_lag(right, left, a) - cal->t_noLeak_s - dt_ideal;
                acc.count += 1;
            }
        }
        for (const auto& [key, acc] : residual_acc) {
            const auto& [p, s, a] = key;
            const double pressure = static_cast<double>(p) / 1e6;
            const double spacing = static_cast<double>(s) / 1e6;
            const Axis axis = static_cast<Axis>(a);
            auto profile = *table.find(pressure, spacing, axis);
            profile.t_buffer_s = acc.sum / static_cast<double>(acc.count);
            table.set({pressure, spacing, axis}, profile);
        }
    }

    return table;
}

} // namespace leakloc
