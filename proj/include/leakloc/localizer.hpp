#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "leakloc/errors.hpp"
#include "leakloc/hydraulics.hpp"
#include "leakloc/interference.hpp"
#include "leakloc/types.hpp"
#include "leakloc/xcorr.hpp"

namespace leakloc {

/// Leak position computed from one axis, with everything needed to recompute
/// it: d_l_m == (spacing_L_m - wave_speed_mps * delta_t_s) / 2.
///
/// d_l_m is measured from the right-hand sensor, the first argument of the
/// pair correlation (see localize_pair). delta_t_s is the corrected delay
/// actually fed into the formula; measured_lag_s is the raw correlation peak.
struct LocalizationResult {
    Axis axis = Axis::X;
    double d_l_m = 0.0;
    double spacing_L_m = 0.0;
    double wave_speed_mps = 0.0;
    double delta_t_s = 0.0;
    std::optional<double> error_percent;
    bool out_of_range = false;

    // provenance
    double measured_lag_s = 0.0;
    double peak_value = 0.0;
    double t_noLeak_s = 0.0;
    double t_buffer_s = 0.0;
    std::optional<Scenario> classification;
};

/// No-leak baseline lag and buffer time for one operating condition.
struct CalibrationProfile {
    double t_noLeak_s = 0.0;
    double t_buffer_s = 0.0;
};

/// Delay and position windows implied by a fractional accuracy target.
/// dt_min_s pairs with d_min_m (it is the positive bound); dt_max_s pairs
/// with d_max_m.
struct IdealDelayBounds {
    double d_actual_per_side_m = 0.0;
    double epsilon = 0.0;
    double d_min_m = 0.0;
    double d_max_m = 0.0;
    double dt_min_s = 0.0;
    double dt_max_s = 0.0;
    std::optional<double> t_actual_min_s;
    std::optional<double> t_actual_max_s;
};

/// d_l = (L - c * dt) / 2. Out-of-range positions are flagged, never
/// clamped; recorded field data does produce them.
inline LocalizationResult localize(double spacing_L_m, double c_mps, double delta_t_s) {
    if (!(spacing_L_m > 0) || !std::isfinite(spacing_L_m))
        throw InvalidGeometry("localize: spacing must be positive");
    if (!(c_mps > 0) || !std::isfinite(c_mps))
        throw InvalidGeometry("localize: wave speed must be positive");
    if (!std::isfinite(delta_t_s))
        throw Error("localize: delay must be finite");

    LocalizationResult res;
    res.d_l_m = (spacing_L_m - c_mps * delta_t_s) / 2.0;
    res.spacing_L_m = spacing_L_m;
    res.wave_speed_mps = c_mps;
    res.delta_t_s = delta_t_s;
    res.out_of_range = res.d_l_m < 0.0 || res.d_l_m > spacing_L_m;
    return res;
}

/// Signed error in percent of the actual distance.
inline double error_percent(double d_actual_m, double d_computed_m) {
    if (d_actual_m == 0.0)
        throw ZeroActual("error_percent: actual distance is zero");
    if (!std::isfinite(d_actual_m) || !std::isfinite(d_computed_m))
        throw Error("error_percent: non-finite input");
    return 100.0 * (d_actual_m - d_computed_m) / d_actual_m;
}

/// t_measured - t_noLeak - t_buffer. With a zero buffer this is plain
/// baseline subtraction.
inline double corrected_delay(double t_measured_s, const CalibrationProfile& cal) {
    if (!std::isfinite(t_measured_s) || !std::isfinite(cal.t_noLeak_s) ||
        !std::isfinite(cal.t_buffer_s))
        throw Error("corrected_delay: non-finite input");
    return t_measured_s - cal.t_noLeak_s - cal.t_buffer_s;
}

/// The raw lag a target delay shows up as once the no-leak baseline is on
/// top of it.
inline double t_actual(double delta_t_ideal_s, double t_noLeak_s) {
    if (!std::isfinite(delta_t_ideal_s) || !std::isfinite(t_noLeak_s))
        throw Error("t_actual: non-finite input");
    return delta_t_ideal_s + t_noLeak_s;
}

/// Delay window that keeps the computed position within a fractional
/// accuracy epsilon of the true per-side distance, for an equidistant
/// deployment (L = 2 * d_actual). Bounds are computed unrounded.
inline IdealDelayBounds ideal_delay_bounds(double d_actual_per_side_m, double c_mps,
                                           double epsilon,
                                           std::optional<double> t_noLeak_s = std::nullopt) {
    if (!(d_actual_per_side_m > 0) || !std::isfinite(d_actual_per_side_m))
        throw InvalidGeometry("ideal_delay_bounds: distance must be positive");
    if (!(c_mps > 0) || !std::isfinite(c_mps))
        throw InvalidGeometry("ideal_delay_bounds: wave speed must be positive");
    if (!(epsilon >= 0) || epsilon >= 1 || !std::isfinite(epsilon))
        throw InvalidEpsilon("ideal_delay_bounds: epsilon must lie in [0, 1)");
    if (t_noLeak_s && !std::isfinite(*t_noLeak_s))
        throw Error("ideal_delay_bounds: t_noLeak must be finite");

    IdealDelayBounds b;
    b.d_actual_per_side_m = d_actual_per_side_m;
    b.epsilon = epsilon;
    const double slack = d_actual_per_side_m * epsilon;
    b.d_min_m = d_actual_per_side_m - slack;
    b.d_max_m = d_actual_per_side_m + slack;
    // dt for a target d is (L - 2d)/c with L = 2*d_actual
    const double dt = 2.0 * slack / c_mps;
    b.dt_min_s = dt;   // shorter distance, positive delay
    b.dt_max_s = -dt;  // longer distance, negative delay
    if (t_noLeak_s) {
        b.t_actual_min_s = t_actual(b.dt_min_s, *t_noLeak_s);
        b.t_actual_max_s = t_actual(b.dt_max_s, *t_noLeak_s);
    }
    return b;
}

struct LocalizeOptions {
    std::optional<InterferenceProfile> profile;
    double notch_bandwidth_hz = kDefaultNotchBandwidthHz;
    double threshold_s = 0.5;
    bool normalized = true;
    CorrMethod method = CorrMethod::Fft;
};

/// Full per-axis pipeline for an aligned pair: filter (when a profile is
/// given), correlate right against left, take the peak, subtract the
/// calibration, and run the distance formula.
///
/// The correlation is taken with the right-hand sensor first, so a positive
/// measured lag means the left sensor saw the feature later, and d_l comes
/// out referenced to the right-hand sensor. error_percent is filled in when
/// the pair's geometry carries the true leak position.
inline std::array<LocalizationResult, 3> localize_pair(
    const RecordingPair& pair, const std::array<CalibrationProfile, 3>& cal,
    const FlowMeasurement& flow, const PipeSpec& spec, const LocalizeOptions& options = {}) {
    if (pair.left.series.size() != pair.right.series.size())
        throw LengthMismatch("localize_pair: pair is not aligned");
    const double fs_l = pair.left.series.sample_rate_hz();
    const double fs_r = pair.right.series.sample_rate_hz();
    if (std::abs(fs_l - fs_r) > 1e-9 * std::max(fs_l, fs_r))
        throw RateMismatch("localize_pair: pair is not aligned");
    pair.geometry.validate();

    const double c = wave_speed(flow, spec);
    const double fs = fs_l;
    const double L = pair.geometry.spacing_L_m;

    std::optional<TriAxialSeries> filtered_left, filtered_right;
    if (options.profile) {
        filtered_left = filter_series(pair.left.series, *options.profile,
                                      options.notch_bandwidth_hz);
        filtered_right = filter_series(pair.right.series, *options.profile,
                                       options.notch_bandwidth_hz);
    }
    const TriAxialSeries& left = filtered_left ? *filtered_left : pair.left.series;
    const TriAxialSeries& right = filtered_right ? *filtered_right : pair.right.series;

    std::array<LocalizationResult, 3> results;
    for (Axis a : kAllAxes) {
        const auto& cal_a = cal[static_cast<std::size_t>(a)];
        const auto corr = cross_correlate(right.axis(a), left.axis(a), fs,
                                          options.normalized, a, options.method);
        const DelayEstimate est = classify(find_peak(corr), options.threshold_s);
        const double dt = corrected_delay(est.peak_lag_s, cal_a);

        LocalizationResult res = localize(L, c, dt);
        res.axis = a;
        res.measured_lag_s = est.peak_lag_s;
        res.peak_value = est.peak_value;
        res.t_noLeak_s = cal_a.t_noLeak_s;
        res.t_buffer_s = cal_a.t_buffer_s;
        res.classification = est.classification;
        if (pair.geometry.true_leak_from_left_m) {
            const double d_truth = L - *pair.geometry.true_leak_from_left_m;
            if (d_truth != 0.0) res.error_percent = error_percent(d_truth, res.d_l_m);
        }
        results[static_cast<std::size_t>(a)] = res;
    }
    return results;
}

/// Same calibration applied to all three axes.
inline std::array<LocalizationResult, 3> localize_pair(const RecordingPair& pair,
                                                       const CalibrationProfile& cal,
                                                       const FlowMeasurement& flow,
                                                       const PipeSpec& spec,
                                                       const LocalizeOptions& options = {}) {
    return localize_pair(pair, std::array<CalibrationProfile, 3>{cal, cal, cal}, flow, spec,
                         options);
}

} // namespace leakloc
