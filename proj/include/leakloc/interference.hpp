#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "leakloc/errors.hpp"
#include "leakloc/fft.hpp"
#include "leakloc/types.hpp"

namespace leakloc {

enum class InterferenceSource { Motor, Pump, Valve, Combined };

inline const char* interference_source_name(InterferenceSource s) {
    switch (s) {
        case InterferenceSource::Motor: return "Motor";
        case InterferenceSource::Pump: return "Pump";
        case InterferenceSource::Valve: return "Valve";
        case InterferenceSource::Combined: return "Combined";
    }
    return "?";
}

inline std::optional<InterferenceSource> interference_source_from_name(std::string_view s) {
    if (s == "Motor" || s == "motor") return InterferenceSource::Motor;
    if (s == "Pump" || s == "pump") return InterferenceSource::Pump;
    if (s == "Valve" || s == "valve") return InterferenceSource::Valve;
    if (s == "Combined" || s == "combined") return InterferenceSource::Combined;
    return std::nullopt;
}

struct SpectralBin {
    double frequency_hz = 0.0;
    double magnitude = 0.0;
};

/// Dominant spectral lines of one interference source, estimated from a
/// no-leak baseline capture. Bins are sorted by frequency.
struct InterferenceProfile {
    InterferenceSource source = InterferenceSource::Combined;
    double pressure_kgfcm2 = 0.0;
    std::vector<SpectralBin> dominant_bins;
    std::size_t estimation_window = 1024;
};

inline constexpr std::size_t kDefaultEstimationWindow = 1024;
inline constexpr double kDefaultNotchBandwidthHz = 2.0;
inline constexpr std::size_t kDefaultTopK = 5;

namespace detail {

// averaged magnitude spectrum over consecutive windows, mean removed first
inline std::vector<double> averaged_spectrum(std::span<const double> signal,
                                             std::size_t window, std::size_t& fft_size_out) {
    const std::size_t m = next_pow2(window);
    fft_size_out = m;
    const std::size_t segments = signal.size() / window;
    double mean = 0.0;
    for (double v : signal) mean += v;
    mean /= static_cast<double>(signal.size());

    std::vector<double> mag(m / 2 + 1, 0.0);
    std::vector<std::complex<double>> buf(m);
    for (std::size_t s = 0; s < segments; ++s) {
        std::fill(buf.begin(), buf.end(), std::complex<double>{});
        for (std::size_t i = 0; i < window; ++i) buf[i] = signal[s * window + i] - mean;
        fft_radix2(buf, false);
        for (std::size_t k = 0; k <= m / 2; ++k) mag[k] += std::abs(buf[k]);
    }
    const double scale = 2.0 / (static_cast<double>(segments) * static_cast<double>(window));
    for (double& v : mag) v *= scale; // amplitude-ish units, ordering is what matters
    return mag;
}

struct RawPeak {
    std::size_t bin;
    double frequency_hz;
    double magnitude;
};

inline std::vector<RawPeak> spectral_peaks(const std::vector<double>& mag, double bin_hz) {
    std::vector<RawPeak> peaks;
    if (mag.size() < 3) return peaks;
    double max_mag = 0.0;
    for (double v : mag) max_mag = std::max(max_mag, v);
    if (max_mag <= 0.0) return peaks;
    const double floor = std::max(1e-12, 1e-9 * max_mag);
    for (std::size_t k = 1; k + 1 < mag.size(); ++k) {
        if (mag[k] <= floor) continue;
        if (mag[k] > mag[k - 1] && mag[k] >= mag[k + 1]) {
            // parabolic refinement for lines that fall between bins
            const double denom = mag[k - 1] - 2.0 * mag[k] + mag[k + 1];
            double delta = 0.0;
            if (denom < 0.0) delta = 0.5 * (mag[k - 1] - mag[k + 1]) / denom;
            delta = std::clamp(delta, -0.5, 0.5);
            peaks.push_back({k, (static_cast<double>(k) + delta) * bin_hz, mag[k]});
        }
    }
    return peaks;
}

} // namespace detail

/// Pick the top_k spectral lines of a no-leak baseline, per axis and then
/// merged across axes. Deterministic for a fixed input.
inline InterferenceProfile estimate_profile(const TriAxialSeries& baseline,
                                            InterferenceSource source, std::size_t top_k,
                                            std::size_t estimation_window = kDefaultEstimationWindow,
                                            double pressure_kgfcm2 = 0.0) {
    if (estimation_window < 8)
        throw Error("estimate_profile: estimation window too small");
    if (baseline.size() < estimation_window)
        throw TooShort("estimate_profile: baseline shorter than the estimation window");
    if (top_k == 0)
        throw Error("estimate_profile: top_k must be positive");

    const double fs = baseline.sample_rate_hz();
    std::vector<detail::RawPeak> merged;
    for (Axis a : kAllAxes) {
        std::size_t m = 0;
        const auto mag = detail::averaged_spectrum(baseline.axis(a), estimation_window, m);
        const double bin_hz = fs / static_cast<double>(m);
        auto peaks = detail::spectral_peaks(mag, bin_hz);
        std::sort(peaks.begin(), peaks.end(),
                  [](const auto& l, const auto& r) { return l.magnitude > r.magnitude; });
        if (peaks.size() > top_k) peaks.resize(top_k);
        for (const auto& p : peaks) {
            // same line seen on another axis: keep the strongest reading
            auto dup = std::find_if(merged.begin(), merged.end(), [&](const auto& q) {
                return std::abs(static_cast<std::ptrdiff_t>(q.bin) -
                                static_cast<std::ptrdiff_t>(p.bin)) <= 1;
            });
            if (dup == merged.end())
                merged.push_back(p);
            else if (p.magnitude > dup->magnitude)
                *dup = p;
        }
    }

    std::sort(merged.begin(), merged.end(),
              [](const auto& l, const auto& r) { return l.magnitude > r.magnitude; });
    if (merged.size() > top_k) merged.resize(top_k);

    InterferenceProfile profile{source, pressure_kgfcm2, {}, estimation_window};
    for (const auto& p : merged)
        profile.dominant_bins.push_back({p.frequency_hz, p.magnitude});
    std::sort(profile.dominant_bins.begin(), profile.dominant_bins.end(),
              [](const auto& l, const auto& r) { return l.frequency_hz < r.frequency_hz; });
    return profile;
}

namespace detail {

struct Biquad {
    double b0, b1, b2, a1, a2;

    // RBJ notch with the given -3 dB bandwidth
    static Biquad notch(double f0_hz, double bandwidth_hz, double fs_hz) {
        const double w0 = 2.0 * std::numbers::pi * f0_hz / fs_hz;
        const double q = f0_hz / bandwidth_hz;
        const double alpha = std::sin(w0) / (2.0 * q);
        const double a0 = 1.0 + alpha;
        return Biquad{1.0 / a0, -2.0 * std::cos(w0) / a0, 1.0 / a0, -2.0 * std::cos(w0) / a0,
                      (1.0 - alpha) / a0};
    }

    void apply(std::vector<double>& x) const {
        double z1 = 0.0, z2 = 0.0; // transposed direct form II
        for (double& v : x) {
            const double in = v;
            const double out = b0 * in + z1;
            z1 = b1 * in - a1 * out + z2;
            z2 = b2 * in - a2 * out;
            v = out;
        }
    }
};

} // namespace detail

/// Remove the mean of each axis, then notch out every dominant bin of the
/// profile. Length, rate, and start time are preserved.
inline TriAxialSeries filter_series(const TriAxialSeries& series,
                                    const InterferenceProfile& profile,
                                    double notch_bandwidth_hz = kDefaultNotchBandwidthHz) {
    const double nyquist = series.sample_rate_hz() / 2.0;
    for (const auto& bin : profile.dominant_bins) {
        if (bin.frequency_hz >= nyquist)
            throw NyquistViolation("filter_series: profile bin at or above Nyquist");
        if (bin.frequency_hz < 0)
            throw Error("filter_series: negative bin frequency");
    }
    if (!(notch_bandwidth_hz > 0))
        throw Error("filter_series: notch bandwidth must be positive");

    std::array<std::vector<double>, 3> out;
    for (Axis a : kAllAxes) {
        const auto src = series.axis(a);
        double mean = 0.0;
        for (double v : src) mean += v;
        mean /= static_cast<double>(src.size());
        auto& dst = out[static_cast<std::size_t>(a)];
        dst.resize(src.size());
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] - mean;
        for (const auto& bin : profile.dominant_bins) {
            if (bin.frequency_hz <= 0.0) continue; // DC is already gone with the mean
            detail::Biquad::notch(bin.frequency_hz, notch_bandwidth_hz, series.sample_rate_hz())
                .apply(dst);
        }
    }
    return TriAxialSeries(series.sample_rate_hz(), series.start_time_s(), std::move(out));
}

} // namespace leakloc
