#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "leakloc/errors.hpp"
#include "leakloc/fft.hpp"
#include "leakloc/types.hpp"

namespace leakloc {

enum class CorrMethod { Direct, Fft };

/// Cross-correlation values over a lag axis in seconds.
/// lags_s runs from -(N-1)/fs to +(N-1)/fs in steps of 1/fs.
struct CorrelationFunction {
    std::vector<double> lags_s;
    std::vector<double> values;
    bool normalized = true;
    Axis axis = Axis::X;

    std::size_t size() const { return values.size(); }
};

/// Peak of a correlation function. classification stays unset until
/// classify() is applied.
struct DelayEstimate {
    double peak_lag_s = 0.0;
    double peak_value = 0.0;
    Axis axis = Axis::X;
    std::optional<Scenario> classification;
};

namespace detail {

inline std::vector<double> remove_mean(std::span<const double> s) {
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(s.size());
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] - mean;
    return out;
}

inline double sum_of_squares(std::span<const double> s) {
    double acc = 0.0;
    for (double v : s) acc += v * v;
    return acc;
}

// r(k) = sum_n s1[n] * s2[n+k], k in [-(N-1), N-1]
inline std::vector<double> xcorr_direct(std::span<const double> s1,
                                        std::span<const double> s2) {
    const auto n = static_cast<std::ptrdiff_t>(s1.size());
    std::vector<double> r(static_cast<std::size_t>(2 * n - 1), 0.0);
    for (std::ptrdiff_t k = -(n - 1); k <= n - 1; ++k) {
        double acc = 0.0;
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -k);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, n - 1 - k);
        for (std::ptrdiff_t i = lo; i <= hi; ++i)
            acc += s1[static_cast<std::size_t>(i)] * s2[static_cast<std::size_t>(i + k)];
        r[static_cast<std::size_t>(k + n - 1)] = acc;
    }
    return r;
}

inline std::vector<double> xcorr_fft(std::span<const double> s1,
                                     std::span<const double> s2) {
    const std::size_t n = s1.size();
    const std::size_t m = next_pow2(2 * n - 1);
    std::vector<std::complex<double>> a(m), b(m);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = s1[i];
        b[i] = s2[i];
    }
    fft_radix2(a, false);
    fft_radix2(b, false);
    for (std::size_t i = 0; i < m; ++i) a[i] = std::conj(a[i]) * b[i];
    fft_radix2(a, true);
    // circular index m+k holds negative lags; padding >= 2n-1 prevents wrap
    std::vector<double> r(2 * n - 1);
    for (std::ptrdiff_t k = -(static_cast<std::ptrdiff_t>(n) - 1);
         k <= static_cast<std::ptrdiff_t>(n) - 1; ++k) {
        const std::size_t idx = k >= 0 ? static_cast<std::size_t>(k)
                                       : m - static_cast<std::size_t>(-k);
        r[static_cast<std::size_t>(k + static_cast<std::ptrdiff_t>(n) - 1)] = a[idx].real();
    }
    return r;
}

} // namespace detail

/// Cross-correlate two equally sampled single-axis signals.
///
/// Sign convention: a positive peak lag means s2 lags s1, i.e. the common
/// feature reaches the second signal later. Means are removed internally;
/// when normalized, values are divided by sqrt(sum(s1^2) * sum(s2^2)) so the
/// result is bounded by 1 in magnitude.
inline CorrelationFunction cross_correlate(std::span<const double> s1,
                                           std::span<const double> s2,
                                           double sample_rate_hz,
                                           bool normalized = true,
                                           Axis axis = Axis::X,
                                           CorrMethod method = CorrMethod::Fft) {
    if (s1.size() != s2.size())
        throw LengthMismatch("cross_correlate: inputs differ in length");
    if (s1.size() < 2)
        throw LengthMismatch("cross_correlate: need at least two samples");
    if (!(sample_rate_hz > 0) || !std::isfinite(sample_rate_hz))
        throw Error("cross_correlate: sample rate must be positive");

    const std::vector<double> a = detail::remove_mean(s1);
    const std::vector<double> b = detail::remove_mean(s2);

    std::vector<double> values = method == CorrMethod::Direct
                                     ? detail::xcorr_direct(a, b)
                                     : detail::xcorr_fft(a, b);

    if (normalized) {
        const double ea = detail::sum_of_squares(a);
        const double eb = detail::sum_of_squares(b);
        if (ea <= 0.0 || eb <= 0.0)
            throw DegenerateInput("cross_correlate: zero-variance input cannot be normalized");
        const double scale = 1.0 / std::sqrt(ea * eb);
        for (double& v : values) v *= scale;
    }

    const auto n = static_cast<std::ptrdiff_t>(s1.size());
    std::vector<double> lags(values.size());
    for (std::ptrdiff_t k = -(n - 1); k <= n - 1; ++k)
        lags[static_cast<std::size_t>(k + n - 1)] = static_cast<double>(k) / sample_rate_hz;

    return CorrelationFunction{std::move(lags), std::move(values), normalized, axis};
}

/// Lag of the highest correlation value (highest value, not highest
/// magnitude). Ties go to the smallest |lag|, then to the negative lag.
///
/// subsample_refine fits a parabola through the peak and its neighbours and
/// returns the vertex instead of the bin. Off by default: the recorded tables
/// this toolkit reproduces were read at whole bins, and refinement would
/// shift them.
inline DelayEstimate find_peak(const CorrelationFunction& corr, bool subsample_refine = false) {
    if (corr.values.empty() || corr.lags_s.size() != corr.values.size())
        throw Error("find_peak: empty or inconsistent correlation function");

    std::size_t best = 0;
    for (std::size_t i = 1; i < corr.values.size(); ++i) {
        const double v = corr.values[i];
        const double bv = corr.values[best];
        if (v > bv) {
            best = i;
        } else if (v == bv) {
            const double li = std::abs(corr.lags_s[i]);
            const double lb = std::abs(corr.lags_s[best]);
            if (li < lb || (li == lb && corr.lags_s[i] < corr.lags_s[best]))
                best = i;
        }
    }

    DelayEstimate est{corr.lags_s[best], corr.values[best], corr.axis, std::nullopt};
    if (subsample_refine && best > 0 && best + 1 < corr.values.size()) {
        const double ym = corr.values[best - 1];
        const double y0 = corr.values[best];
        const double yp = corr.values[best + 1];
        const double denom = ym - 2.0 * y0 + yp;
        if (denom < 0.0) {
            double delta = 0.5 * (ym - yp) / denom;
            delta = std::clamp(delta, -0.5, 0.5);
            const double step = best + 1 < corr.lags_s.size()
                                    ? corr.lags_s[best + 1] - corr.lags_s[best]
                                    : corr.lags_s[best] - corr.lags_s[best - 1];
            est.peak_lag_s = corr.lags_s[best] + delta * step;
            est.peak_value = y0 - 0.25 * (ym - yp) * delta;
        }
    }
    return est;
}

/// A peak within threshold_s of the origin reads NoLeak, anything farther
/// reads Leak. The boundary is inclusive (NoLeak).
inline DelayEstimate classify(DelayEstimate estimate, double threshold_s) {
    if (!(threshold_s > 0) || !std::isfinite(threshold_s))
        throw Error("classify: threshold must be positive");
    estimate.classification = std::abs(estimate.peak_lag_s) <= threshold_s
                                  ? Scenario::NoLeak
                                  : Scenario::Leak;
    return estimate;
}

} // namespace leakloc
