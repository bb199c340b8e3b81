#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "leakloc/errors.hpp"
#include "leakloc/types.hpp"

namespace leakloc {

namespace detail {

// rates survive a CSV round trip only to ~1e-15 relative, so compare loosely
inline bool rates_equal(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

} // namespace detail

/// Trim both recordings to their overlapping time window and equal length.
///
/// Whole-sample start-time differences disappear into the trim. A residual
/// sub-sample offset is recorded on the pair, never resampled away; it is the
/// kind of constant the no-leak calibration exists to absorb.
inline RecordingPair align_pair(const SensorRecording& left, const SensorRecording& right,
                                const DeploymentGeometry& geometry) {
    geometry.validate();
    left.validate();
    right.validate();
    if (left.side != Side::Left || right.side != Side::Right)
        throw Error("align_pair: recordings must be labelled Left and Right");
    if (left.scenario != right.scenario)
        throw Error("align_pair: recordings disagree on scenario label");
    if (left.pressure_kgfcm2 != right.pressure_kgfcm2 || left.flow_lpm != right.flow_lpm)
        throw Error("align_pair: recordings disagree on pressure or flow labels");

    const double fs_l = left.series.sample_rate_hz();
    const double fs_r = right.series.sample_rate_hz();
    if (!detail::rates_equal(fs_l, fs_r))
        throw RateMismatch("align_pair: sample rates differ");
    const double fs = fs_l;

    const double start = std::max(left.series.start_time_s(), right.series.start_time_s());
    const auto first_index = [&](const TriAxialSeries& s) {
        const double offset = (start - s.start_time_s()) * fs;
        const auto idx = static_cast<std::ptrdiff_t>(std::ceil(offset - 1e-9));
        return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, idx));
    };
    const std::size_t first_l = first_index(left.series);
    const std::size_t first_r = first_index(right.series);
    if (first_l >= left.series.size() || first_r >= right.series.size())
        throw NoOverlap("align_pair: recordings share no time window");

    const std::size_t count =
        std::min(left.series.size() - first_l, right.series.size() - first_r);

    RecordingPair pair{left, right, geometry, 0.0};
    pair.left.series = left.series.slice(first_l, count);
    pair.right.series = right.series.slice(first_r, count);
    pair.residual_offset_s =
        pair.right.series.start_time_s() - pair.left.series.start_time_s();
    if (std::abs(pair.residual_offset_s) < 1e-12) pair.residual_offset_s = 0.0;
    return pair;
}

} // namespace leakloc
