#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "leakloc/errors.hpp"

namespace leakloc {

enum class Axis { X = 0, Y = 1, Z = 2 };

inline constexpr std::array<Axis, 3> kAllAxes{Axis::X, Axis::Y, Axis::Z};

inline const char* axis_name(Axis a) {
    switch (a) {
        case Axis::X: return "x";
        case Axis::Y: return "y";
        case Axis::Z: return "z";
    }
    return "?";
}

inline std::optional<Axis> axis_from_name(std::string_view s) {
    if (s == "x" || s == "X") return Axis::X;
    if (s == "y" || s == "Y") return Axis::Y;
    if (s == "z" || s == "Z") return Axis::Z;
    return std::nullopt;
}

enum class Scenario { NoLeak, Leak };

inline const char* scenario_name(Scenario s) {
    return s == Scenario::NoLeak ? "NoLeak" : "Leak";
}

inline std::optional<Scenario> scenario_from_name(std::string_view s) {
    if (s == "NoLeak" || s == "no_leak" || s == "noleak") return Scenario::NoLeak;
    if (s == "Leak" || s == "leak") return Scenario::Leak;
    return std::nullopt;
}

enum class Side { Left, Right };

/// Uniformly sampled three-axis acceleration record. Sample i of every axis
/// was taken at start_time_s() + i / sample_rate_hz(). Values are in g.
/// Immutable after construction.
class TriAxialSeries {
public:
    TriAxialSeries(double sample_rate_hz, double start_time_s,
                   std::array<std::vector<double>, 3> axes)
        : sample_rate_hz_(sample_rate_hz),
          start_time_s_(start_time_s),
          axes_(std::move(axes)) {
        if (!(sample_rate_hz_ > 0) || !std::isfinite(sample_rate_hz_))
            throw Error("TriAxialSeries: sample rate must be positive and finite");
        if (!std::isfinite(start_time_s_))
            throw Error("TriAxialSeries: start time must be finite");
        const std::size_t n = axes_[0].size();
        if (n == 0)
            throw Error("TriAxialSeries: empty sample sequence");
        if (axes_[1].size() != n || axes_[2].size() != n)
            throw Error("TriAxialSeries: axis lengths differ");
        for (const auto& ax : axes_)
            for (double v : ax)
                if (!std::isfinite(v))
                    throw Error("TriAxialSeries: non-finite sample");
    }

    double sample_rate_hz() const { return sample_rate_hz_; }
    double start_time_s() const { return start_time_s_; }
    std::size_t size() const { return axes_[0].size(); }
    double duration_s() const { return static_cast<double>(size()) / sample_rate_hz_; }

    std::span<const double> axis(Axis a) const { return axes_[static_cast<std::size_t>(a)]; }

    double time_at(std::size_t i) const {
        return start_time_s_ + static_cast<double>(i) / sample_rate_hz_;
    }

    /// Copy of the samples restricted to [first, first + count).
    TriAxialSeries slice(std::size_t first, std::size_t count) const {
        if (first + count > size() || count == 0)
            throw Error("TriAxialSeries::slice: range out of bounds");
        std::array<std::vector<double>, 3> out;
        for (std::size_t a = 0; a < 3; ++a)
            out[a].assign(axes_[a].begin() + static_cast<std::ptrdiff_t>(first),
                          axes_[a].begin() + static_cast<std::ptrdiff_t>(first + count));
        return TriAxialSeries(sample_rate_hz_, time_at(first), std::move(out));
    }

private:
    double sample_rate_hz_;
    double start_time_s_;
    std::array<std::vector<double>, 3> axes_;
};

/// One sensor's capture plus the operating-condition labels it was taken under.
struct SensorRecording {
    std::string sensor_id;
    TriAxialSeries series;
    double pressure_kgfcm2 = 0.0;
    double flow_lpm = 0.0;
    Scenario scenario = Scenario::NoLeak;
    Side side = Side::Left;

    void validate() const {
        if (!std::isfinite(pressure_kgfcm2) || pressure_kgfcm2 < 0)
            throw Error("SensorRecording: pressure must be finite and non-negative");
        if (!std::isfinite(flow_lpm) || flow_lpm < 0)
            throw Error("SensorRecording: flow must be finite and non-negative");
    }
};

/// Where the two sensors sit. spacing_L_m is the sensor-to-sensor distance.
/// per_side_m is set only for equidistant deployments (leak midway), in which
/// case spacing_L_m == 2 * per_side_m.
struct DeploymentGeometry {
    double spacing_L_m = 0.0;
    std::optional<double> per_side_m;
    std::optional<double> true_leak_from_left_m;

    void validate() const {
        if (!(spacing_L_m > 0) || !std::isfinite(spacing_L_m))
            throw InvalidGeometry("DeploymentGeometry: spacing must be positive");
        if (per_side_m) {
            if (!(*per_side_m > 0))
                throw InvalidGeometry("DeploymentGeometry: per-side distance must be positive");
            if (std::abs(spacing_L_m - 2.0 * *per_side_m) > 1e-9)
                throw InvalidGeometry("DeploymentGeometry: spacing != 2 * per-side distance");
        }
        if (true_leak_from_left_m &&
            (*true_leak_from_left_m < 0 || *true_leak_from_left_m > spacing_L_m))
            throw InvalidGeometry("DeploymentGeometry: leak position outside [0, spacing]");
    }
};

/// A time-aligned left/right recording pair ready for correlation.
///
/// residual_offset_s is the sub-sample start-time offset (right minus left)
/// left over after alignment trimmed whole samples. It is never resampled
/// away; it simply adds into every measured lag and is absorbed by the
/// no-leak calibration together with any clock skew.
struct RecordingPair {
    SensorRecording left;
    SensorRecording right;
    DeploymentGeometry geometry;
    double residual_offset_s = 0.0;
};

} // namespace leakloc
