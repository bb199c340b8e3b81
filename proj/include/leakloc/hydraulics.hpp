#pragma once

#include <cmath>
#include <numbers>

#include "leakloc/errors.hpp"

namespace leakloc {

struct PipeSpec {
    double inner_diameter_m = 0.0334;
};

struct FlowMeasurement {
    double flow_lpm = 0.0;
    double pressure_kgfcm2 = 0.0;
};

inline double pipe_area(const PipeSpec& spec) {
    if (!(spec.inner_diameter_m > 0) || !std::isfinite(spec.inner_diameter_m))
        throw InvalidGeometry("pipe_area: inner diameter must be positive");
    const double r = spec.inner_diameter_m / 2.0;
    return std::numbers::pi * r * r;
}

inline double flow_to_m3s(double flow_lpm) {
    if (flow_lpm < 0 || !std::isfinite(flow_lpm))
        throw Error("flow_to_m3s: flow must be finite and non-negative");
    return flow_lpm / 60.0 / 1000.0;
}

/// Bulk flow velocity Q/A in m/s. This is what the localization formula uses
/// as its propagation speed; it is not an acoustic wave speed.
inline double wave_speed(const FlowMeasurement& flow, const PipeSpec& spec) {
    return flow_to_m3s(flow.flow_lpm) / pipe_area(spec);
}

} // namespace leakloc
