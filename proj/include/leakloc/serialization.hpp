#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "leakloc/errors.hpp"
#include "leakloc/interference.hpp"
#include "leakloc/localizer.hpp"
#include "leakloc/types.hpp"

namespace leakloc {

inline nlohmann::json to_json(const InterferenceProfile& profile) {
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& b : profile.dominant_bins)
        bins.push_back({{"frequency_hz", b.frequency_hz}, {"magnitude", b.magnitude}});
    return nlohmann::json{{"source", interference_source_name(profile.source)},
                          {"pressure_kgfcm2", profile.pressure_kgfcm2},
                          {"estimation_window", profile.estimation_window},
                          {"bins", bins}};
}

inline InterferenceProfile profile_from_json(const nlohmann::json& j) {
    try {
        InterferenceProfile profile;
        const auto source = interference_source_from_name(j.at("source").get<std::string>());
        if (!source)
            throw SchemaError("profile: unknown interference source");
        profile.source = *source;
        profile.pressure_kgfcm2 = j.at("pressure_kgfcm2").get<double>();
        profile.estimation_window = j.at("estimation_window").get<std::size_t>();
        for (const auto& b : j.at("bins"))
            profile.dominant_bins.push_back(
                {b.at("frequency_hz").get<double>(), b.at("magnitude").get<double>()});
        return profile;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("profile: ") + e.what());
    }
}

inline void save_profile(const std::string& path, const InterferenceProfile& profile) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoFailure("cannot open " + path + " for writing");
    out << to_json(profile).dump(2) << '\n';
}

inline InterferenceProfile load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoFailure("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
    return profile_from_json(j);
}

/// One localization record with full provenance, as emitted in JSON reports.
inline nlohmann::json to_json(const LocalizationResult& r) {
    nlohmann::json j{{"axis", axis_name(r.axis)},
                     {"d_l_m", r.d_l_m},
                     {"spacing_L_m", r.spacing_L_m},
                     {"wave_speed_mps", r.wave_speed_mps},
                     {"delta_t_s", r.delta_t_s},
                     {"out_of_range", r.out_of_range},
                     {"measured_lag_s", r.measured_lag_s},
                     {"peak_value", r.peak_value},
                     {"t_noLeak_s", r.t_noLeak_s},
                     {"t_buffer_s", r.t_buffer_s}};
    j["error_percent"] = r.error_percent ? nlohmann::json(*r.error_percent) : nlohmann::json();
    j["classification"] =
        r.classification ? nlohmann::json(scenario_name(*r.classification)) : nlohmann::json();
    return j;
}

} // namespace leakloc
