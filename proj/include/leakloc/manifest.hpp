#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "leakloc/align.hpp"
#include "leakloc/csv.hpp"
#include "leakloc/errors.hpp"
#include "leakloc/hydraulics.hpp"
#include "leakloc/simulator.hpp"
#include "leakloc/types.hpp"

namespace leakloc {

/// Options shared by the reporting commands. All of them have CLI overrides.
struct RunOptions {
    double threshold_s = 0.5;
    std::optional<double> t_buffer_s; // overrides fitted/loaded buffers when set
    double epsilon = 0.029;
    std::size_t top_k = kDefaultTopK;
    double notch_bandwidth_hz = kDefaultNotchBandwidthHz;
};

/// One left/right file pair with its geometry and condition labels, either
/// written out explicitly or pointing at a fixture directory.
struct PairEntry {
    std::string left_path;
    std::string right_path;
    DeploymentGeometry geometry;
    double pressure_kgfcm2 = 0.0;
    double flow_lpm = 0.0;
    Scenario scenario = Scenario::NoLeak;
};

struct RunManifest {
    double pipe_diameter_m = 0.0334;
    std::optional<std::string> calibration_path;
    RunOptions options;
    std::vector<PairEntry> pairs;
};

namespace detail {

inline nlohmann::json parse_json_stream(std::istream& in, const std::string& origin) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(origin + ": " + e.what());
    }
    return j;
}

// key=value lines become a flat JSON object so one schema layer serves both
// formats; values become numbers when they parse as numbers, `a,b,c` lists
// become arrays
inline nlohmann::json keyvalue_to_json(std::istream& in) {
    nlohmann::json j = nlohmann::json::object();
    std::string line;
    while (std::getline(in, line)) {
        const std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        const auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw SchemaError("config line without `=`: " + std::string(sv));
        const std::string key{trim(sv.substr(0, eq))};
        const std::string_view value = trim(sv.substr(eq + 1));

        const auto scalar = [](std::string_view v) -> nlohmann::json {
            double num = 0.0;
            if (parse_double(v, num)) return num;
            if (v == "true") return true;
            if (v == "false") return false;
            return std::string(v);
        };
        if (value.find(',') != std::string_view::npos) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& item : split(value, ','))
                if (!trim(item).empty()) arr.push_back(scalar(trim(item)));
            j[key] = arr;
        } else {
            j[key] = scalar(value);
        }
    }
    return j;
}

} // namespace detail

/// Load a config file that may be JSON or line-oriented key=value.
inline nlohmann::json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoFailure("cannot open " + path);
    // sniff: a JSON document starts with `{`
    char first = 0;
    in >> std::ws;
    first = static_cast<char>(in.peek());
    if (first == '{') return detail::parse_json_stream(in, path);
    return detail::keyvalue_to_json(in);
}

inline RunOptions run_options_from_json(const nlohmann::json& j) {
    RunOptions o;
    if (j.contains("threshold_s")) o.threshold_s = j.at("threshold_s").get<double>();
    if (j.contains("t_buffer_s") && !j.at("t_buffer_s").is_null())
        o.t_buffer_s = j.at("t_buffer_s").get<double>();
    if (j.contains("epsilon")) o.epsilon = j.at("epsilon").get<double>();
    if (j.contains("top_k")) o.top_k = j.at("top_k").get<std::size_t>();
    if (j.contains("notch_bandwidth_hz"))
        o.notch_bandwidth_hz = j.at("notch_bandwidth_hz").get<double>();
    return o;
}

/// Parse a run manifest. Pair entries are either explicit
/// {left,right,spacing_L_m,...} objects or {"fixture": "<dir>"} references to
/// simulator output; fixture paths resolve relative to the manifest.
inline RunManifest load_run_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoFailure("cannot open " + path);
    const nlohmann::json j = detail::parse_json_stream(in, path);
    const auto base = std::filesystem::path(path).parent_path();

    RunManifest m;
    try {
        if (j.contains("pipe_diameter_m"))
            m.pipe_diameter_m = j.at("pipe_diameter_m").get<double>();
        if (j.contains("calibration") && !j.at("calibration").is_null())
            m.calibration_path = (base / j.at("calibration").get<std::string>()).string();
        if (j.contains("options")) m.options = run_options_from_json(j.at("options"));

        for (const auto& e : j.at("pairs")) {
            if (e.contains("fixture")) {
                const auto dir = base / e.at("fixture").get<std::string>();
                const auto manifest_path = dir / "manifest.json";
                std::ifstream fin(manifest_path);
                if (!fin)
                    throw IoFailure("cannot open " + manifest_path.string());
                const nlohmann::json f = detail::parse_json_stream(fin, manifest_path.string());
                PairEntry entry;
                entry.left_path = (dir / f.at("files").at(0).get<std::string>()).string();
                entry.right_path = (dir / f.at("files").at(1).get<std::string>()).string();
                entry.geometry.spacing_L_m = f.at("spacing_L_m").get<double>();
                if (!f.at("per_side_m").is_null())
                    entry.geometry.per_side_m = f.at("per_side_m").get<double>();
                if (!f.at("leak_from_left_m").is_null())
                    entry.geometry.true_leak_from_left_m =
                        f.at("leak_from_left_m").get<double>();
                entry.pressure_kgfcm2 = f.at("pressure_kgfcm2").get<double>();
                entry.flow_lpm = f.at("flow_lpm").get<double>();
                const auto sc = scenario_from_name(f.at("scenario").get<std::string>());
                if (!sc)
                    throw SchemaError(manifest_path.string() + ": unknown scenario label");
                entry.scenario = *sc;
                m.pairs.push_back(std::move(entry));
                continue;
            }
            PairEntry entry;
            entry.left_path = (base / e.at("left").get<std::string>()).string();
            entry.right_path = (base / e.at("right").get<std::string>()).string();
            entry.geometry.spacing_L_m = e.at("spacing_L_m").get<double>();
            if (e.contains("per_side_m") && !e.at("per_side_m").is_null())
                entry.geometry.per_side_m = e.at("per_side_m").get<double>();
            if (e.contains("true_leak_from_left_m") &&
                !e.at("true_leak_from_left_m").is_null())
                entry.geometry.true_leak_from_left_m =
                    e.at("true_leak_from_left_m").get<double>();
            entry.pressure_kgfcm2 = e.at("pressure_kgfcm2").get<double>();
            entry.flow_lpm = e.at("flow_lpm").get<double>();
            const auto sc = scenario_from_name(e.at("scenario").get<std::string>());
            if (!sc)
                throw SchemaError(path + ": unknown scenario label");
            entry.scenario = *sc;
            m.pairs.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }

    if (m.pairs.empty())
        throw SchemaError(path + ": manifest lists no pairs");
    return m;
}

/// Check every referenced file up front so a bad manifest fails as a schema
/// error before any work starts.
inline void validate_manifest_files(const RunManifest& m) {
    for (const auto& p : m.pairs) {
        if (!std::filesystem::exists(p.left_path))
            throw SchemaError("manifest references missing file " + p.left_path);
        if (!std::filesystem::exists(p.right_path))
            throw SchemaError("manifest references missing file " + p.right_path);
        p.geometry.validate();
    }
    if (m.calibration_path && !std::filesystem::exists(*m.calibration_path))
        throw SchemaError("manifest references missing calibration file " +
                          *m.calibration_path);
}

/// Parse both CSVs of an entry and align them.
inline RecordingPair load_pair(const PairEntry& entry) {
    RecordingMetadata meta;
    meta.pressure_kgfcm2 = entry.pressure_kgfcm2;
    meta.flow_lpm = entry.flow_lpm;
    meta.scenario = entry.scenario;

    meta.sensor_id = "left";
    meta.side = Side::Left;
    auto left = parse_recording_file(entry.left_path, meta);
    meta.sensor_id = "right";
    meta.side = Side::Right;
    auto right = parse_recording_file(entry.right_path, meta);
    return align_pair(left, right, entry.geometry);
}

// ---------------------------------------------------------------------------
// simulator scenario configs

inline Tone tone_from_json(const nlohmann::json& t) {
    Tone tone;
    if (t.is_array()) {
        if (t.size() < 2)
            throw SchemaError("tone entries need [frequency_hz, amplitude_g]");
        tone.frequency_hz = t.at(0).get<double>();
        tone.amplitude_g = t.at(1).get<double>();
        return tone;
    }
    if (t.contains("source")) {
        const auto s = interference_source_from_name(t.at("source").get<std::string>());
        if (!s)
            throw SchemaError("tone with unknown source");
        tone.source = *s;
    }
    tone.frequency_hz = t.at("frequency_hz").get<double>();
    tone.amplitude_g = t.at("amplitude_g").get<double>();
    return tone;
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    ScenarioConfig c;
    try {
        if (j.contains("spacing_L_m")) c.spacing_L_m = j.at("spacing_L_m").get<double>();
        if (j.contains("leak_from_left_m") && !j.at("leak_from_left_m").is_null())
            c.leak_from_left_m = j.at("leak_from_left_m").get<double>();
        if (j.contains("sample_rate_hz")) c.sample_rate_hz = j.at("sample_rate_hz").get<double>();
        if (j.contains("duration_s")) c.duration_s = j.at("duration_s").get<double>();
        if (j.contains("clock_skew_s")) c.clock_skew_s = j.at("clock_skew_s").get<double>();
        if (j.contains("snr_db")) c.snr_db = j.at("snr_db").get<double>();
        if (j.contains("rng_seed")) c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        if (j.contains("leak_amplitude_g"))
            c.leak_amplitude_g = j.at("leak_amplitude_g").get<double>();
        if (j.contains("attenuation_per_m"))
            c.attenuation_per_m = j.at("attenuation_per_m").get<double>();
        if (j.contains("pressure_kgfcm2"))
            c.pressure_kgfcm2 = j.at("pressure_kgfcm2").get<double>();
        if (j.contains("flow_lpm")) c.flow_lpm = j.at("flow_lpm").get<double>();
        if (j.contains("pipe_diameter_m"))
            c.pipe_diameter_m = j.at("pipe_diameter_m").get<double>();
        if (j.contains("leak_bandwidth_hz")) {
            const auto& b = j.at("leak_bandwidth_hz");
            c.leak_bandwidth_hz = {b.at(0).get<double>(), b.at(1).get<double>()};
        }
        if (j.contains("interference_tones"))
            for (const auto& t : j.at("interference_tones"))
                c.interference_tones.push_back(tone_from_json(t));

        if (j.contains("wave_speed_mps")) {
            c.wave_speed_mps = j.at("wave_speed_mps").get<double>();
        } else if (j.contains("flow_lpm")) {
            c.wave_speed_mps = wave_speed({c.flow_lpm, c.pressure_kgfcm2},
                                          {c.pipe_diameter_m});
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("scenario config: ") + e.what());
    }
    return c;
}

} // namespace leakloc
