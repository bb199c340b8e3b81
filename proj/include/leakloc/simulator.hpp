#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "leakloc/align.hpp"
#include "leakloc/csv.hpp"
#include "leakloc/errors.hpp"
#include "leakloc/interference.hpp"
#include "leakloc/types.hpp"

namespace leakloc {

struct Tone {
    InterferenceSource source = InterferenceSource::Motor;
    double frequency_hz = 0.0;
    double amplitude_g = 0.0;
};

/// Everything a synthetic two-sensor scenario needs. leak_from_left_m absent
/// means a no-leak capture. clock_skew_s shifts the left-hand sensor's
/// content the way two capture sessions started at different moments would.
struct ScenarioConfig {
    double spacing_L_m = 1.0;
    std::optional<double> leak_from_left_m;
    double wave_speed_mps = 0.352;
    double sample_rate_hz = 100.0;
    double duration_s = 40.96;
    double clock_skew_s = 0.0;
    std::vector<Tone> interference_tones;
    std::pair<double, double> leak_bandwidth_hz{5.0, 25.0};
    double snr_db = 20.0;
    std::uint64_t rng_seed = 1;
    double leak_amplitude_g = 0.01;
    double attenuation_per_m = 0.0; // optional exponential amplitude decay

    // condition labels carried into fixtures
    double pressure_kgfcm2 = 0.0;
    double flow_lpm = 0.0;
    double pipe_diameter_m = 0.0334;
};

/// A generated pair plus its ground truth. ground_truth_dt_s is the leak's
/// kinematic arrival-time difference (left minus right), zero for no-leak
/// scenarios; clock skew is tracked separately in the config.
struct SimulationResult {
    RecordingPair pair;
    double ground_truth_dt_s = 0.0;
    ScenarioConfig config;
};

namespace detail {

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller keeps the stream identical across standard libraries
class GaussianDraw {
public:
    explicit GaussianDraw(std::mt19937_64& rng) : rng_(rng) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01(rng_);
        while (u1 <= 0.0) u1 = uniform01(rng_);
        const double u2 = uniform01(rng_);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64& rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Band-limited noise modelled as a dense random multisine. Being a closed
/// form over continuous time, it can be sampled at fractionally delayed
/// instants exactly, which is how sub-sample propagation delays are realized.
class MultisineSource {
public:
    MultisineSource(double band_lo_hz, double band_hi_hz, double rms, std::size_t components,
                    std::mt19937_64& rng)
        : amplitude_(components > 0 ? rms * std::sqrt(2.0 / static_cast<double>(components))
                                    : 0.0) {
        freqs_.reserve(components);
        phases_.reserve(components);
        for (std::size_t i = 0; i < components; ++i)
            freqs_.push_back(band_lo_hz + (band_hi_hz - band_lo_hz) * uniform01(rng));
        for (std::size_t i = 0; i < components; ++i)
            phases_.push_back(2.0 * std::numbers::pi * uniform01(rng));
    }

    double operator()(double t) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < freqs_.size(); ++i)
            acc += std::cos(2.0 * std::numbers::pi * freqs_[i] * t + phases_[i]);
        return amplitude_ * acc;
    }

private:
    double amplitude_;
    std::vector<double> freqs_;
    std::vector<double> phases_;
};

inline double rms(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc / static_cast<double>(v.size()));
}

} // namespace detail

inline constexpr std::size_t kLeakSourceComponents = 96;

inline void validate_config(const ScenarioConfig& c) {
    if (!(c.spacing_L_m > 0) || !std::isfinite(c.spacing_L_m))
        throw InvalidConfig("simulate: spacing must be positive");
    if (c.leak_from_left_m &&
        (*c.leak_from_left_m < 0 || *c.leak_from_left_m > c.spacing_L_m))
        throw InvalidConfig("simulate: leak position outside [0, spacing]");
    if (!(c.wave_speed_mps > 0) || !std::isfinite(c.wave_speed_mps))
        throw InvalidConfig("simulate: wave speed must be positive");
    if (!(c.sample_rate_hz > 0) || !std::isfinite(c.sample_rate_hz))
        throw InvalidConfig("simulate: sample rate must be positive");
    if (!(c.duration_s > 0) || c.duration_s * c.sample_rate_hz < 64)
        throw InvalidConfig("simulate: need at least 64 samples");
    if (!(c.leak_bandwidth_hz.first > 0) ||
        !(c.leak_bandwidth_hz.second > c.leak_bandwidth_hz.first) ||
        c.leak_bandwidth_hz.second > c.sample_rate_hz / 2.0)
        throw InvalidConfig("simulate: leak bandwidth must satisfy 0 < low < high <= Nyquist");
    for (const auto& tone : c.interference_tones)
        if (!(tone.frequency_hz > 0) || tone.frequency_hz >= c.sample_rate_hz / 2.0 ||
            tone.amplitude_g < 0)
            throw InvalidConfig("simulate: tone outside (0, Nyquist) or negative amplitude");
    if (!std::isfinite(c.clock_skew_s) || !std::isfinite(c.snr_db))
        throw InvalidConfig("simulate: non-finite skew or SNR");
    if (c.leak_amplitude_g < 0 || !std::isfinite(c.leak_amplitude_g))
        throw InvalidConfig("simulate: leak amplitude must be non-negative");
    if (c.attenuation_per_m < 0 || !std::isfinite(c.attenuation_per_m))
        throw InvalidConfig("simulate: attenuation must be non-negative");
}

/// Generate one two-sensor scenario. The right sensor picks the leak up
/// after d_right/c, the left after d_left/c, interference tones arrive at
/// both sensors with zero relative delay, and the configured clock skew
/// shifts everything the left sensor records. Identical configs produce
/// identical sample streams.
inline SimulationResult simulate(const ScenarioConfig& config) {
    validate_config(config);

    const double fs = config.sample_rate_hz;
    const auto n = static_cast<std::size_t>(std::llround(config.duration_s * fs));
    const bool leak = config.leak_from_left_m.has_value();
    const double d_left = leak ? *config.leak_from_left_m : 0.0;
    const double d_right = leak ? config.spacing_L_m - d_left : 0.0;
    const double c = config.wave_speed_mps;

    std::mt19937_64 rng(config.rng_seed);
    const detail::MultisineSource source(config.leak_bandwidth_hz.first,
                                         config.leak_bandwidth_hz.second,
                                         config.leak_amplitude_g, kLeakSourceComponents, rng);
    std::vector<double> tone_phases(config.interference_tones.size());
    for (auto& p : tone_phases) p = 2.0 * std::numbers::pi * detail::uniform01(rng);
    std::array<double, 3> axis_gain{};
    for (auto& g : axis_gain) g = 0.5 + detail::uniform01(rng);

    const auto tones_at = [&](double t) {
        double acc = 0.0;
        for (std::size_t j = 0; j < config.interference_tones.size(); ++j) {
            const auto& tone = config.interference_tones[j];
            acc += tone.amplitude_g *
                   std::sin(2.0 * std::numbers::pi * tone.frequency_hz * t + tone_phases[j]);
        }
        return acc;
    };

    // tones and the delayed source are identical across axes; only the
    // per-axis coupling gain differs
    const auto render = [&](double leak_delay_s, double skew_s, double distance_m) {
        const double atten = std::exp(-config.attenuation_per_m * distance_m);
        std::vector<double> common(n), leak_sig(leak ? n : 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / fs;
            common[i] = tones_at(t - skew_s);
            if (leak) leak_sig[i] = atten * source(t - skew_s - leak_delay_s);
        }
        std::array<std::vector<double>, 3> axes;
        for (std::size_t a = 0; a < 3; ++a) {
            auto& buf = axes[a];
            buf.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                buf[i] = common[i] + (leak ? axis_gain[a] * leak_sig[i] : 0.0);
        }
        return axes;
    };

    auto right_axes = render(d_right / c, 0.0, d_right);
    auto left_axes = render(d_left / c, config.clock_skew_s, d_left);

    // additive sensor noise, level set per axis from that axis's content;
    // silent axes fall back to a 1 mg reference so the stream is never empty
    detail::GaussianDraw gauss(rng);
    const double noise_gain = std::pow(10.0, -config.snr_db / 20.0);
    const auto add_noise = [&](std::array<std::vector<double>, 3>& axes) {
        for (auto& buf : axes) {
            const double ref = detail::rms(buf);
            const double sigma = (ref > 0 ? ref : 1e-3) * noise_gain;
            for (double& v : buf) v += sigma * gauss();
        }
    };
    add_noise(right_axes);
    add_noise(left_axes);

    const Scenario scenario = leak ? Scenario::Leak : Scenario::NoLeak;
    SensorRecording right{"sensor1-right", TriAxialSeries(fs, 0.0, std::move(right_axes)),
                          config.pressure_kgfcm2, config.flow_lpm, scenario, Side::Right};
    SensorRecording left{"sensor2-left", TriAxialSeries(fs, 0.0, std::move(left_axes)),
                         config.pressure_kgfcm2, config.flow_lpm, scenario, Side::Left};

    DeploymentGeometry geometry;
    geometry.spacing_L_m = config.spacing_L_m;
    if (leak) {
        geometry.true_leak_from_left_m = d_left;
        if (std::abs(d_left - config.spacing_L_m / 2.0) < 1e-12)
            geometry.per_side_m = config.spacing_L_m / 2.0;
    }

    SimulationResult result{align_pair(left, right, geometry),
                            leak ? (2.0 * d_left - config.spacing_L_m) / c : 0.0, config};
    return result;
}

// ---------------------------------------------------------------------------
// fixture files

inline nlohmann::json fixture_manifest_json(const SimulationResult& sim) {
    const auto& cfg = sim.config;
    const auto& geo = sim.pair.geometry;
    nlohmann::json j;
    j["scenario"] = scenario_name(sim.pair.left.scenario);
    j["spacing_L_m"] = cfg.spacing_L_m;
    j["per_side_m"] = geo.per_side_m ? nlohmann::json(*geo.per_side_m) : nlohmann::json();
    j["leak_from_left_m"] =
        cfg.leak_from_left_m ? nlohmann::json(*cfg.leak_from_left_m) : nlohmann::json();
    j["pressure_kgfcm2"] = cfg.pressure_kgfcm2;
    j["flow_lpm"] = cfg.flow_lpm;
    j["pipe_diameter_m"] = cfg.pipe_diameter_m;
    j["clock_skew_s"] = cfg.clock_skew_s;
    j["rng_seed"] = cfg.rng_seed;
    j["sample_rate_hz"] = cfg.sample_rate_hz; // the rate is an assumption, so state it
    j["files"] = {"left.csv", "right.csv"};
    j["ground_truth_dt_s"] = sim.ground_truth_dt_s;
    return j;
}

/// Write left.csv, right.csv, and manifest.json into a directory. Output is
/// byte-identical for identical configs.
inline void write_fixture(const SimulationResult& sim, const std::filesystem::path& directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec)
        throw IoFailure("write_fixture: cannot create " + directory.string());
    write_recording_file((directory / "left.csv").string(), sim.pair.left.series);
    write_recording_file((directory / "right.csv").string(), sim.pair.right.series);
    std::ofstream out(directory / "manifest.json", std::ios::binary);
    if (!out)
        throw IoFailure("write_fixture: cannot open manifest for writing");
    out << fixture_manifest_json(sim).dump(2) << '\n';
    if (!out)
        throw IoFailure("write_fixture: manifest write failed");
}

struct LoadedFixture {
    RecordingPair pair;
    double ground_truth_dt_s = 0.0;
    double clock_skew_s = 0.0;
    double pipe_diameter_m = 0.0334;
    std::uint64_t rng_seed = 0;
};

/// Read a fixture directory back into an aligned pair with its labels.
inline LoadedFixture read_fixture(const std::filesystem::path& directory) {
    const auto manifest_path = directory / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in)
        throw IoFailure("read_fixture: cannot open " + manifest_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(manifest_path.string() + ": " + e.what());
    }

    try {
        const auto scenario = scenario_from_name(j.at("scenario").get<std::string>());
        if (!scenario)
            throw SchemaError("unknown scenario label");
        const auto files = j.at("files");
        if (!files.is_array() || files.size() != 2)
            throw SchemaError("manifest must list exactly two sensor files");

        RecordingMetadata meta;
        meta.pressure_kgfcm2 = j.at("pressure_kgfcm2").get<double>();
        meta.flow_lpm = j.at("flow_lpm").get<double>();
        meta.scenario = *scenario;

        meta.sensor_id = "sensor2-left";
        meta.side = Side::Left;
        auto left = parse_recording_file((directory / files.at(0).get<std::string>()).string(),
                                         meta);
        meta.sensor_id = "sensor1-right";
        meta.side = Side::Right;
        auto right = parse_recording_file((directory / files.at(1).get<std::string>()).string(),
                                          meta);

        DeploymentGeometry geometry;
        geometry.spacing_L_m = j.at("spacing_L_m").get<double>();
        if (!j.at("per_side_m").is_null())
            geometry.per_side_m = j.at("per_side_m").get<double>();
        if (!j.at("leak_from_left_m").is_null())
            geometry.true_leak_from_left_m = j.at("leak_from_left_m").get<double>();

        LoadedFixture fx{align_pair(left, right, geometry),
                         j.at("ground_truth_dt_s").get<double>(),
                         j.at("clock_skew_s").get<double>(),
                         j.at("pipe_diameter_m").get<double>(),
                         j.at("rng_seed").get<std::uint64_t>()};
        return fx;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(manifest_path.string() + ": " + e.what());
    }
}

} // namespace leakloc
