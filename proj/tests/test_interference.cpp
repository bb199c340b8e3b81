#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "leakloc/interference.hpp"
#include "leakloc/serialization.hpp"
#include "leakloc/simulator.hpp"

using namespace leakloc;

namespace {

TriAxialSeries tone_series(double fs, std::size_t n, std::vector<std::pair<double, double>> tones,
                           double dc = 0.0) {
    std::array<std::vector<double>, 3> axes;
    for (auto& ax : axes) {
        ax.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double v = dc;
            for (const auto& [f, a] : tones)
                v += a * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs);
            ax[i] = v;
        }
    }
    return TriAxialSeries(fs, 0.0, std::move(axes));
}

// single-bin power via Goertzel, independent of the library's spectra
double bin_power(std::span<const double> s, double f, double fs, std::size_t skip = 0) {
    const double w = 2.0 * std::numbers::pi * f / fs;
    double s0 = 0, s1 = 0, s2 = 0;
    std::size_t count = 0;
    for (std::size_t i = skip; i < s.size(); ++i) {
        s0 = s[i] + 2.0 * std::cos(w) * s1 - s2;
        s2 = s1;
        s1 = s0;
        ++count;
    }
    const double re = s1 - s2 * std::cos(w);
    const double im = s2 * std::sin(w);
    return (re * re + im * im) / static_cast<double>(count * count);
}

double rms(std::span<const double> s) {
    double acc = 0;
    for (double v : s) acc += v * v;
    return std::sqrt(acc / static_cast<double>(s.size()));
}

} // namespace

TEST_CASE("a pure tone yields a single dominant bin") {
    const auto series = tone_series(200.0, 2048, {{50.0, 1.0}});
    const auto profile = estimate_profile(series, InterferenceSource::Motor, 1);
    REQUIRE(profile.dominant_bins.size() == 1);
    CHECK(profile.dominant_bins[0].frequency_hz == Catch::Approx(50.0).margin(0.01));
}

TEST_CASE("two tones rank by magnitude and sort by frequency") {
    // fs 256 puts 30 Hz and 60 Hz on exact bins of a 1024-point window
    const auto series = tone_series(256.0, 4096, {{30.0, 1.0}, {60.0, 0.1}});
    const auto profile = estimate_profile(series, InterferenceSource::Pump, 2);
    REQUIRE(profile.dominant_bins.size() == 2);
    CHECK(profile.dominant_bins[0].frequency_hz == Catch::Approx(30.0).margin(0.05));
    CHECK(profile.dominant_bins[1].frequency_hz == Catch::Approx(60.0).margin(0.05));
    CHECK(profile.dominant_bins[0].magnitude > profile.dominant_bins[1].magnitude);
}

TEST_CASE("a constant series produces no bins") {
    const auto series = tone_series(100.0, 2048, {}, 3.75);
    const auto profile = estimate_profile(series, InterferenceSource::Valve, 5);
    CHECK(profile.dominant_bins.empty());
}

TEST_CASE("estimation requires a full window") {
    const auto series = tone_series(100.0, 512, {{10.0, 1.0}});
    CHECK_THROWS_AS(estimate_profile(series, InterferenceSource::Motor, 3, 1024), TooShort);
}

TEST_CASE("filtering with an empty profile only removes the mean") {
    const auto series = tone_series(100.0, 512, {{10.0, 0.5}}, 2.0);
    InterferenceProfile empty;
    const auto out = filter_series(series, empty);
    REQUIRE(out.size() == series.size());
    CHECK(out.sample_rate_hz() == series.sample_rate_hz());
    CHECK(out.start_time_s() == series.start_time_s());
    double mean = 0;
    const auto in_x = series.axis(Axis::X);
    for (double v : in_x) mean += v;
    mean /= static_cast<double>(in_x.size());
    const auto out_x = out.axis(Axis::X);
    for (std::size_t i = 0; i < out_x.size(); ++i)
        CHECK(out_x[i] == Catch::Approx(in_x[i] - mean).margin(1e-15));
}

TEST_CASE("a notched tone loses at least 40 dB of bin power") {
    const double fs = 200.0;
    const std::size_t n = 8192;
    // tone plus reproducible broadband noise
    auto series_axes = [&] {
        std::array<std::vector<double>, 3> axes;
        std::mt19937 rng(1234);
        std::uniform_real_distribution<double> dist(-0.05, 0.05);
        for (auto& ax : axes) {
            ax.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                ax[i] = std::sin(2.0 * std::numbers::pi * 50.0 * static_cast<double>(i) / fs) +
                        dist(rng);
        }
        return axes;
    }();
    const TriAxialSeries series(fs, 0.0, std::move(series_axes));

    InterferenceProfile profile;
    profile.dominant_bins = {{50.0, 1.0}};
    const auto out = filter_series(series, profile);

    // measure past the filter transient
    const double before = bin_power(series.axis(Axis::X), 50.0, fs, 1024);
    const double after = bin_power(out.axis(Axis::X), 50.0, fs, 1024);
    CHECK(10.0 * std::log10(before / after) >= 40.0);
}

TEST_CASE("filtering a baseline with its own profile strips most of its energy") {
    ScenarioConfig cfg; // interference-only capture
    cfg.spacing_L_m = 1.0;
    cfg.duration_s = 40.96;
    cfg.sample_rate_hz = 100.0;
    cfg.snr_db = 40.0;
    cfg.rng_seed = 5;
    cfg.interference_tones = {{InterferenceSource::Motor, 24.7, 0.05},
                              {InterferenceSource::Pump, 33.1, 0.03},
                              {InterferenceSource::Valve, 11.3, 0.02}};
    const auto sim = simulate(cfg);

    const auto profile = estimate_profile(sim.pair.left.series, InterferenceSource::Combined, 5);
    REQUIRE(profile.dominant_bins.size() >= 3);
    const auto filtered = filter_series(sim.pair.left.series, profile);
    for (Axis a : kAllAxes)
        CHECK(rms(filtered.axis(a)) < 0.2 * rms(sim.pair.left.series.axis(a)));
}

TEST_CASE("filter is linear") {
    const double fs = 100.0;
    const std::size_t n = 2048;
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::array<std::vector<double>, 3> a1, a2, mix;
    const double ca = 2.5, cb = -0.75;
    for (std::size_t ax = 0; ax < 3; ++ax) {
        a1[ax].resize(n);
        a2[ax].resize(n);
        mix[ax].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            a1[ax][i] = dist(rng);
            a2[ax][i] = dist(rng);
            mix[ax][i] = ca * a1[ax][i] + cb * a2[ax][i];
        }
    }
    const TriAxialSeries s1(fs, 0.0, std::move(a1));
    const TriAxialSeries s2(fs, 0.0, std::move(a2));
    const TriAxialSeries sm(fs, 0.0, std::move(mix));

    InterferenceProfile profile;
    profile.dominant_bins = {{12.5, 1.0}, {30.0, 1.0}};
    const auto f1 = filter_series(s1, profile);
    const auto f2 = filter_series(s2, profile);
    const auto fm = filter_series(sm, profile);

    double scale = 0;
    for (double v : fm.axis(Axis::X)) scale = std::max(scale, std::abs(v));
    for (Axis a : kAllAxes) {
        const auto x1 = f1.axis(a);
        const auto x2 = f2.axis(a);
        const auto xm = fm.axis(a);
        for (std::size_t i = 0; i < n; ++i)
            REQUIRE(std::abs(xm[i] - (ca * x1[i] + cb * x2[i])) <= 1e-9 * scale);
    }
}

TEST_CASE("tones well away from every notch keep their amplitude") {
    const double fs = 200.0;
    // probe at 40 Hz, notch at 50 Hz: 5 bandwidths away
    const auto series = tone_series(fs, 8192, {{40.0, 1.0}});
    InterferenceProfile profile;
    profile.dominant_bins = {{50.0, 1.0}};
    const auto out = filter_series(series, profile);
    const double before = bin_power(series.axis(Axis::Y), 40.0, fs, 1024);
    const double after = bin_power(out.axis(Axis::Y), 40.0, fs, 1024);
    CHECK(std::abs(10.0 * std::log10(before / after)) < 1.0);
}

TEST_CASE("profile bins above Nyquist are rejected") {
    const auto series = tone_series(100.0, 256, {{10.0, 1.0}});
    InterferenceProfile profile;
    profile.dominant_bins = {{60.0, 1.0}};
    CHECK_THROWS_AS(filter_series(series, profile), NyquistViolation);
}

TEST_CASE("profile JSON round trip") {
    InterferenceProfile profile;
    profile.source = InterferenceSource::Pump;
    profile.pressure_kgfcm2 = 1.4;
    profile.estimation_window = 512;
    profile.dominant_bins = {{11.25, 0.5}, {33.0, 0.125}};
    const auto j = to_json(profile);
    const auto back = profile_from_json(j);
    CHECK(back.source == profile.source);
    CHECK(back.pressure_kgfcm2 == profile.pressure_kgfcm2);
    CHECK(back.estimation_window == profile.estimation_window);
    REQUIRE(back.dominant_bins.size() == 2);
    CHECK(back.dominant_bins[1].frequency_hz == 33.0);
    CHECK(back.dominant_bins[1].magnitude == 0.125);
}
