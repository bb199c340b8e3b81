#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "leakloc/simulator.hpp"
#include "leakloc/xcorr.hpp"

using namespace leakloc;
namespace fs = std::filesystem;

namespace {

double measured_lag(const RecordingPair& pair, Axis a) {
    const auto corr = cross_correlate(pair.right.series.axis(a), pair.left.series.axis(a),
                                      pair.left.series.sample_rate_hz(), true, a);
    return find_peak(corr).peak_lag_s;
}

double band_power(std::span<const double> s, double lo, double hi, double fs) {
    double acc = 0.0;
    for (double f = lo; f <= hi; f += (hi - lo) / 16.0) {
        const double w = 2.0 * std::numbers::pi * f / fs;
        double s1 = 0, s2 = 0;
        for (double v : s) {
            const double s0 = v + 2.0 * std::cos(w) * s1 - s2;
            s2 = s1;
            s1 = s0;
        }
        const double re = s1 - s2 * std::cos(w);
        const double im = s2 * std::sin(w);
        acc += re * re + im * im;
    }
    return acc;
}

fs::path temp_dir(const char* name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("identical configs generate identical streams") {
    ScenarioConfig cfg;
    cfg.spacing_L_m = 2.0;
    cfg.leak_from_left_m = 0.8;
    cfg.duration_s = 5.12;
    cfg.rng_seed = 42;
    cfg.interference_tones = {{InterferenceSource::Motor, 17.0, 0.02}};
    const auto a = simulate(cfg);
    const auto b = simulate(cfg);
    for (Axis ax : kAllAxes) {
        const auto sa = a.pair.left.series.axis(ax);
        const auto sb = b.pair.left.series.axis(ax);
        REQUIRE(sa.size() == sb.size());
        for (std::size_t i = 0; i < sa.size(); ++i) REQUIRE(sa[i] == sb[i]);
    }
    const auto c = simulate([&] {
        auto other = cfg;
        other.rng_seed = 43;
        return other;
    }());
    CHECK(c.pair.left.series.axis(Axis::X)[0] != a.pair.left.series.axis(Axis::X)[0]);
}

TEST_CASE("a centered leak has zero ground-truth delay") {
    ScenarioConfig cfg;
    cfg.spacing_L_m = 3.0;
    cfg.leak_from_left_m = 1.5;
    cfg.duration_s = 20.48;
    cfg.rng_seed = 9;
    const auto sim = simulate(cfg);
    CHECK(sim.ground_truth_dt_s == 0.0);
    CHECK(sim.pair.geometry.per_side_m.has_value());
    for (Axis a : kAllAxes)
        CHECK(std::abs(measured_lag(sim.pair, a)) <= 1.0 / cfg.sample_rate_hz);
}

TEST_CASE("an off-center leak is recovered at its injected delay") {
    ScenarioConfig cfg;
    cfg.spacing_L_m = 4.0;
    cfg.leak_from_left_m = 1.0;
    cfg.wave_speed_mps = 0.437;
    cfg.duration_s = 40.96;
    cfg.rng_seed = 10;
    const auto sim = simulate(cfg);
    CHECK(sim.ground_truth_dt_s == Catch::Approx((2.0 - 4.0) / 0.437).epsilon(1e-12));
    for (Axis a : kAllAxes)
        CHECK(measured_lag(sim.pair, a) ==
              Catch::Approx(sim.ground_truth_dt_s).margin(1.0 / cfg.sample_rate_hz));
}

TEST_CASE("clock skew shows up as the no-leak peak lag") {
    ScenarioConfig cfg;
    cfg.spacing_L_m = 1.0;
    cfg.duration_s = 20.48;
    cfg.clock_skew_s = -0.14;
    cfg.rng_seed = 11;
    cfg.interference_tones = {{InterferenceSource::Motor, 21.3, 0.05},
                              {InterferenceSource::Pump, 33.7, 0.04},
                              {InterferenceSource::Valve, 12.1, 0.03}};
    const auto sim = simulate(cfg);
    CHECK(sim.ground_truth_dt_s == 0.0);
    for (Axis a : kAllAxes)
        CHECK(measured_lag(sim.pair, a) == Catch::Approx(-0.14).margin(1.0 / cfg.sample_rate_hz));
}

TEST_CASE("interference alone correlates at zero lag") {
    ScenarioConfig cfg;
    cfg.spacing_L_m = 2.0;
    cfg.duration_s = 20.48;
    cfg.rng_seed = 12;
    cfg.snr_db = 30.0;
    cfg.interference_tones = {{InterferenceSource::Motor, 24.7, 0.05},
                              {InterferenceSource::Pump, 9.13, 0.05}};
    const auto sim = simulate(cfg);
    for (Axis a : kAllAxes) CHECK(measured_lag(sim.pair, a) == 0.0);
}

TEST_CASE("delay fidelity across seeded trials") {
    // 100 seeds, random off-center leaks, 20 dB SNR: at least 95 recoveries
    // within one sample period
    int hits = 0;
    const double fs = 100.0;
    for (int trial = 0; trial < 100; ++trial) {
        ScenarioConfig cfg;
        cfg.spacing_L_m = 2.0;
        cfg.sample_rate_hz = fs;
        cfg.duration_s = 40.96;
        cfg.snr_db = 20.0;
        cfg.leak_bandwidth_hz = {5.0, fs / 4.0};
        cfg.wave_speed_mps = 0.352;
        cfg.rng_seed = 40000 + static_cast<std::uint64_t>(trial);
        // position sweeps the span; keeps |dt| within a quarter of the window
        cfg.leak_from_left_m = 0.1 + 1.8 * (static_cast<double>(trial) / 99.0);
        const auto sim = simulate(cfg);
        const double lag = measured_lag(sim.pair, Axis::Y);
        if (std::abs(lag - sim.ground_truth_dt_s) <= 1.0 / fs) ++hits;
    }
    CHECK(hits >= 95);
}

TEST_CASE("doubling the leak amplitude quadruples leak-band power") {
    ScenarioConfig cfg;
    cfg.spacing_L_m = 2.0;
    cfg.leak_from_left_m = 0.5;
    cfg.duration_s = 20.48;
    cfg.rng_seed = 13;
    cfg.snr_db = 60.0;
    cfg.leak_amplitude_g = 0.01;
    const auto base = simulate(cfg);
    cfg.leak_amplitude_g = 0.02;
    const auto loud = simulate(cfg);

    for (const auto* side : {"left", "right"}) {
        const auto& sb = std::string(side) == "left" ? base.pair.left : base.pair.right;
        const auto& sl = std::string(side) == "left" ? loud.pair.left : loud.pair.right;
        const double pb = band_power(sb.series.axis(Axis::X), 5.0, 25.0, 100.0);
        const double pl = band_power(sl.series.axis(Axis::X), 5.0, 25.0, 100.0);
        CHECK(pl / pb == Catch::Approx(4.0).epsilon(0.05));
    }
}

TEST_CASE("config validation") {
    ScenarioConfig cfg;
    cfg.spacing_L_m = 1.0;

    auto bad = cfg;
    bad.leak_from_left_m = 1.5;
    CHECK_THROWS_AS(simulate(bad), InvalidConfig);

    bad = cfg;
    bad.duration_s = 0.1;
    CHECK_THROWS_AS(simulate(bad), InvalidConfig);

    bad = cfg;
    bad.interference_tones = {{InterferenceSource::Motor, 60.0, 0.1}}; // above Nyquist at 100 Hz
    CHECK_THROWS_AS(simulate(bad), InvalidConfig);

    bad = cfg;
    bad.leak_bandwidth_hz = {30.0, 10.0};
    CHECK_THROWS_AS(simulate(bad), InvalidConfig);

    bad = cfg;
    bad.wave_speed_mps = 0.0;
    CHECK_THROWS_AS(simulate(bad), InvalidConfig);
}

TEST_CASE("fixtures are written deterministically") {
    ScenarioConfig cfg;
    cfg.spacing_L_m = 1.0;
    cfg.leak_from_left_m = 0.25;
    cfg.duration_s = 2.56;
    cfg.rng_seed = 42;
    cfg.pressure_kgfcm2 = 0.6;
    cfg.flow_lpm = 22.8;
    const auto sim = simulate(cfg);

    const auto dir_a = temp_dir("leakloc_fix_a");
    const auto dir_b = temp_dir("leakloc_fix_b");
    write_fixture(sim, dir_a);
    write_fixture(sim, dir_b);

    for (const char* name : {"left.csv", "right.csv", "manifest.json"}) {
        std::ifstream fa(dir_a / name), fb(dir_b / name);
        std::stringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        REQUIRE(!sa.str().empty());
        CHECK(sa.str() == sb.str());
    }

    SECTION("manifest lists exactly two sensor files") {
        const auto j = fixture_manifest_json(sim);
        REQUIRE(j.at("files").size() == 2);
        CHECK(j.at("files").at(0) == "left.csv");
        CHECK(j.at("files").at(1) == "right.csv");
        CHECK(j.at("scenario") == "Leak");
        CHECK(j.at("ground_truth_dt_s").get<double>() ==
              Catch::Approx(sim.ground_truth_dt_s));
    }

    SECTION("fixtures read back into an aligned pair with ground truth") {
        const auto fx = read_fixture(dir_a);
        CHECK(fx.ground_truth_dt_s == sim.ground_truth_dt_s);
        CHECK(fx.pair.geometry.spacing_L_m == cfg.spacing_L_m);
        REQUIRE(fx.pair.geometry.true_leak_from_left_m.has_value());
        CHECK(*fx.pair.geometry.true_leak_from_left_m == 0.25);
        CHECK(fx.pair.left.series.size() == sim.pair.left.series.size());
        const auto orig = sim.pair.left.series.axis(Axis::Z);
        const auto got = fx.pair.left.series.axis(Axis::Z);
        for (std::size_t i = 0; i < orig.size(); ++i) REQUIRE(got[i] == orig[i]);
    }

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}
