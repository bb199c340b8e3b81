// End-to-end tests against the built `leakloc` binary. The test runner passes
// its location in LEAKLOC_BIN.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "leakloc/hydraulics.hpp"
#include "leakloc/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

const std::string& binary() {
    static const std::string bin = [] {
        const char* env = std::getenv("LEAKLOC_BIN");
        return env ? std::string(env) : std::string();
    }();
    return bin;
}

fs::path work_dir() {
    static const fs::path dir = [] {
        const auto d = fs::temp_directory_path() / "leakloc_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run(const std::string& args) {
    REQUIRE(!binary().empty());
    const auto out_path = work_dir() / "stdout.txt";
    const auto err_path = work_dir() / "stderr.txt";
    const std::string cmd =
        binary() + " " + args + " >" + out_path.string() + " 2>" + err_path.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(status);
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << text;
}

} // namespace

TEST_CASE("speed prints four significant digits and full-precision JSON") {
    auto r = run("speed --flow 14.6 --diameter 0.0334");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("0.2777") != std::string::npos);

    r = run("speed --flow 0 --diameter 0.0334");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("0") != std::string::npos);

    r = run("speed --flow 18.5 --diameter 0.0334 --json");
    CHECK(r.exit_code == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("wave_speed_mps").get<double>() == Catch::Approx(0.3519149).epsilon(1e-6));
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run("speed").exit_code == 1);                  // missing required option
    CHECK(run("speed --flow -3").exit_code == 1);        // validator rejects
    CHECK(run("nonsense").exit_code == 1);               // unknown subcommand
    CHECK(run("reproduce --table 3").exit_code == 1);    // unknown table id
    CHECK(run("--help").exit_code == 0);
}

TEST_CASE("missing input files split between I/O and schema exit codes") {
    // unreadable manifest file: I/O
    CHECK(run("localize --manifest " + (work_dir() / "nope.json").string()).exit_code == 2);

    // manifest that references a missing CSV: schema
    const auto manifest = work_dir() / "missing_pair.json";
    write_file(manifest, R"({"pairs":[{"left":"no_left.csv","right":"no_right.csv",
        "spacing_L_m":1.0,"pressure_kgfcm2":0.6,"flow_lpm":22.8,"scenario":"Leak"}]})");
    CHECK(run("localize --manifest " + manifest.string()).exit_code == 1);
}

TEST_CASE("xcorr of a file against itself peaks at zero with value one") {
    leakloc::ScenarioConfig cfg;
    cfg.spacing_L_m = 1.0;
    cfg.leak_from_left_m = 0.3;
    cfg.duration_s = 5.12;
    cfg.rng_seed = 42;
    const auto sim = leakloc::simulate(cfg);
    const auto csv = work_dir() / "self.csv";
    leakloc::write_recording_file(csv.string(), sim.pair.left.series);

    const auto out_dir = work_dir() / "xcorr_out";
    const auto r = run("xcorr " + csv.string() + " " + csv.string() +
                       " --axis y --json --output " + out_dir.string());
    REQUIRE(r.exit_code == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("peak_lag_s").get<double>() == 0.0);
    CHECK(j.at("peak_value").get<double>() == Catch::Approx(1.0).margin(1e-9));
    CHECK(j.at("classification") == "NoLeak");
    CHECK(fs::exists(out_dir / "xcorr_y.csv"));
    CHECK(slurp(out_dir / "xcorr_y.csv").rfind("lag_s,value\n", 0) == 0);
}

TEST_CASE("xcorr flags an off-center leak") {
    leakloc::ScenarioConfig cfg;
    cfg.spacing_L_m = 1.0;
    cfg.leak_from_left_m = 0.125;
    cfg.wave_speed_mps = 0.437;
    cfg.duration_s = 10.24;
    cfg.rng_seed = 55;
    const auto sim = leakloc::simulate(cfg);
    const auto left_csv = work_dir() / "leak_left.csv";
    const auto right_csv = work_dir() / "leak_right.csv";
    leakloc::write_recording_file(left_csv.string(), sim.pair.left.series);
    leakloc::write_recording_file(right_csv.string(), sim.pair.right.series);

    const auto r =
        run("xcorr " + left_csv.string() + " " + right_csv.string() + " --axis x --json");
    REQUIRE(r.exit_code == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("classification") == "Leak");
    CHECK(j.at("peak_lag_s").get<double>() ==
          Catch::Approx(sim.ground_truth_dt_s).margin(0.01));
}

TEST_CASE("simulate is deterministic and validates its config") {
    const auto cfg_path = work_dir() / "scenario.conf";
    write_file(cfg_path,
               "spacing_L_m = 1.0\n"
               "leak_from_left_m = 0.75\n"
               "flow_lpm = 18.5\n"
               "pressure_kgfcm2 = 1.0\n"
               "duration_s = 2.56\n"
               "rng_seed = 42\n");

    const auto dir_a = work_dir() / "fix_a";
    const auto dir_b = work_dir() / "fix_b";
    REQUIRE(run("simulate --config " + cfg_path.string() + " --output " + dir_a.string())
                .exit_code == 0);
    REQUIRE(run("simulate --config " + cfg_path.string() + " --output " + dir_b.string())
                .exit_code == 0);
    for (const char* name : {"left.csv", "right.csv", "manifest.json"}) {
        CHECK(slurp(dir_a / name) == slurp(dir_b / name));
        CHECK(!slurp(dir_a / name).empty());
    }

    // leak beyond the spacing is rejected up front
    const auto bad_path = work_dir() / "bad.conf";
    write_file(bad_path, "spacing_L_m = 1.0\nleak_from_left_m = 1.5\n");
    CHECK(run("simulate --config " + bad_path.string() + " --output " +
              (work_dir() / "bad_out").string())
              .exit_code == 1);
}

TEST_CASE("grid simulation covers the pressure/distance grid twice over") {
    const auto cfg_path = work_dir() / "grid.json";
    write_file(cfg_path, R"({
        "grid": true,
        "pressures": [0.6, 1.0, 1.4],
        "flows": [22.8, 18.5, 14.6],
        "per_side_m": [0.5, 1.0, 1.5, 2.0],
        "duration_s": 2.56,
        "rng_seed": 7,
        "interference_tones": [[21.3, 0.05], [33.7, 0.04], [12.1, 0.03]]
    })");
    const auto out_dir = work_dir() / "grid_out";
    REQUIRE(run("simulate --config " + cfg_path.string() + " --output " + out_dir.string())
                .exit_code == 0);

    std::size_t fixtures = 0, leak = 0, noleak = 0;
    for (const auto& e : fs::directory_iterator(out_dir)) {
        if (!e.is_directory()) continue;
        ++fixtures;
        const auto name = e.path().filename().string();
        if (name.find("_noleak") != std::string::npos)
            ++noleak;
        else if (name.find("_leak") != std::string::npos)
            ++leak;
    }
    CHECK(fixtures == 24);
    CHECK(leak == 12);
    CHECK(noleak == 12);
    CHECK(fs::exists(out_dir / "run-manifest.json"));
}

TEST_CASE("calibrate and localize work over fixture manifests") {
    // one no-leak fixture with a known skew, one leak fixture sharing it
    leakloc::ScenarioConfig base;
    base.spacing_L_m = 2.0;
    base.wave_speed_mps = leakloc::wave_speed({18.5, 1.0}, {0.0334});
    base.pressure_kgfcm2 = 1.0;
    base.flow_lpm = 18.5;
    base.duration_s = 40.96;
    base.clock_skew_s = -0.14;
    base.rng_seed = 91;
    base.interference_tones = {{leakloc::InterferenceSource::Motor, 21.3, 0.05},
                               {leakloc::InterferenceSource::Pump, 33.7, 0.04},
                               {leakloc::InterferenceSource::Valve, 12.1, 0.03}};

    const auto fx_dir = work_dir() / "pipeline";
    leakloc::write_fixture(leakloc::simulate(base), fx_dir / "noleak");

    auto leak = base;
    leak.rng_seed = 92;
    leak.leak_from_left_m = 1.5; // a quarter span from the right sensor
    leakloc::write_fixture(leakloc::simulate(leak), fx_dir / "leak");

    const auto manifest = fx_dir / "run.json";
    write_file(manifest, R"({"pipe_diameter_m": 0.0334,
        "pairs": [{"fixture": "noleak"}, {"fixture": "leak"}]})");

    const auto cal_dir = work_dir() / "cal_out";
    auto r = run("calibrate --manifest " + manifest.string() + " --no-fit-buffer --output " +
                 cal_dir.string() + " --json");
    REQUIRE(r.exit_code == 0);
    const auto cal = json::parse(r.out);
    REQUIRE(cal.at("calibration").size() == 3);
    for (const auto& e : cal.at("calibration"))
        CHECK(e.at("t_noLeak_s").get<double>() == Catch::Approx(-0.14).margin(0.01));

    r = run("localize --manifest " + manifest.string() + " --calibration " +
            (cal_dir / "calibration.json").string() + " --json");
    REQUIRE(r.exit_code == 0);
    const auto results = json::parse(r.out);
    REQUIRE(results.size() == 6); // two pairs, three axes
    for (const auto& rec : results) {
        if (rec.at("scenario_label") == "Leak") {
            CHECK(rec.at("classification") == "Leak");
            // within one sample period of lag plus slack
            CHECK(rec.at("d_l_m").get<double>() == Catch::Approx(0.5).margin(0.02));
        } else {
            CHECK(rec.at("classification") == "NoLeak");
        }
    }
}

TEST_CASE("a degenerate pair is reported without failing the run") {
    // constant signals cannot be normalized; the pair errors, the run keeps going
    std::string flat = "t,ax,ay,az\n";
    for (int i = 0; i < 200; ++i)
        flat += std::to_string(i / 100.0) + ",1,1,1\n";
    write_file(work_dir() / "flat_l.csv", flat);
    write_file(work_dir() / "flat_r.csv", flat);

    leakloc::ScenarioConfig good;
    good.spacing_L_m = 1.0;
    good.duration_s = 5.12;
    good.rng_seed = 77;
    good.interference_tones = {{leakloc::InterferenceSource::Motor, 21.3, 0.05},
                               {leakloc::InterferenceSource::Pump, 33.7, 0.04}};
    const auto sim = leakloc::simulate(good);
    leakloc::write_recording_file((work_dir() / "good_l.csv").string(), sim.pair.left.series);
    leakloc::write_recording_file((work_dir() / "good_r.csv").string(), sim.pair.right.series);

    const auto manifest = work_dir() / "mixed.json";
    write_file(manifest, R"({"pairs":[
        {"left":"flat_l.csv","right":"flat_r.csv","spacing_L_m":1.0,
         "pressure_kgfcm2":0.6,"flow_lpm":22.8,"scenario":"NoLeak"},
        {"left":"good_l.csv","right":"good_r.csv","spacing_L_m":1.0,
         "pressure_kgfcm2":0.6,"flow_lpm":22.8,"scenario":"NoLeak"}]})");

    const auto r = run("localize --manifest " + manifest.string() + " --json");
    CHECK(r.exit_code == 0);
    const auto j = json::parse(r.out);
    REQUIRE(j.size() == 4); // one error record plus three good axes
    CHECK(j.at(0).contains("error"));
    CHECK(j.at(1).at("classification") == "NoLeak");
}

TEST_CASE("reproduce renders pass/deviation tables") {
    auto r = run("reproduce --table 5");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("DOCUMENTED-DEVIATION") == std::string::npos);
    CHECK(r.out.find("0 documented deviations") != std::string::npos);

    r = run("reproduce --table 4 --json");
    REQUIRE(r.exit_code == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("consistent_cells_pass").get<bool>());
    CHECK(j.at("deviations").get<std::size_t>() > 0);

    r = run("reproduce --table 1");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("DOCUMENTED-DEVIATION") != std::string::npos);
}
