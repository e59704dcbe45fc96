#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "nfnoma/io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nfnoma;

namespace {

std::string cli_path() { return NFNOMA_CLI_PATH; }

int run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("nfnoma_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

const char* kTinyScenario =
    " --array 4x4 --groups 1 --nu-radius 4 --fu-radius 6 --codebook 5x5x8 --rmax 10 --t 10 --cbar 2";

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("missing required flags give a nonzero exit") {
    CHECK(run("allocate") != 0);
    CHECK(run("sweep") != 0);
    CHECK(run("") != 0);
    CHECK(run("frobnicate") != 0);
}

TEST_CASE("allocate reproduces the grid-search optimum") {
    const fs::path dir = fresh_dir("alloc");
    Rng rng(99);
    std::vector<GroupGains> gains(2);
    json gains_json = json::array();
    for (auto& g : gains) {
        g.g_n = rng.uniform(0.5, 4.0);
        g.g_f = rng.uniform(0.05, 0.5);
        g.qos_n = g.qos_f = 1.0;
        g.noise = 0.1;
        gains_json.push_back({{"g_n", g.g_n}, {"g_f", g.g_f}, {"noise", g.noise}});
    }
    const fs::path gains_file = dir / "gains.json";
    write_text_file(gains_file.string(), gains_json.dump());

    // p_max = 6 mW  ->  10 log10(6) dBm
    const double pmax_dbm = 10.0 * std::log10(6.0);
    std::ostringstream cmd;
    cmd << "allocate --gains " << gains_file << " --pmax-dbm " << pmax_dbm << " --rqos 1 --out " << (dir / "out");
    REQUIRE(run(cmd.str()) == 0);

    const json out = json::parse(read_text_file((dir / "out" / "allocation.json").string()));
    REQUIRE(out.at("feasible").get<bool>());
    const double sum_rate = out.at("sum_rate").get<double>();
    const double oracle = oracles::noma_rate_grid_search(gains, 6.0);
    CHECK(sum_rate == doctest::Approx(oracle).epsilon(1e-4));

    // Exactly one manifest next to the output.
    int manifests = 0;
    for (const auto& e : fs::directory_iterator(dir / "out"))
        if (e.path().filename() == "manifest.json") ++manifests;
    CHECK(manifests == 1);
}

TEST_CASE("sweep runs are byte-identical under a fixed seed") {
    const fs::path d1 = fresh_dir("sweep1"), d2 = fresh_dir("sweep2");
    const std::string base = std::string("sweep --variable pmax --grid 5:15:10 --trials 2 --seed 7") +
                             " --schemes steering,fdma" + kTinyScenario;
    REQUIRE(run(base + " --out-dir " + d1.string()) == 0);
    REQUIRE(run(base + " --out-dir " + d2.string()) == 0);

    const std::string csv1 = read_text_file((d1 / "sweep.csv").string());
    const std::string csv2 = read_text_file((d2 / "sweep.csv").string());
    CHECK(csv1 == csv2);
    CHECK(csv1.rfind("scheme,trial,seed,", 0) == 0);

    // Re-running from the emitted manifest reproduces the same bytes.
    const fs::path d3 = fresh_dir("sweep3");
    REQUIRE(run("sweep --config " + (d1 / "manifest.json").string() + " --out-dir " + d3.string()) == 0);
    CHECK(read_text_file((d3 / "sweep.csv").string()) == csv1);
}

TEST_CASE("design and pattern emit their artifacts") {
    const fs::path dir = fresh_dir("design");
    REQUIRE(run(std::string("design --scheme steering --seed 3 --out ") + (dir / "d").string() + kTinyScenario) ==
            0);
    const json bf = json::parse(read_text_file((dir / "d" / "beamformer.json").string()));
    CHECK(bf.at("m_t").get<int>() == 16);
    CHECK(bf.at("k").get<int>() == 1);
    CHECK(bf.contains("layout"));
    CHECK(bf.at("w").size() == 16);
    CHECK(bf.at("v").size() == 1);

    REQUIRE(run(std::string("pattern --scheme steering --slice azimuth-range --grid 8x8 --seed 3 --out ") +
                (dir / "p").string() + kTinyScenario) == 0);
    const std::string csv = read_text_file((dir / "p" / "pattern.csv").string());
    CHECK(csv.rfind("angle_deg,range_m,gain\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 64);
}

TEST_SUITE_END();
