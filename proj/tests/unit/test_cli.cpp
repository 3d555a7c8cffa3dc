#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "breather/lab/config.hpp"
#include "breather/lab/experiments.hpp"
#include "breather/parallel.hpp"

using namespace breather::lab;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("breather_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

// Small but complete configurations that run in well under a second each.
const std::vector<std::string> kSmallConfigs{
    "[experiment]\nname = advect\nseed = 3\n[parameters]\nv = 0.6\nlevels = 51, 101, 201\norder_min = 1.5\n",
    "[experiment]\nname = residual\n[parameters]\nfamily = breather\nlevels = 9, 13, 17\nhalf_extent = 2\n"
    "time_extent = 1\norder_tolerance = 0.5\n",
    "[experiment]\nname = quantize-scan\nseed = 9\n[parameters]\nd = 50\nK = 40\nn_max = 1\nsubdivisions = 2\n"
    "samples = 3\npath_step = 0.2\nquantized_factor = 1e9\nmidpoint_factor = 0\n",
    "[experiment]\nname = torus\n[parameters]\nR = 200\nsamples = 2000\ntimes = 0, 100\n",
    "[experiment]\nname = two-wall\n[parameters]\nd = 50\nK = 40\nsamples = 5\npath_step = 0.2\n",
};

std::map<std::string, std::string> csv_outputs(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".csv") out[e.path().filename().string()] = read_file(e.path());
    }
    return out;
}

}  // namespace

TEST_CASE("experiment names") {
    for (const auto e : all_experiments()) CHECK(parse_experiment(to_string(e)) == e);
    CHECK(to_string(Experiment::boost_check) == "boost-check");
    CHECK_THROWS_AS(parse_experiment("boost_check"), ConfigError);
    CHECK(all_experiments().size() == 8);
}

TEST_CASE("config parse errors") {
    SUBCASE("empty experiment section") {
        const auto msg = error_of("[experiment]\n\n[parameters]\nv = 0.6\n");
        CHECK(msg.find("line 1") != std::string::npos);
        CHECK(msg.find("name") != std::string::npos);
        CHECK_FALSE(error_of("").empty());
    }
    SUBCASE("duplicate key names both lines") {
        const auto msg = error_of("[experiment]\nname = advect\n[parameters]\nv = 0.6\n# note\nv = 0.5\n");
        CHECK(msg.find("line 6") != std::string::npos);
        CHECK(msg.find("lines 4 and 6") != std::string::npos);
        CHECK(msg.find("'v'") != std::string::npos);
    }
    SUBCASE("unknown key") {
        const auto msg = error_of("[experiment]\nname = advect\n[parameters]\nv = 0.6\nveloctiy = 1\n");
        CHECK(msg.find("line 5") != std::string::npos);
        CHECK(msg.find("veloctiy") != std::string::npos);
    }
    SUBCASE("type mismatch") {
        const auto msg = error_of("[experiment]\nname = advect\n[parameters]\nv = fast\n");
        CHECK(msg.find("line 4") != std::string::npos);
        CHECK(msg.find("'v'") != std::string::npos);
        CHECK_FALSE(error_of("[experiment]\nname = advect\n[parameters]\nv = 0.6\nlevels = 51, x\n").empty());
        CHECK_FALSE(error_of("[experiment]\nname = evolve\n[parameters]\nperiods = 1\nwrite_field = maybe\n").empty());
    }
    SUBCASE("missing required key") {
        const auto msg = error_of("[experiment]\nname = advect\n[parameters]\nwidth = 2\n");
        CHECK(msg.find("'v'") != std::string::npos);
        CHECK(msg.find("line 3") != std::string::npos);
    }
    SUBCASE("choices, sections and seeds") {
        CHECK(error_of("[experiment]\nname = residual\n[parameters]\nfamily = sphere\n").find("line 4") !=
              std::string::npos);
        CHECK_FALSE(error_of("[experiment]\nname = advect\n[extras]\n").empty());
        CHECK_FALSE(error_of("[experiment]\nname = advect\nseed = -1\n[parameters]\nv = 0.6\n").empty());
        CHECK_FALSE(error_of("v = 0.6\n").empty());
        CHECK_FALSE(error_of("[experiment]\nname = warp\n").empty());
    }
}

TEST_CASE("defaults are filled in and listed") {
    const auto cfg = parse_config("; header\n[experiment]\nname = advect\nseed = 4\n[parameters]\n  # indented comment\nv = 0.5\n");
    CHECK(cfg.seed == 4);
    CHECK(cfg.real("v") == 0.5);
    CHECK(cfg.real("width") == 1.0);
    CHECK(cfg.integers("levels") == std::vector<std::int64_t>{101, 201, 401});
    std::vector<std::string> want;
    for (const auto& spec : schema(Experiment::advect)) {
        if (spec.key != "v") want.push_back(spec.key);
    }
    CHECK(cfg.defaulted == want);
    CHECK_THROWS_AS(cfg.integer("v"), ConfigError);
    CHECK_THROWS_AS(cfg.real("nope"), ConfigError);
}

TEST_CASE("default documents parse back to the schema defaults") {
    for (const auto e : all_experiments()) {
        const auto cfg = parse_config(default_config_text(e));
        CHECK(cfg.experiment == e);
        CHECK(cfg.defaulted.empty());
        for (const auto& spec : schema(e)) CHECK(format_value(cfg.parameters.at(spec.key)) == format_value(spec.fallback));
    }
    CHECK(format_value(0.3) == "0.3");
    CHECK(format_value(std::vector<std::int64_t>{1, 2}) == "1, 2");
}

TEST_CASE("manifest echoes config, defaults and every assertion") {
    const auto dir = scratch("manifest");
    const auto cfg = parse_config(kSmallConfigs[0]);
    const auto result = run_experiment(cfg, dir.string());
    CHECK(result.passed());
    const auto m = nlohmann::json::parse(read_file(dir / "manifest.json"));
    CHECK(m["experiment"] == "advect");
    CHECK(m["seed"] == 3);
    CHECK(m["code_version"] == code_version());
    CHECK(m["config"]["levels"] == nlohmann::json::array({51, 101, 201}));
    CHECK(m["defaults_applied"].size() == cfg.defaulted.size());
    CHECK(m["defaults_applied"][0] == "width");
    REQUIRE(m["assertions"].size() == result.assertions.size());
    for (std::size_t i = 0; i < result.assertions.size(); ++i) {
        CHECK(m["assertions"][i]["name"] == result.assertions[i].name);
        CHECK(m["assertions"][i]["passed"] == result.assertions[i].passed);
        CHECK(m["assertions"][i].contains("measured"));
    }
    CHECK(m["assertions"][0]["name"] == "order 51->101");
    CHECK(m["passed"] == true);
    for (const auto& f : m["outputs"]) CHECK(fs::exists(dir / f.get<std::string>()));
    fs::remove_all(dir);
}

TEST_CASE("failing assertions are reported, not hidden") {
    const auto dir = scratch("failing");
    auto cfg = parse_config(kSmallConfigs[0]);
    cfg.parameters["order_min"] = 2.5;
    const auto result = run_experiment(cfg, dir.string());
    CHECK_FALSE(result.passed());
    CHECK(result.failures().size() == 2);
    CHECK(nlohmann::json::parse(read_file(dir / "manifest.json"))["passed"] == false);
    fs::remove_all(dir);
}

TEST_CASE("CSV output is byte-identical across runs and worker counts") {
    for (const auto& text : kSmallConfigs) {
        const auto cfg = parse_config(text);
        CAPTURE(to_string(cfg.experiment));
        std::map<std::string, std::string> ref;
        for (const int workers : {1, 3, 1}) {
            breather::set_workers(workers);
            const auto dir = scratch("det");
            run_experiment(cfg, dir.string());
            const auto got = csv_outputs(dir);
            CHECK_FALSE(got.empty());
            if (ref.empty()) {
                ref = got;
            } else {
                CHECK(got == ref);
            }
            fs::remove_all(dir);
        }
    }
    breather::set_workers(0);
}

#ifdef BREATHER_LAB_EXE
TEST_CASE("command-line exit codes") {
    const std::string exe = BREATHER_LAB_EXE;
    const auto dir = scratch("exe");
    fs::create_directories(dir);
    auto run = [&](const std::string& args) {
        const int status = std::system((exe + " " + args + " > " + (dir / "log.txt").string() + " 2>&1").c_str());
        return WEXITSTATUS(status);
    };
    {
        std::ofstream(dir / "ok.ini") << kSmallConfigs[0];
        auto failing = kSmallConfigs[0];
        failing.replace(failing.find("order_min = 1.5"), 15, "order_min = 2.5");
        std::ofstream(dir / "fail.ini") << failing;
        std::ofstream(dir / "bad.ini") << "[experiment]\nname = advect\n[parameters]\nv = 0.6\nspeed = 1\n";
    }
    CHECK(run("advect --config " + (dir / "ok.ini").string() + " --out " + (dir / "out").string()) == 0);
    CHECK(run("advect --config " + (dir / "fail.ini").string() + " --out " + (dir / "out").string()) == 1);
    CHECK(run("advect --config " + (dir / "bad.ini").string()) == 2);
    CHECK(read_file(dir / "log.txt").find("speed") != std::string::npos);
    CHECK(run("torus --config " + (dir / "ok.ini").string()) == 2);
    CHECK(run("advect") == 2);
    CHECK(run("advect --workers 0 --config " + (dir / "ok.ini").string()) == 2);
    CHECK(run("--version") == 0);
    CHECK(run("advect --print-defaults") == 0);
    CHECK(read_file(dir / "log.txt") == default_config_text(Experiment::advect));
    fs::remove_all(dir);
}
#endif
