#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "adiabatica/runner.hpp"

using namespace adiabatica;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kFlowConfig = R"({
  "experiment": "flow",
  "model": "avoided_crossing",
  "epsilon": 0.1,
  "mode": "corrected_truncated",
  "z0": [1.0, 0.0],
  "t": 0.5,
  "output": "%s"
})";

} // namespace

TEST_CASE("unknown config keys are rejected") {
    CHECK_THROWS_AS(parse_config_json(R"({"experiment": "flow", "model": "avoided_crossing",
        "epsilon": 0.1, "z0": [1, 0], "t": 1.0, "bogus": 3})"),
                    ConfigError);
}

TEST_CASE("unknown model names list the registry") {
    try {
        parse_config_json(R"({"experiment": "flow", "model": "no_such_model",
            "epsilon": 0.1, "z0": [1, 0], "t": 1.0})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("avoided_crossing") != std::string::npos);
        CHECK(msg.find("rice_mele") != std::string::npos);
    }
}

TEST_CASE("sweep experiments demand explicit epsilon and grid") {
    CHECK_THROWS_AS(parse_config_json(R"({"experiment": "egorov",
        "model": "avoided_crossing", "t": 1.0,
        "observable": {"name": "gaussian"}})"),
                    ConfigError);
}

TEST_CASE("model parameters must be numeric") {
    CHECK_THROWS_AS(parse_config_json(R"({"experiment": "flow",
        "model": {"name": "avoided_crossing", "params": {"theta": "big"}},
        "epsilon": 0.1, "z0": [1, 0], "t": 1.0})"),
                    ConfigError);
}

TEST_CASE("flow run writes results and a manifest that round-trips as a config") {
    const auto dir = std::filesystem::temp_directory_path() / "adiabatica_runner_test";
    std::filesystem::remove_all(dir);
    char buf[512];
    std::snprintf(buf, sizeof buf, kFlowConfig, dir.string().c_str());
    const RunConfig cfg = parse_config_json(buf);
    REQUIRE(run(cfg) == 0);

    const std::string csv1 = slurp((dir / "results.csv").string());
    CHECK(csv1.rfind("time,q,p,h,density\n", 0) == 0);
    CHECK(std::count(csv1.begin(), csv1.end(), '\n') > 2);

    // manifest parses as a config again and reproduces byte-identical results
    const RunConfig cfg2 = parse_config_file((dir / "manifest.json").string());
    REQUIRE(run(cfg2) == 0);
    CHECK(slurp((dir / "results.csv").string()) == csv1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("describe covers every experiment with its defining expression") {
    for (const auto& name : experiment_names()) CHECK(!describe_experiment(name).empty());
    CHECK(describe_experiment("egorov").find("O(eps^2)") != std::string::npos);
    CHECK(describe_experiment("pump").find("Omega_pt") != std::string::npos);
    CHECK(describe_experiment("moyal").find("Op({a, b})") != std::string::npos);
}
