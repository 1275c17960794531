#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sbmkit/cli.hpp"

using namespace sbmkit;
using nlohmann::json;

namespace {

std::string tmp(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

int run_quiet(const RunConfig& c, std::string* out = nullptr, std::string* err = nullptr) {
    std::ostringstream o, e;
    const int code = run(c, o, e);
    if (out) *out = o.str();
    if (err) *err = e.str();
    return code;
}

}  // namespace

TEST_CASE("every command has a schema with the shared keys") {
    CHECK(command_names().size() == 13);
    for (const auto& c : command_names()) {
        const auto& s = command_schema(c);
        for (const char* k : {"seed", "workers", "out", "plot", "tol_quad", "tol_mc_se", "family", "alpha", "beta"})
            CHECK(std::any_of(s.begin(), s.end(), [&](const Param& p) { return p.name == k; }));
    }
    CHECK_THROWS_AS(command_schema("verify everything"), ConfigError);
}

TEST_CASE("flags override the config file, which overrides defaults") {
    const json file = {{"alpha", 1.5}, {"seed", 3}, {"lambda", {2.0}}};
    const json flags = {{"alpha", 0.5}};
    const RunConfig c = resolve_config("phi", file, flags);
    CHECK(c.params["alpha"] == 0.5);
    CHECK(c.params["seed"] == 3);
    CHECK(c.params["family"] == "stable");
    CHECK(c.params["lambda"] == json::array({2.0}));
}

TEST_CASE("malformed configs name the offending key") {
    try {
        resolve_config("phi", {{"alhpa", 1.0}}, json::object());
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("alhpa") != std::string::npos);
    }
    try {
        resolve_config("verify bhp", {{"paths_per_point", "many"}}, json::object());
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("paths_per_point") != std::string::npos);
    }
    CHECK_THROWS_AS(RunConfig::from_json({{"command", "phi"}, {"params", {{"d", 3}}}}), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json({{"command", "chi"}}, "phi"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json(json::array()), ConfigError);
}

TEST_CASE("flag text parsing") {
    const auto& s = command_schema("martin");
    auto param = [&](const char* n) { return *std::find_if(s.begin(), s.end(), [&](const Param& p) { return p.name == n; }); };
    CHECK(parse_flag_value(param("z"), "1,0") == json::array({1.0, 0.0}));
    CHECK(parse_flag_value(param("x_grid"), "0.3,0,0;-0.4,0.1,0") ==
          json::array({json::array({0.3, 0.0, 0.0}), json::array({-0.4, 0.1, 0.0})}));
    CHECK(parse_flag_value(param("levels"), "6") == 6);
    CHECK(parse_flag_value(param("beta"), "none").is_null());
    CHECK_THROWS_AS(parse_flag_value(param("levels"), "6.5"), ConfigError);
    CHECK_THROWS_AS(parse_flag_value(param("r0"), "half"), ConfigError);
    CHECK_THROWS_AS(parse_flag_value(param("z"), "1,2,3,4"), ConfigError);
}

TEST_CASE("serialized configs re-run to identical reports") {
    RunConfig c = resolve_config("verify special-identity", {{"family", "mixture"}, {"beta", 0.5}, {"points", 12}},
                                 json::object());
    const RunConfig back = RunConfig::from_json(c.to_json());
    CHECK(back.params == c.params);
    const auto a = execute(c), b = execute(back);
    CHECK(a.document.dump() == b.document.dump());
    CHECK(a.document["config"]["command"] == "verify special-identity");
    CHECK(a.document["version"] == version());
}

TEST_CASE("special identity through the CLI layer") {
    const RunConfig c =
        resolve_config("verify special-identity", {{"family", "mixture"}, {"alpha", 1.0}, {"beta", 0.5}}, json::object());
    std::string out;
    CHECK(run_quiet(c, &out) == 0);
    const json doc = json::parse(out);
    CHECK(doc["pass"] == true);
    CHECK(doc["reports"][0]["checks"][0]["constant"].get<double>() < 1e-4);
}

TEST_CASE("stable asymptotics ratios are identically one") {
    const RunConfig c = resolve_config("verify asymptotics", {{"d", 3}}, json::object());
    const auto res = execute(c);
    CHECK(res.pass);
    REQUIRE(res.csv_header == std::vector<std::string>{"r", "value", "predicted", "ratio"});
    for (const auto& row : res.csv_rows) CHECK(std::stod(row[3]) == doctest::Approx(1.0).epsilon(1e-6));
    for (const auto& r : res.document["reports"][0]["series"]["green_ratio"])
        CHECK(r.get<double>() == doctest::Approx(1.0).epsilon(1e-6));
    REQUIRE(res.plots.size() == 1);
    CHECK(res.plots[0].reference == 1.0);
}

TEST_CASE("exit codes") {
    // usage: missing beta for the mixture family
    CHECK(run_quiet(resolve_config("phi", {{"family", "mixture"}}, json::object())) == 2);
    // usage: unknown command
    RunConfig bad;
    bad.command = "verify nothing";
    CHECK(run_quiet(bad) == 2);
    // numerical: too few paths reach the kernel support
    std::string err;
    const RunConfig starve = resolve_config(
        "martin", {{"paths", 200}, {"levels", 3}, {"growth_levels", 0}, {"dt", 2e-3}, {"workers", 1}}, json::object());
    CHECK(run_quiet(starve, nullptr, &err) == 3);
    CHECK(err.find("numerical failure") != std::string::npos);
    // verification failure: an impossible tolerance
    CHECK(run_quiet(resolve_config("verify special-identity", {{"tolerance", 0.0}, {"points", 8}}, json::object())) ==
          1);
    // plot requested from a command without one
    CHECK(run_quiet(resolve_config("verify conditions", {{"plot", tmp("never.svg")}}, json::object())) == 2);
}

TEST_CASE("SBMKIT_WORKERS must be a positive integer") {
    setenv("SBMKIT_WORKERS", "lots", 1);
    const int code = run_quiet(resolve_config("simulate", {{"paths", 10}, {"dt", 1e-2}}, json::object()));
    unsetenv("SBMKIT_WORKERS");
    CHECK(code == 2);
}

TEST_CASE("artifacts: report, CSV and plot files") {
    const std::string rep = tmp("sbmkit_cli_report.json"), csv = tmp("sbmkit_cli.csv"), svg = tmp("sbmkit_cli.svg");
    const RunConfig c = resolve_config(
        "chi", {{"lambda", {1.0, 4.0}}, {"report", rep}, {"out", csv}, {"plot", svg}}, json::object());
    std::string out;
    CHECK(run_quiet(c, &out) == 0);
    CHECK(out.empty());
    std::ifstream f(csv);
    std::string header;
    std::getline(f, header);
    CHECK(header == "lambda,chi,rho,product_over_lambda");
    const json doc = json::parse(std::ifstream(rep));
    CHECK(doc["table"]["rows"][1][1].get<double>() == doctest::Approx(2.0).epsilon(1e-6));
    // artifact paths stay out of the embedded config
    CHECK_FALSE(doc["config"]["params"].contains("report"));
    CHECK(std::filesystem::file_size(svg) > 100);
}

TEST_CASE("simulate CSV columns and closed-form check") {
    const RunConfig c = resolve_config(
        "simulate", {{"paths", 500}, {"dt", 1e-3}, {"d", 2}, {"seed", 42}, {"workers", 1}}, json::object());
    const auto res = execute(c);
    CHECK(res.csv_header == std::vector<std::string>{"path_id", "exit_time", "exit_x0", "exit_x1", "jumped"});
    CHECK(res.csv_rows.size() == 500);
    CHECK(res.document["reports"][0]["constants"].contains("exact"));
}

TEST_CASE("BHP report carries the documented top-level fields") {
    const RunConfig c = resolve_config("verify bhp",
                                       {{"family", "mixture"},
                                        {"beta", 0.5},
                                        {"domain", "ball"},
                                        {"paths_per_point", 300},
                                        {"radii", {0.25, 0.125}},
                                        {"workers", 1}},
                                       json::object());
    const auto res = execute(c);
    for (const char* k : {"theorem_tag", "domain", "family", "r_grid", "C_emp", "slope", "pass"})
        CHECK(res.document.contains(k));
    CHECK(res.document["theorem_tag"] == "boundary_harnack_principle");
    CHECK(res.document["family"] == "mixture");
}

TEST_CASE("single-worker runs are byte-identical") {
    const RunConfig c = resolve_config(
        "simulate", {{"paths", 300}, {"dt", 1e-3}, {"seed", 9}, {"workers", 1}}, json::object());
    const auto a = execute(c), b = execute(c);
    CHECK(a.document.dump(2) == b.document.dump(2));
    CHECK(to_csv(a) == to_csv(b));
}
