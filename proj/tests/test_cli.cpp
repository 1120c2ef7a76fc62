#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "critflow/acceptance.hpp"
#include "critflow/config.hpp"
#include "critflow/pipeline.hpp"

using namespace critflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ProblemConfig tiny_annulus_config(const fs::path& dir, const std::string& tag) {
    ProblemConfig cfg;
    cfg.domain = annulus_domain(0.05, 1.0);
    cfg.coefficient = CoefficientField::smooth_x2();
    cfg.mesh.h = 0.08;
    cfg.name = tag;
    cfg.outputs.solution_csv = (dir / (tag + "_solution.csv")).string();
    cfg.outputs.gradient_csv = (dir / (tag + "_gradient.csv")).string();
    cfg.outputs.levels_svg = (dir / (tag + "_levels.svg")).string();
    cfg.outputs.report_json = (dir / (tag + "_report.json")).string();
    return cfg;
}

}  // namespace

TEST_CASE("bundled configs parse and validate") {
    int count = 0;
    for (const auto& entry : fs::directory_iterator(CRITFLOW_CONFIG_DIR)) {
        if (entry.path().extension() != ".json") continue;
        const ProblemConfig cfg = load_config(entry.path().string());
        CHECK(cfg.mesh.h > 0.0);
        CHECK(!cfg.outputs.report_json.empty());
        ++count;
    }
    CHECK(count == 11);
}

TEST_CASE("config errors carry json pointer paths") {
    CHECK_THROWS_WITH_AS(parse_config(Json::parse(R"({"coefficient":{"kind":"radius_sq"},"mesh":{"h":0.1}})")),
                         doctest::Contains("/domain"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(Json::parse(
            R"({"domain":{"outer":{"kind":"disc","center":[0,0],"radius":1}},"coefficient":{"kind":"nope"},"mesh":{"h":0.1}})")),
        doctest::Contains("/coefficient/kind"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(Json::parse(
            R"({"domain":{"outer":{"kind":"disc","center":[0,0],"radius":1}},"coefficient":{"kind":"radius_sq"},"mesh":{}})")),
        doctest::Contains("/mesh/h"), ConfigError);
}

TEST_CASE("run produces artifacts, a schema-valid report, and exit 0") {
    const fs::path dir = fs::temp_directory_path() / "critflow_cli_test";
    fs::create_directories(dir);
    const ProblemConfig cfg = tiny_annulus_config(dir, "tiny");
    const RunResult res = run(cfg);
    CHECK(res.exit_code == 0);
    for (const std::string& p : {cfg.outputs.solution_csv, cfg.outputs.gradient_csv,
                                 cfg.outputs.levels_svg, cfg.outputs.report_json})
        CHECK(fs::exists(p));

    const Json report = Json::parse(slurp(cfg.outputs.report_json));
    CHECK(report.at("M") == 1);
    CHECK(report.at("expected") == 0);
    CHECK(report.at("total_index") == 0);
    CHECK(report.at("hopf").at("exterior") == true);

    const Json schema = Json::parse(slurp(fs::path(CRITFLOW_SCHEMA_DIR) / "report.schema.json"));
    std::string why;
    CHECK_MESSAGE(validate_against_schema(report, schema, &why), why);
    fs::remove_all(dir);
}

TEST_CASE("two runs of the same config produce bit-identical artifacts") {
    const fs::path dir = fs::temp_directory_path() / "critflow_cli_det";
    fs::create_directories(dir);
    std::string blobs[2];
    for (int i = 0; i < 2; ++i) {
        const ProblemConfig cfg = tiny_annulus_config(dir, "det" + std::to_string(i));
        const RunResult res = run(cfg);
        REQUIRE(res.exit_code == 0);
        Json report = Json::parse(slurp(cfg.outputs.report_json));
        report.erase("name");  // the tag is the only intended difference
        blobs[i] = slurp(cfg.outputs.solution_csv) + slurp(cfg.outputs.gradient_csv) +
                   slurp(cfg.outputs.levels_svg) + report.dump();
    }
    CHECK(blobs[0] == blobs[1]);
    fs::remove_all(dir);
}

TEST_CASE("M = 0 disc is reported as not applicable, not a failure") {
    ProblemConfig cfg;
    cfg.domain.outer = {{0, 0}, 1.0, std::nullopt};
    cfg.domain.validate();
    cfg.coefficient = CoefficientField::constant(1.0);
    cfg.mesh.h = 0.2;
    const RunResult res = run(cfg);
    CHECK(res.exit_code == 0);
    CHECK(res.report.at("not_applicable") == true);
    CHECK(res.report.at("expected") == -1);
}

TEST_CASE("hard domain errors exit with status 1") {
    ProblemConfig cfg;
    cfg.domain.outer = {{0, 0}, 1.0, std::nullopt};
    cfg.domain.holes = {{{0.9, 0.0}, 0.3}};  // pokes outside: invalid
    cfg.coefficient = CoefficientField::constant(1.0);
    cfg.mesh.h = 0.1;
    const RunResult res = run(cfg);
    CHECK(res.exit_code == 1);
    REQUIRE(!res.messages.empty());
    CHECK(res.messages.front().find("error") != std::string::npos);
}

TEST_CASE("oracle runner emits pass entries in report shape") {
    for (const std::string name : {"radial", "conformal"}) {
        const Json j = run_oracle(name);
        REQUIRE(j.contains("oracles"));
        for (const auto& entry : j.at("oracles")) {
            CHECK(entry.at("pass") == true);
            CHECK(entry.at("name") == name);
        }
    }
    CHECK_THROWS_AS(run_oracle("nope"), ConfigError);
}

TEST_CASE("cli binary end-to-end") {
    const fs::path dir = fs::temp_directory_path() / "critflow_cli_exec";
    fs::create_directories(dir);
    const fs::path cfg_path = dir / "cfg.json";
    {
        std::ofstream out(cfg_path);
        out << R"({
  "name": "cli_e2e",
  "domain": { "outer": { "kind": "disc", "center": [0,0], "radius": 1.0 },
              "holes": [ { "center": [0,0], "radius": 0.05 } ] },
  "coefficient": { "kind": "smooth_x2" },
  "mesh": { "h": 0.1 },
  "outputs": { "report_json": ")" << (dir / "report.json").string() << R"(" }
})";
    }
    const std::string bin = CRITFLOW_BIN;
    CHECK(std::system((bin + " run " + cfg_path.string() + " > /dev/null").c_str()) == 0);
    CHECK(fs::exists(dir / "report.json"));
    CHECK(std::system((bin + " mesh " + cfg_path.string() + " -o " + (dir / "m.txt").string() +
                       " > /dev/null").c_str()) == 0);
    CHECK(fs::exists(dir / "m.txt"));
    CHECK(std::system((bin + " oracle halfplane > /dev/null").c_str()) == 0);
    fs::remove_all(dir);
}
