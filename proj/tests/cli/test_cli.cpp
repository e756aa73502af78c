#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "config.hpp"
#include "fnlab/error.hpp"
#include "fnlab/parallel.hpp"
#include "run.hpp"

using namespace fnlab;
using namespace fnlab::cli;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "config_version": 1,
  "command": "solve",
  "problem": {
    "domain": {"kind": "disk", "radius": 1},
    "spacing": 0.0625,
    "operator": {"name": "monge_ampere"},
    "psi": 1,
    "phi": 0.5,
    "exact": {"kind": "radial_power", "coefficient": 0.5, "power": 2}
  }
})";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fnlab_cli_tests") / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::ordered_json read_json(const fs::path& p) { return nlohmann::ordered_json::parse(slurp(p)); }

std::string error_message(const std::string& text, ErrorCode expected) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == expected);
    return e.what();
  }
  FAIL("config was accepted");
  return "";
}

std::string with(const std::string& base, const std::string& from, const std::string& to) {
  std::string s = base;
  const auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  s.replace(at, from.size(), to);
  return s;
}

int run_quiet(const RunConfig& c, const fs::path& dir) {
  std::ostringstream log;
  return run(c, dir.string(), log);
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("minimal Monge-Ampere disk config is valid") {
  const RunConfig c = parse_config(kMinimal);
  CHECK(c.command == "solve");
  CHECK(c.problem.domain->kind() == DomainKind::Disk);
  CHECK(c.problem.operator_dimension == 2);
  CHECK(c.problem.chart == ChartKind::Cartesian);
  CHECK(!c.problem.subsolution.has_value());
  CHECK(c.solver.tolerance == 1e-8);
  CHECK(c.solver.max_iterations == 60);
  CHECK(c.seed == 1);
}

TEST_CASE("misspelled operator names the field and lists the zoo") {
  const std::string msg = error_message(with(kMinimal, "monge_ampere", "monge_amper"), ErrorCode::ValidationError);
  CHECK(msg.find("problem.operator.name") != std::string::npos);
  for (const auto& name : operator_zoo_names()) CHECK(msg.find(name) != std::string::npos);
}

TEST_CASE("increasing schedule is rejected") {
  const std::string text = with(kMinimal, "\"command\": \"solve\"",
                                "\"command\": \"continuation\", \"schedule\": {\"epsilons\": [0.1, 0.2]}");
  const std::string msg = error_message(text, ErrorCode::ValidationError);
  CHECK(msg.find("schedule must decrease") != std::string::npos);
}

TEST_CASE("all validation problems are reported together") {
  std::string text = with(kMinimal, "\"spacing\": 0.0625", "\"spacing\": -1, \"colour\": 2");
  text = with(text, "\"psi\": 1", "\"psi\": {\"kind\": \"cubic\"}");
  const std::string msg = error_message(text, ErrorCode::ValidationError);
  CHECK(msg.find("problem.spacing") != std::string::npos);
  CHECK(msg.find("problem.colour: unknown key") != std::string::npos);
  CHECK(msg.find("problem.psi.kind") != std::string::npos);
}

TEST_CASE("syntax errors carry line and column") {
  const std::string msg = error_message("{\n  \"config_version\": 1,\n  \"command\": ,\n}", ErrorCode::ParseError);
  CHECK(msg.find("line 3, column 14") != std::string::npos);
}

TEST_CASE("config version and command are checked") {
  CHECK(error_message(with(kMinimal, "\"config_version\": 1", "\"config_version\": 2"), ErrorCode::ValidationError)
            .find("config_version") != std::string::npos);
  CHECK(error_message(with(kMinimal, "\"solve\"", "\"solv\""), ErrorCode::ValidationError).find("poisson-h") !=
        std::string::npos);
}

TEST_CASE("polar chart needs a planar disk or annulus") {
  std::string text = with(kMinimal, "{\"kind\": \"disk\", \"radius\": 1}",
                          R"({"kind": "box", "lower": [0, 0], "upper": [1, 1], "periodic": [true, false]})");
  text = with(text, "\"spacing\"", "\"chart\": \"polar\", \"spacing\"");
  CHECK(error_message(text, ErrorCode::ValidationError).find("problem.chart") != std::string::npos);
}

TEST_CASE("resolved config round-trips") {
  std::string text = with(kMinimal, "\"command\": \"solve\"",
                          "\"command\": \"continuation\", \"schedule\": {\"initial\": \"auto\", \"levels\": 3}");
  const RunConfig c = parse_config(text);
  const auto resolved = resolved_config(c);
  const RunConfig again = parse_config(resolved.dump());
  CHECK(resolved_config(again).dump() == resolved.dump());
  CHECK(resolved["schedule"]["initial"] == "auto");
}

TEST_CASE("csv fields load at parse time") {
  const fs::path dir = scratch("csv");
  const fs::path csv = dir / "phi.csv";
  {
    std::ofstream out(csv);
    out << "x,y,value\n0,0,1.5\n0.5,-0.25,2\n";
  }
  const Expression e = read_csv_expression(csv.string());
  CHECK(e.kind() == "csv");
  CHECK(e(Vec{{0.5, -0.25}}) == 2.0);
  CHECK_THROWS_AS(e(Vec{{0.1, 0.0}}), Error);

  const std::string text = with(kMinimal, "\"phi\": 0.5", "\"phi\": {\"kind\": \"csv\", \"path\": \"" +
                                                              (dir / "missing.csv").string() + "\"}");
  CHECK(error_message(text, ErrorCode::IoError).find("missing.csv") != std::string::npos);
}

TEST_CASE("solve on the Monge-Ampere disk reports max_error") {
  const fs::path dir = scratch("solve");
  const RunConfig c = parse_config(kMinimal);
  CHECK(run_quiet(c, dir) == kExitOk);
  const auto report = read_json(dir / "report.json");
  CHECK(report["status"] == "ok");
  const double err = report["max_error"].get<double>();
  // Second-order scheme with linear ghost closure: error below h^2 / 4 at h = 1/16.
  CHECK(err > 0.0);
  CHECK(err < 0.25 * 0.0625 * 0.0625);
  CHECK(report["sandwich"]["passed"] == true);

  const auto manifest = read_json(dir / "manifest.json");
  CHECK(manifest["config"].dump() == resolved_config(c).dump());
  CHECK(manifest.contains("threads"));

  const std::string fields = slurp(dir / "fields.csv");
  CHECK(fields.rfind("node,boundary,x,y,u,lambda_1,lambda_2,residual\n", 0) == 0);
  CHECK(line_count(fields) == 1 + report["problem"]["grid"]["nodes"].get<std::size_t>());
}

TEST_CASE("field rows scale with node count under refinement") {
  const RunConfig coarse = parse_config(kMinimal);
  const RunConfig fine = parse_config(with(kMinimal, "0.0625", "0.03125"));
  const RunArtifacts a = execute(coarse);
  const RunArtifacts b = execute(fine);
  const double ratio = static_cast<double>(line_count(b.fields_csv) - 1) / static_cast<double>(line_count(a.fields_csv) - 1);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("runs are byte-identical across repeats and thread counts") {
  const std::string text = with(kMinimal, "\"command\": \"solve\"",
                                "\"command\": \"continuation\", \"schedule\": {\"initial\": 0.1, \"levels\": 4}");
  const RunConfig c = parse_config(with(text, "\"psi\": 1", "\"psi\": {\"kind\": \"radial_power\", \"coefficient\": 1, \"power\": 1}"));
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  set_thread_count(1);
  CHECK(run_quiet(c, a) == kExitOk);
  set_thread_count(3);
  CHECK(run_quiet(c, b) == kExitOk);
  set_thread_count(1);
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(slurp(a / "fields.csv") == slurp(b / "fields.csv"));
  CHECK(read_json(a / "report.json")["delta_study"]["verdict"] == "BOUNDED");
}

TEST_CASE("lemma-border echoes threshold 2 and both slacks") {
  const RunConfig c = parse_config(
      R"({"config_version": 1, "command": "lemma-border",
          "lemma_border": {"diagonal": [0], "border": [1], "epsilon": 0.5}})");
  const RunArtifacts a = execute(c);
  CHECK(a.conditions_passed);
  CHECK(a.report["threshold"].get<double>() == doctest::Approx(2.0).epsilon(1e-14));
  const double slack = 1.5 - std::sqrt(2.0);
  CHECK(a.report["localization"]["tangential_slack"][0].get<double>() == doctest::Approx(slack).epsilon(1e-10));
  CHECK(a.report["localization"]["upper_slack"].get<double>() == doctest::Approx(slack).epsilon(1e-10));
  CHECK(line_count(a.fields_csv) == 3);
}

TEST_CASE("lemma-border below the threshold is a condition failure") {
  const RunConfig c = parse_config(
      R"({"config_version": 1, "command": "lemma-border",
          "lemma_border": {"diagonal": [0], "border": [1], "epsilon": 0.5, "corner": 1}})");
  CHECK(run_quiet(c, scratch("lemma_low")) == kExitConditionFail);
}

TEST_CASE("check-cone exit codes") {
  const char* bad = R"({"config_version": 1, "command": "check-cone",
      "problem": {"operator": {"name": "nonmonotone_difference", "dimension": 2}}, "check_cone": {"samples": 500}})";
  const fs::path dir = scratch("cone_bad");
  CHECK(run_quiet(parse_config(bad), dir) == kExitConditionFail);
  CHECK(read_json(dir / "report.json")["status"] == "condition_failed");

  const char* good = R"({"config_version": 1, "command": "check-cone",
      "problem": {"operator": {"name": "sigma_k", "k": 2, "dimension": 3}}, "check_cone": {"samples": 500}})";
  CHECK(run_quiet(parse_config(good), scratch("cone_good")) == kExitOk);
}

TEST_CASE("check-cone with a domain adds the boundary cone condition") {
  // sigma_1 projects to the whole line, so any boundary passes.
  const char* text = R"({"config_version": 1, "command": "check-cone",
      "problem": {"domain": {"kind": "disk"}, "spacing": 0.125,
                  "operator": {"name": "sigma_1"}}, "check_cone": {"samples": 200}})";
  const RunArtifacts a = execute(parse_config(text));
  CHECK(a.report["boundary_cone_condition"]["passed"] == true);
  CHECK(a.conditions_passed);
}

TEST_CASE("poisson-h reproduces a harmonic boundary datum") {
  const char* text = R"({"config_version": 1, "command": "poisson-h",
      "problem": {"domain": {"kind": "disk"}, "spacing": 0.125,
                  "phi": {"kind": "affine", "coefficients": [1, -2], "offset": 0.5},
                  "exact": {"kind": "affine", "coefficients": [1, -2], "offset": 0.5}}})";
  const RunArtifacts a = execute(parse_config(text));
  CHECK(a.report["max_error"].get<double>() < 1e-10);
  CHECK(a.fields_csv.rfind("node,boundary,x,y,h\n", 0) == 0);
}

TEST_CASE("module errors map to exit families") {
  // No built-in subsolution exists on an annulus: a config-level problem.
  const char* annulus = R"({"config_version": 1, "command": "solve",
      "problem": {"domain": {"kind": "annulus", "inner_radius": 0.5, "outer_radius": 1}, "spacing": 0.125,
                  "operator": {"name": "monge_ampere"}, "psi": 1, "phi": 0}})";
  const fs::path dir = scratch("annulus");
  CHECK(run_quiet(parse_config(annulus), dir) == 2);
  CHECK(read_json(dir / "report.json")["error"]["code"] == "VALIDATION_ERROR");

  // One Newton step cannot converge from the generated subsolution.
  RunConfig c = parse_config(kMinimal);
  c.solver.max_iterations = 1;
  CHECK(run_quiet(c, scratch("maxit")) == 3);

  CHECK_THROWS_AS(load_config((scratch("io") / "absent.json").string()), Error);
}
