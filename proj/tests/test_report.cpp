#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ckn/report.hpp"

using namespace ckn;

namespace {
Json t1() { return {{"N", 3}, {"alpha", 0.0}, {"beta", 0.15}, {"lambda", 0.0}}; }

RunConfig small(const std::string& coeff = R"({"kind":"self_dual_bump","A":0.5})", int n = 1024) {
  Json j{{"problem", t1()}, {"coefficient", Json::parse(coeff)}, {"grid", {{"n", n}}}};
  return RunConfig::from_json(j);
}
}  // namespace

TEST_CASE("problem block") {
  const auto q = parse_problem(t1());
  CHECK(q.p() == doctest::Approx(60.0 / 13.0).epsilon(1e-15));
  for (const char* k : {"a", "b", "p"}) {
    auto j = t1();
    j[k] = 0.0;
    CHECK_THROWS_AS(parse_problem(j), ConfigError);
  }
  auto extra = t1();
  extra["gamma"] = 1.0;
  CHECK_THROWS_AS(parse_problem(extra), ConfigError);
  auto bad = t1();
  bad["alpha"] = 0.6;
  bad["beta"] = 0.7;
  CHECK_THROWS_AS(parse_problem(bad), ConfigError);
  auto noN = t1();
  noN.erase("N");
  CHECK_THROWS_AS(parse_problem(noN), ConfigError);
  auto fracN = t1();
  fracN["N"] = 3.5;
  CHECK_THROWS_AS(parse_problem(fracN), ConfigError);
}

TEST_CASE("coefficient block") {
  CHECK(parse_coefficient(Json::parse(R"({"kind":"constant","c":1.0})")).kind() == CoefficientKind::Constant);
  const auto K = parse_coefficient(Json::parse(R"({"kind":"self_dual_bump","A":0.5})"));
  CHECK(K.kind() == CoefficientKind::SelfDualBump);
  CHECK(K.eval(1.0) == doctest::Approx(1.25));
  Json t{{"kind", "table"}, {"r", Json::array()}, {"K", Json::array()}};
  for (int i = 0; i <= 40; ++i) {
    const double x = std::pow(10.0, -2.0 + 4.0 * i / 40.0);
    t["r"].push_back(x);
    t["K"].push_back(1.0 + 0.5 * x * x / (1 + x * x * x * x));
  }
  CHECK(parse_coefficient(t).kind() == CoefficientKind::Table);
  CHECK_THROWS_AS(parse_coefficient(Json::parse(R"({"kind":"cosine"})")), ConfigError);
  CHECK_THROWS_AS(parse_coefficient(Json::parse(R"({"kind":"self_dual_bump","A":-3})")), ConfigError);
  CHECK_THROWS_AS(parse_coefficient(Json::parse(R"({"kind":"table","r":[1,2],"K":[1]})")), ConfigError);
  CHECK_THROWS_AS(parse_coefficient(Json::parse(R"({"A":0.5})")), ConfigError);
}

TEST_CASE("run config") {
  const auto cfg = small();
  CHECK(cfg.grid.n == 1024);
  CHECK_FALSE(cfg.grid.S.has_value());
  CHECK(cfg.make_grid()->half_width() == doctest::Approx(20.0));
  Json j{{"problem", t1()}, {"grid", {{"S", 2.0}}}};
  CHECK_THROWS_AS(RunConfig::from_json(j).make_grid(), ConfigError);
  Json top{{"problem", t1()}, {"p", 4.0}};
  CHECK_THROWS_AS(RunConfig::from_json(top), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_file("/nonexistent/config.json"), ConfigError);

  const auto path = std::filesystem::temp_directory_path() / "ckn_report_test.json";
  std::ofstream(path) << R"({"problem": {"N": 3, "alpha": 0, "beta": 0.15, "lambda": 0}, "coefficient": {"kind": "constant", "c": 2}})";
  CHECK(RunConfig::from_file(path.string()).coefficient.constant_value() == 2.0);
  std::ofstream(path) << "{not json";
  CHECK_THROWS_AS(RunConfig::from_file(path.string()), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("checks") {
  Checks c;
  c.at_most("x", 1.0, 2.0);
  c.at_least("y", 3.0, 2.0);
  c.require("z", true);
  CHECK(c.passed());
  CHECK(c.violations().empty());
  c.at_most("nan", std::nan(""), 1.0);
  CHECK_FALSE(c.passed());
  CHECK(c.violations().size() == 1);
  CHECK(c.to_json().size() == 4);
  CHECK(c.to_json()[3]["value"].is_null());
}

TEST_CASE("params command") {
  const auto r = run_command("params", small());
  CHECK(r.exit_code == 0);
  CHECK(r.report["schema"] == "ckn-lab/1");
  CHECK(r.report["problem"]["a"].get<double>() == 0.0);
  CHECK(r.report["problem"]["b"].get<double>() == doctest::Approx(0.15));
  CHECK(r.report["problem"]["p"].get<double>() == doctest::Approx(4.615385).epsilon(1e-6));
  CHECK(r.report["passed"] == true);
  CHECK(r.report["coefficient"]["degree"] == -1);
  // deterministic
  CHECK(run_command("params", small()).report.dump() == r.report.dump());
}

TEST_CASE("melnikov command") {
  const auto r = run_command("melnikov", small());
  CHECK(r.exit_code == 0);
  CHECK(r.report["degree"] == -1);
  const auto flat = run_command("melnikov", small(R"({"kind":"constant","c":1.0})"));
  CHECK(flat.report["degree"].is_null());
}

TEST_CASE("instanton and pohozaev commands write CSV") {
  const auto dir = std::filesystem::temp_directory_path() / "ckn_report_csv";
  std::filesystem::remove_all(dir);
  for (const char* cmd : {"instanton", "pohozaev"}) {
    // default resolution; coarser grids miss the 1e-10 boundary-term bound
    const auto r = run_command(cmd, small(R"({"kind":"self_dual_bump","A":0.5})", 2048), {dir.string(), 1.0});
    CHECK(r.exit_code == 0);
    CHECK(r.report["violations"].empty());
  }
  CHECK(std::filesystem::exists(dir / "instanton_0.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("tight tolerances produce violations and exit 1") {
  const auto r = run_command("instanton", small(), {"", 1e-12});
  CHECK(r.exit_code == 1);
  CHECK_FALSE(r.report["violations"].empty());
  CHECK(r.report["passed"] == false);
}

TEST_CASE("command errors") {
  CHECK_THROWS_AS(run_command("nope", small()), ConfigError);
  CHECK_THROWS_AS(run_command("params", small(), {"", 0.0}), ConfigError);
  auto cfg = small();
  cfg.options = {{"t", {0.2}}};
  CHECK_THROWS_AS(run_command("reduce", cfg), ConfigError);
  CHECK(command_names().size() == 7);
}
