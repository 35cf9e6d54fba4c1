#include <algorithm>

#include "doctest.h"
#include "fibre/algebra.hpp"
#include "fibre/expr.hpp"
#include "fibre/jobs.hpp"

using namespace fibre;
using nlohmann::json;

namespace {

bool mentions(const std::vector<std::string>& diags, const std::string& needle) {
  return std::any_of(diags.begin(), diags.end(), [&](const std::string& d) { return d.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("config syntax errors carry a byte offset") {
  CHECK_THROWS_WITH_AS(parse_config("{\"schema\": \"v1\",, }"), doctest::Contains("at byte 17"), ConfigError);
}

TEST_CASE("validation of bundle configs") {
  auto ok = parse_config(R"j({"schema": "v1", "manifold": "sphere2", "bundle": {"catalog": "clutching", "degree": 1}})j");
  CHECK(validate_config(ok).empty());

  auto p01 = parse_config(R"j({"schema": "v1", "manifold": "sphere2", "bundle": {"catalog": "trivial"}, "p": [0, 1]})j");
  CHECK(validate_config(p01).empty());

  auto bad = parse_config(R"j({"manifold": "sphere2", "resolution": 4,
    "bundle": {"rank": 1, "transitions": [{"from": "north", "to": "west", "entries": ["x + * y"]}]},
    "partitions": [{"bumps": ["1"]}], "p": [2], "colour": "red"})j");
  auto d = validate_config(bad);
  CHECK(mentions(d, "schema: missing schema version"));
  CHECK(mentions(d, "resolution: must lie in [8"));
  CHECK(mentions(d, "no chart \"west\""));
  CHECK(mentions(d, "entries[0]: unexpected character at offset 4"));
  CHECK(mentions(d, "partitions[0].bumps: expected one bump expression per chart (2)"));
  CHECK(mentions(d, "p[0]: Ch_2 has degree above"));
  CHECK(mentions(d, "colour: unknown field"));

  auto wrong_manifold = parse_config(R"j({"schema": "v1", "manifold": "circle3", "bundle": {"catalog": "clutching", "degree": 1}})j");
  CHECK(mentions(validate_config(wrong_manifold), "'clutching' bundles live on sphere2"));

  auto unknown = parse_config(R"j({"schema": "v1", "manifold": "klein", "bundle": {"catalog": "trivial"}})j");
  CHECK(mentions(validate_config(unknown), "unknown manifold 'klein'"));
  CHECK_THROWS_AS(run_bundle_report(unknown), ConfigError);
}

TEST_CASE("validation of algebra configs") {
  CHECK(validate_config(parse_config(R"j({"schema": "v1", "algebra": "product"})j")).empty());
  auto bad = parse_config(R"j({"schema": "v1", "algebra": "octonions", "n_max": 12})j");
  auto d = validate_config(bad);
  CHECK(mentions(d, "n_max: must lie in"));
  CHECK(mentions(d, "algebra:"));
  auto not_idempotent = parse_config(R"j({"schema": "v1", "algebra": "product", "idempotents": [{"name": "two", "entries": [[2, 0]]}]})j");
  CHECK(mentions(validate_config(not_idempotent), "idempotents[0]: matrix is not idempotent"));
}

TEST_CASE("bundle report on the degree one clutching bundle") {
  auto cfg = parse_config(R"j({"schema": "v1", "manifold": "sphere2", "resolution": 200,
    "bundle": {"catalog": "clutching", "degree": 1}, "partitions": [{"catalog": 0}, {"catalog": 1}]})j");
  JobResult r = run_bundle_report(cfg);
  CHECK(r.pass);
  const json& ch = r.report["partitions"][0]["chern"][0];
  CHECK(ch["p"] == 1);
  CHECK(ch["nearest"] == 1);
  CHECK(ch["route_delta"].get<double>() < 1e-6);
  CHECK(r.report["partition_independence"][0]["delta"].get<double>() < 1e-6);
  CHECK_FALSE(r.report.contains("timings"));
  CHECK(run_bundle_report(cfg, true).report.contains("timings"));
  // header plus one row per partition
  CHECK(std::count(r.csv.begin(), r.csv.end(), '\n') == 3);
}

TEST_CASE("flat circle bundle has vanishing residuals") {
  auto cfg = parse_config(R"j({"schema": "v1", "manifold": "circle3", "resolution": 64,
    "bundle": {"catalog": "flat-circle", "theta": 1.1}, "p": [0]})j");
  JobResult r = run_bundle_report(cfg);
  CHECK(r.pass);
  const json& part = r.report["partitions"][0];
  CHECK(part["gluing"].get<double>() < 1e-12);
  CHECK(part["structure"]["commutator"].get<double>() < 1e-12);
  CHECK(r.report["cocycle"]["max_cocycle_residual"].get<double>() < 1e-12);
}

TEST_CASE("explicit transitions and domain errors") {
  auto cfg = parse_config(R"j({"schema": "v1", "manifold": "sphere2", "resolution": 200,
    "bundle": {"rank": 1, "transitions": [{"from": "north", "to": "south", "entries": ["(x + i*y)/sqrt(x^2 + y^2)"]}]}})j");
  JobResult r = run_bundle_report(cfg);
  CHECK(r.report["partitions"][0]["chern"][0]["nearest"] == 1);

  auto bad = parse_config(R"j({"schema": "v1", "manifold": "sphere2", "resolution": 16,
    "bundle": {"rank": 1, "transitions": [{"from": "north", "to": "south", "entries": ["sqrt(-1 - x^2)"]}]}})j");
  CHECK_THROWS_AS(run_bundle_report(bad), DomainError);
}

TEST_CASE("thresholds are overridable") {
  auto cfg = parse_config(R"j({"schema": "v1", "manifold": "sphere2", "resolution": 40,
    "bundle": {"catalog": "clutching", "degree": 1}, "thresholds": {"route_delta": 1, "integrality": 0.5}})j");
  JobResult r = run_bundle_report(cfg);
  CHECK(r.report["thresholds"]["route_delta"] == 1.0);
  CHECK(r.pass);
  cfg["thresholds"] = json::object();
  CHECK_FALSE(run_bundle_report(cfg).pass);
}

TEST_CASE("algebra report for the dual numbers") {
  JobResult r = run_algebra_report(parse_config(R"j({"schema": "v1", "algebra": "dual-numbers", "n_max": 4})j"));
  CHECK(r.pass);
  int passes = 0;
  for (const auto& row : r.report["hbar_vs_b_kernel"]) passes += row["n"] > 0 && row["pass"].get<bool>();
  CHECK(passes == 4);
  CHECK(r.report["hbar_vs_b_kernel"][0]["reduced_degree_zero"] == true);
  CHECK(r.csv.rfind("n,omega,omega_bar,hbar,hbar_reduced,hh,hc,hc_reduced", 0) == 0);
}

TEST_CASE("rationals have no higher homology") {
  JobResult r = run_algebra_report(parse_config(R"j({"schema": "v1", "algebra": {"catalog": "rationals"}})j"));
  CHECK(r.pass);
  for (const auto& row : r.report["dimensions"]) {
    if (row["n"] == 0) continue;
    CHECK(row["hbar"] == 0);
    CHECK(row["hh"] == 0);
    CHECK(row["hc_reduced"] == 0);
  }
}

TEST_CASE("inline algebras and their failures") {
  auto assoc = parse_config(R"j({"schema": "v1", "algebra": {"name": "bad", "basis": ["1", "a", "b"], "unit": [1, 0, 0],
    "table": [[[1,0,0],[0,1,0],[0,0,1]], [[0,1,0],[0,0,1],[0,0,0]], [[0,0,1],[0,0,1],[0,0,0]]]}})j");
  CHECK_THROWS_WITH_AS(run_algebra_report(assoc), doctest::Contains("(a, a, a)"), ConfigError);

  auto big = parse_config(R"j({"schema": "v1", "algebra": "matrices-2", "n_max": 6})j");
  CHECK_THROWS_AS(run_algebra_report(big), SizeCapExceeded);
}
