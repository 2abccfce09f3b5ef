#include <cmath>
#include <string>

#include "doctest.h"
#include "specann/scenario.hpp"

using namespace specann;

namespace {

// Two atoms left of a gap, flat AC right of it.
const char* kGap = R"({
  "schema": "specann.scenario/1",
  "id": "gap",
  "measure": {
    "atoms": [
      {"position": -1.5, "weight": 0.3},
      {"position": -1.0, "weight": 0.2}
    ],
    "ac_pieces": [{"lo": 0.5, "hi": 2.0, "density": [0.5]}]
  },
  "mode": "thm2",
  "region": {"delta0": 0.25}
})";

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
}

std::string config_error(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    FAIL("config was accepted");
    return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("a valid config fills every field and defaults") {
    const Scenario s = parse_scenario(kGap);
    CHECK(s.id == "gap");
    CHECK(s.mode == AnnihilatorMode::thm2);
    CHECK(s.delta0 == 0.25);
    CHECK(s.measure.atoms().size() == 2);
    CHECK(s.measure.ac_pieces().size() == 1);
    CHECK(s.rank == 1);
    CHECK(s.eps_ladder == default_eps_ladder());
    CHECK(s.grid == 4096);
    CHECK(s.seed == 1);
    CHECK_FALSE(s.expect);
    const auto r = regions(s);
    REQUIRE(r.size() == 1);
    CHECK(r[0].label == "(-inf,-0.25)");
    CHECK(std::isinf(r[0].lo));
    CHECK(r[0].hi == -0.25);
}

TEST_CASE("unknown keys are rejected with pointer and line") {
    const std::string msg = config_error(replace(kGap, R"("weight": 0.2})", R"("weight": 0.2, "colour": 1})"));
    CHECK(contains(msg, "/measure/atoms/1/colour"));
    CHECK(contains(msg, "(line 7)"));
    CHECK(contains(msg, "unknown key"));

    const std::string top = config_error(replace(kGap, R"("id": "gap",)", R"("id": "gap", "extra": true,)"));
    CHECK(contains(top, "/extra (line 3)"));
}

TEST_CASE("thm2 without a gap names the invariant") {
    const std::string missing = config_error(replace(kGap, R"("region": {"delta0": 0.25})", R"("region": {})"));
    CHECK(contains(missing, "spectral gap"));
    CHECK(contains(missing, "delta0"));

    const std::string no_region = config_error(replace(kGap, R"(,
  "region": {"delta0": 0.25})", ""));
    CHECK(contains(no_region, "spectral gap"));

    // delta0 = 1.2 swallows the atom at -1.0
    const std::string closed = config_error(replace(kGap, "0.25", "1.2"));
    CHECK(contains(closed, "/region/delta0"));
    CHECK(contains(closed, "spectral gap [-delta0, delta0]"));
}

TEST_CASE("mode-specific region keys") {
    CHECK(contains(config_error(replace(kGap, R"("delta0": 0.25)", R"("delta0": 0.25, "delta": [[-2, -1]])")),
                   "only valid in mode thm3"));
    const std::string thm3 = replace(replace(kGap, R"("mode": "thm2")", R"("mode": "thm3")"),
                                     R"("region": {"delta0": 0.25})", R"("region": {"delta": [[-2, -0.5], [0.6, 1]]})");
    const Scenario s = parse_scenario(thm3);
    REQUIRE(s.delta.size() == 2);
    const auto r = regions(s);
    CHECK(r[0].label == "[-2,-0.5]");
    CHECK(r[1].label == "[0.6,1]");
    // far outside the inflated hull [-2.5 - 1, 2 + 1]
    CHECK(contains(config_error(replace(thm3, "[0.6, 1]", "[5, 6]")), "inflated support hull"));
    CHECK(contains(config_error(replace(thm3, "[0.6, 1]", "[1, 0.6]")), "lo < hi"));
}

TEST_CASE("numeric overrides are range checked") {
    auto with_numerics = [](const std::string& body) {
        return replace(kGap, R"("mode": "thm2",)", R"("numerics": )" + body + R"(, "mode": "thm2",)");
    };
    const Scenario s = parse_scenario(with_numerics(R"({"eps_ladder": [0.1, 0.01, 0.001], "grid": 1024})"));
    CHECK(s.eps_ladder == std::vector<double>{0.1, 0.01, 0.001});
    CHECK(s.grid == 1024);
    CHECK(contains(config_error(with_numerics(R"({"eps_ladder": [0.1, 0.1]})")), "strictly decreasing"));
    CHECK(contains(config_error(with_numerics(R"({"eps_ladder": [0.1]})")), "at least two"));
    CHECK(contains(config_error(with_numerics(R"({"eps_ladder": [2, 0.1]})")), "(0, 1]"));
    CHECK(contains(config_error(with_numerics(R"({"grid": 16})")), "/numerics/grid"));
    CHECK(contains(config_error(with_numerics(R"({"grid": 1000.5})")), "integer"));
    CHECK(contains(config_error(with_numerics(R"({"thresholds": {"bounded_slope": -0.5}})")),
                   "unbounded_slope < bounded_slope"));
    CHECK(contains(config_error(with_numerics(R"({"thresholds": {"vanish": 1}})")), "/numerics/thresholds/vanish"));

    Scenario t = parse_scenario(kGap);
    CHECK_THROWS_AS(apply_eps_ladder(t, {}), ConfigError);
    CHECK_THROWS_AS(apply_eps_ladder(t, {0.1, 0.2}), ConfigError);
    CHECK_THROWS_AS(apply_grid(t, 100), ConfigError);
    apply_eps_ladder(t, {0.1, 0.05});
    CHECK(t.eps_ladder.size() == 2);
}

TEST_CASE("Cantor depth must cover the smallest eps") {
    const std::string cantor = R"({
  "schema": "specann.scenario/1",
  "id": "c",
  "measure": {"sc_pieces": [{"lo": -2, "hi": -0.5, "max_depth": 8}]},
  "mode": "thm3",
  "region": {"delta": [[-2, -0.5]]}
})";
    // r = 1/3, eps = 1e-4: ceil(log(1.5e5) / log 3) = 11 levels
    CHECK(contains(config_error(cantor), "Cantor depth 11"));
    CHECK(parse_scenario(replace(cantor, R"("max_depth": 8)", R"("max_depth": 11)")).measure.sc_pieces().size() == 1);
    Scenario s = parse_scenario(replace(cantor, R"("max_depth": 8)", R"("ratio": 0.1, "max_depth": 8)"));
    CHECK_THROWS_AS(apply_eps_ladder(s, {1e-3, 1e-12}), ConfigError);
}

TEST_CASE("syntax errors report line and column") {
    const std::string msg = config_error("{\n  \"schema\": \"specann.scenario/1\",\n  \"id\": ,\n}");
    CHECK(contains(msg, "line 3"));
    CHECK(contains(msg, "column"));
    CHECK(contains(config_error(replace(kGap, "specann.scenario/1", "specann.scenario/0")), "unsupported schema"));
    CHECK(contains(config_error(replace(kGap, R"("id": "gap")", R"("id": "a b")")), "/id"));
}

TEST_CASE("run, report and trace rows") {
    Scenario s = parse_scenario(kGap);
    s.eps_ladder = {1e-1, 1e-2, 1e-3, 3e-4, 1e-4};
    const ScenarioReport r = run_scenario(s);
    REQUIRE(r.regions.size() == 1);
    CHECK(r.regions[0].verdict == Verdict::singular);
    CHECK(r.runtime_ms);

    ScenarioReport quiet = r;
    quiet.runtime_ms.reset();
    const std::string json = report_json(quiet);
    CHECK(contains(json, R"("runtime_ms": null)"));
    // key order is part of the format
    const auto at = [&](const char* k) { return json.find(std::string("\"") + k + "\""); };
    CHECK(at("scenario_id") < at("mode"));
    CHECK(at("mode") < at("verdicts"));
    CHECK(at("verdicts") < at("calibration"));
    CHECK(at("calibration") < at("runtime_ms"));

    ScenarioReport again = run_scenario(s);
    again.runtime_ms.reset();
    CHECK(report_json(again) == json);

    const auto rows = trace_rows(r, "smirnov_strong", "atom0");
    REQUIRE(rows.size() == s.eps_ladder.size());
    for (const auto& row : rows) {
        // |alpha (A - lambda)^{-1} u|^2 = 2 w^2 / |k - x - i eps|^2 integrates to 2 pi w^2 / eps
        CHECK(row.norm * row.norm == doctest::Approx(2.0 * M_PI * 0.09 / row.eps).epsilon(0.01));
        CHECK(row.value.real() < row.norm);
    }
    const auto weak = trace_rows(r, "smirnov_weak", "atom1");
    REQUIRE(weak.size() == s.eps_ladder.size());
    for (const auto& row : weak) CHECK(row.value.real() > 0.0);
    CHECK(trace_rows(r, "weak_thm2", "").size() == 4 * s.eps_ladder.size());
    CHECK(trace_csv({}) == std::string(kTraceHeader) + "\n");
}

TEST_CASE("single traces reject unknown names") {
    Scenario s = parse_scenario(kGap);
    s.eps_ladder = {1e-1, 1e-2};
    CHECK_THROWS_AS(single_trace(s, "nope", "atom0"), ConfigError);
    CHECK_THROWS_AS(single_trace(s, "smirnov_strong", "ac7"), ConfigError);
    CHECK_THROWS_AS(single_trace(s, "weak_thm3", "atom0"), ConfigError);
    const auto rows = single_trace(s, "weak_thm2", "atom0");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].norm < rows[0].norm);
    CHECK(single_trace(s, "ac_baseline", "atom1")[0].norm ==
          doctest::Approx(single_trace(s, "smirnov_strong", "atom1")[0].norm));
}

TEST_CASE("rank-two rerun keeps the measure") {
    const Scenario s = with_rank_two(parse_scenario(kGap));
    CHECK(s.rank == 2);
    CHECK(build_model(s).rank() == 2);
    CHECK(build_model(parse_scenario(kGap)).rank() == 1);
}
