#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "tecoord/scenario_io.hpp"

using namespace tecoord;

namespace {

const char* kCanonical = R"({
  "agents": [
    {"id": 1, "alpha": 10, "beta": 1, "a_min": 0, "a_max": 10},
    {"id": 2, "alpha": 8, "beta": 1, "a_min": 0, "a_max": 10}
  ],
  "coordinator": {"c1": 0, "c2": 1, "y_min": 0, "y_max": 100}
})";

}  // namespace

TEST_CASE("parse the canonical scenario") {
  const auto s = parse_scenario_text(kCanonical);
  CHECK(s == fixtures::canonical());
}

TEST_CASE("null supply bound means unbounded") {
  const auto s = parse_scenario_text(R"({"agents": [{"id": 1, "alpha": 5, "beta": 2, "a_min": 0, "a_max": 3}],
    "coordinator": {"c1": 1, "c2": 0.5, "y_min": 0, "y_max": null, "capacity": 2.5, "deficit": 1}})");
  CHECK(std::isinf(s.coordinator.supply_bounds.hi));
  CHECK(s.coordinator.capacity == 2.5);
  CHECK(s.coordinator.deficit == 1.0);
}

TEST_CASE("prior accepts object and pair thetas") {
  const auto s = parse_scenario_text(R"({"agents": [{"id": 1, "alpha": 5, "beta": 2, "a_min": 0, "a_max": 3}],
    "coordinator": {"c1": 1, "c2": 0.5, "y_min": 0, "y_max": 9},
    "prior": {"support": [[{"alpha": 4, "beta": 2}, [6, 2]]], "weights": [[0.25, 0.75]], "independent": true}})");
  REQUIRE(s.prior);
  CHECK(s.prior->support[0][0] == Theta{4, 2});
  CHECK(s.prior->support[0][1] == Theta{6, 2});
  CHECK(s.prior->weights[0][1] == 0.75);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_CODE(parse_scenario_text(R"({"agents": [], "coordinator": {}, "extra": 1})"), ErrorCode::ScenarioInvalid);
  CHECK_THROWS_CODE(parse_scenario_text(R"({"agents": [{"id": 1, "alpha": 5, "beta": 2, "a_min": 0, "a_max": 3, "gamma": 1}],
    "coordinator": {"c1": 1, "c2": 0.5, "y_min": 0, "y_max": 9}})"),
                    ErrorCode::ScenarioInvalid);
  CHECK_THROWS_CODE(parse_scenario_text(R"({"agents": [{"id": 1, "alpha": 5, "beta": 2, "a_min": 0, "a_max": 3}],
    "coordinator": {"c1": 1, "c2": 0.5, "y_min": 0, "y_max": 9, "tax": 2}})"),
                    ErrorCode::ScenarioInvalid);
}

TEST_CASE("malformed documents") {
  CHECK_THROWS_CODE(parse_scenario_text("{"), ErrorCode::ScenarioInvalid);
  CHECK_THROWS_CODE(parse_scenario_text(R"({"agents": [{"id": 1, "alpha": "5", "beta": 2, "a_min": 0, "a_max": 3}],
    "coordinator": {"c1": 1, "c2": 0.5, "y_min": 0, "y_max": 9}})"),
                    ErrorCode::ScenarioInvalid);
  // parsing validates: beta must be positive
  CHECK_THROWS_CODE(parse_scenario_text(R"({"agents": [{"id": 1, "alpha": 5, "beta": -2, "a_min": 0, "a_max": 3}],
    "coordinator": {"c1": 1, "c2": 0.5, "y_min": 0, "y_max": 9}})"),
                    ErrorCode::ScenarioInvalid);
}

TEST_CASE("missing file names the path") {
  try {
    (void)load_scenario("/nonexistent/where.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ScenarioInvalid);
    CHECK(std::string(e.what()).find("/nonexistent/where.json") != std::string::npos);
  }
}

TEST_CASE("save and load round-trip exactly") {
  auto s = fixtures::canonical(4.0);
  s.agents[0].theta.alpha = 0.1 + 0.2;  // not representable in short decimal
  s.coordinator.supply_bounds.hi = fixtures::kInf;
  s.coordinator.deficit = 1.0 / 3.0;
  s.prior = fixtures::two_point_prior(s, 1.0 / 7.0);
  const auto path = std::filesystem::temp_directory_path() / "tecoord_roundtrip.json";
  save_scenario(s, path);
  CHECK(load_scenario(path) == s);
  CHECK(parse_scenario(to_json(s)) == s);
  std::filesystem::remove(path);
}

TEST_CASE("canonical dump sorts keys and prints 17 digits") {
  const nlohmann::json doc = {{"b", 0.1}, {"a", {{"z", 1}, {"y", -0.0}}}, {"c", std::vector<double>{1.5, 2}}};
  const auto text = dump_canonical(doc, -1);
  CHECK(text == R"({"a":{"y":0,"z":1},"b":0.10000000000000001,"c":[1.5,2]})");
  CHECK(dump_canonical(doc) == dump_canonical(nlohmann::json::parse(dump_canonical(doc))));
}
