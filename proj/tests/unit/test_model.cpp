#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tecoord/model.hpp"

using namespace tecoord;
using fixtures::kInf;

TEST_CASE("utility value of the quadratic family") {
  CHECK(utility_value(0.0, {10, 1}) == 0.0);
  CHECK(utility_value(0.0, {3.7, 0.4}) == 0.0);
  CHECK(utility_value(4.0, {10, 1}) == 32.0);
  // vertex of the parabola
  const Theta t{10, 1};
  CHECK(utility_value(t.alpha / t.beta, t) == 50.0);
  CHECK(marginal_utility(10.0, t) == 0.0);
}

TEST_CASE("demand examples") {
  const AgentSpec agent{1, {10, 1}, {0, 10}};
  const auto oracle =
      oracle::grid_argmax([](double a) { return 10 * a - 0.5 * a * a - 6 * a; }, 0.0, 10.0, 1e-3);
  CHECK(demand(6.0, agent) == doctest::Approx(oracle.x).epsilon(1e-3));
  CHECK(demand(6.0, agent) == 4.0);
  CHECK(demand(10.0, agent) == 0.0);
  CHECK(demand(25.0, agent) == 0.0);
  CHECK(demand(0.0, AgentSpec{1, {10, 1}, {0, 4}}) == 4.0);
}

TEST_CASE("demand matches brute force and is nonincreasing in price") {
  const AgentSpec agent{1, {7.5, 1.5}, {0.5, 4}};
  double previous = kInf;
  for (double price = -2.0; price <= 12.0; price += 0.25) {
    const double d = demand(price, agent);
    const auto brute = oracle::grid_argmax(
        [&](double a) { return utility_value(a, agent.theta) - price * a; }, agent.bounds.lo, agent.bounds.hi, 1e-4);
    CHECK(std::abs(d - brute.x) <= 1e-4);
    CHECK(d <= previous);
    previous = d;
  }
}

TEST_CASE("supply examples") {
  CoordinatorSpec c{{0, 1}, {0, 100}};
  const auto oracle = oracle::grid_argmax([](double y) { return 6 * y - 0.5 * y * y; }, 0.0, 100.0, 1e-3);
  CHECK(supply(6.0, c) == doctest::Approx(oracle.x).epsilon(1e-3));
  CHECK(supply(6.0, c) == 6.0);
  CHECK(supply(20.0, CoordinatorSpec{{0, 1}, {0, 10}}) == 10.0);
  CHECK(supply(2.5, CoordinatorSpec{{2.5, 3}, {0, 10}}) == 0.0);
}

TEST_CASE("supply is nondecreasing in price") {
  const CoordinatorSpec c{{1.0, 0.5}, {0.5, 8}};
  double previous = -kInf;
  for (double price = -3.0; price <= 10.0; price += 0.125) {
    const double y = supply(price, c);
    CHECK(y >= previous);
    CHECK(c.supply_bounds.contains(y));
    previous = y;
  }
}

TEST_CASE("linear cost supply goes to the profitable bound") {
  const CoordinatorSpec bounded{{3, 0}, {1, 9}};
  CHECK(supply(4.0, bounded) == 9.0);
  CHECK(supply(2.0, bounded) == 1.0);
  CHECK(supply(3.0, bounded) == 1.0);  // exact tie goes to y_min
  const CoordinatorSpec open{{3, 0}, {0, kInf}};
  CHECK_THROWS_CODE(supply(4.0, open), ErrorCode::DegenerateSupply);
  CHECK(supply(3.0, open) == 0.0);
}

TEST_CASE("scenario validation") {
  auto s = fixtures::canonical();
  CHECK_NOTHROW(s.validate());

  SUBCASE("no agents") {
    s.agents.clear();
    CHECK_THROWS_CODE(s.validate(), ErrorCode::ScenarioInvalid);
  }
  SUBCASE("nonpositive beta") {
    s.agents[0].theta.beta = 0.0;
    CHECK_THROWS_CODE(s.validate(), ErrorCode::ScenarioInvalid);
  }
  SUBCASE("inverted box") {
    s.agents[1].bounds = {3, 2};
    CHECK_THROWS_CODE(s.validate(), ErrorCode::ScenarioInvalid);
  }
  SUBCASE("negative a_min") {
    s.agents[1].bounds = {-1, 2};
    CHECK_THROWS_CODE(s.validate(), ErrorCode::ScenarioInvalid);
  }
  SUBCASE("ids not contiguous") {
    s.agents[1].id = 3;
    CHECK_THROWS_CODE(s.validate(), ErrorCode::ScenarioInvalid);
  }
  SUBCASE("negative c2") {
    s.coordinator.cost.c2 = -1;
    CHECK_THROWS_CODE(s.validate(), ErrorCode::ScenarioInvalid);
  }
  SUBCASE("zero capacity") {
    s.coordinator.capacity = 0.0;
    CHECK_THROWS_CODE(s.validate(), ErrorCode::ScenarioInvalid);
  }
  SUBCASE("prior weights must sum to one") {
    auto p = fixtures::two_point_prior(s, 1.0);
    p.weights[0] = {0.5, 0.4};
    s.prior = p;
    CHECK_THROWS_CODE(s.validate(), ErrorCode::ScenarioInvalid);
  }
  SUBCASE("prior sized per agent") {
    auto p = fixtures::two_point_prior(s, 1.0);
    p.support.pop_back();
    p.weights.pop_back();
    s.prior = p;
    CHECK_THROWS_CODE(s.validate(), ErrorCode::ScenarioInvalid);
  }
}

TEST_CASE("per-agent prices refuse uniform access") {
  MarketOutcome out;
  out.prices = PerAgentPrices{1.0, 2.0};
  CHECK_THROWS_CODE(out.uniform_price(), ErrorCode::InvalidArgument);
  out.prices = UniformPrice{4.0};
  CHECK(out.uniform_price() == 4.0);
}

TEST_CASE("type graph") {
  SUBCASE("coordinator knows every type") {
    const std::vector<std::vector<bool>> k{{true, true, true}, {false, true, false}, {false, false, true}};
    const auto g = build_type_graph(k);
    CHECK(g.nodes == 3);
    CHECK(g.edges == std::vector<std::pair<std::size_t, std::size_t>>{{1, 0}, {2, 0}});
  }
  SUBCASE("nobody knows anyone else") {
    const std::vector<std::vector<bool>> k{{false, false, false}, {false, true, false}, {false, false, true}};
    CHECK(build_type_graph(k).edges.empty());
  }
  SUBCASE("single agent knowing itself") {
    const std::vector<std::vector<bool>> k{{false, false}, {false, true}};
    CHECK(build_type_graph(k).edges.empty());
  }
  SUBCASE("bad shape") {
    CHECK_THROWS_CODE(build_type_graph({{true, false}, {true}}), ErrorCode::BadDimensions);
    CHECK_THROWS_CODE(build_type_graph({}), ErrorCode::BadDimensions);
  }
}

TEST_CASE("decision graph") {
  SUBCASE("coordinator moves first") {
    const auto g = build_decision_graph({{0}, {1, 2, 3}});
    CHECK(g.edges == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {0, 2}, {0, 3}});
  }
  SUBCASE("simultaneous play") { CHECK(build_decision_graph({{0, 1, 2}}).edges.empty()); }
  SUBCASE("total order") {
    const auto g = build_decision_graph({{0}, {1}, {2}});
    CHECK(g.edges == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {0, 2}, {1, 2}});
  }
  SUBCASE("not a partition") {
    CHECK_THROWS_CODE(build_decision_graph({{0, 1}, {1}}), ErrorCode::NotAPartition);
    CHECK_THROWS_CODE(build_decision_graph({{0}, {5}}), ErrorCode::NotAPartition);
  }
}

TEST_CASE("decision graphs are acyclic and transitively closed") {
  const Stages shapes[] = {{{0}, {1, 2}, {3}, {4, 5, 6}}, {{2, 0}, {1}}, {{3}, {0, 1}, {2}}, {{0, 1, 2, 3}}};
  for (const auto& stages : shapes) {
    const auto g = build_decision_graph(stages);
    CHECK(g.acyclic());
    for (const auto& [a, b] : g.edges)
      for (const auto& [c, d] : g.edges)
        if (b == c) CHECK(g.has_edge(a, d));
  }
}

TEST_CASE("information structure pairs both graphs") {
  const std::vector<std::vector<bool>> k{{true, true}, {false, true}};
  const auto info = make_information_structure(k, {{0}, {1}});
  CHECK(info.type_graph.has_edge(1, 0));
  CHECK(info.decision_graph.has_edge(0, 1));
  CHECK_THROWS_CODE(make_information_structure(k, {{0}, {1}, {2}}), ErrorCode::BadDimensions);
}
