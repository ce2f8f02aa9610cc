#include <doctest.h>

#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tecoord/games.hpp"

using namespace tecoord;

namespace {

FiniteGame prisoners_dilemma() {
  return make_bimatrix({"cooperate", "defect"}, {"cooperate", "defect"},
                       {{{-1, -1}, {-3, 0}}, {{0, -3}, {-2, -2}}});
}

FiniteGame matching_pennies() {
  return make_bimatrix({"heads", "tails"}, {"heads", "tails"}, {{{1, -1}, {-1, 1}}, {{-1, 1}, {1, -1}}});
}

FiniteGame coordination() {
  return make_bimatrix({"A", "B"}, {"A", "B"}, {{{2, 2}, {0, 0}}, {{0, 0}, {1, 1}}});
}

FiniteGame one_player(std::vector<double> values) {
  FiniteGame g;
  g.strategy_sets = {std::vector<std::string>(values.size(), "s")};
  g.payoff = [values](std::span<const std::size_t> p) { return std::vector<double>{values[p[0]]}; };
  return g;
}

FiniteGame random_game(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(2, 3), payoff(-3, 3);
  const std::size_t rows = size(rng), cols = size(rng);
  std::vector<std::vector<std::pair<double, double>>> table(rows);
  for (auto& r : table)
    for (std::size_t c = 0; c < cols; ++c) r.emplace_back(payoff(rng), payoff(rng));
  return make_bimatrix(std::vector<std::string>(rows, "r"), std::vector<std::string>(cols, "c"), table);
}

// Shedding payoff written out from the clearing rule.
double shedding(const std::vector<double>& b, double d, double beta, std::size_t i) {
  const double total = std::accumulate(b.begin(), b.end(), 0.0);
  const double price = d / total;
  const double a = b[i] * d / total;
  return price * a - 0.5 * beta * a * a;
}

}  // namespace

TEST_CASE("epsilon of a profile") {
  const auto pd = prisoners_dilemma();
  CHECK(epsilon_of_profile(pd, StrategyProfile{1, 1}) == 0.0);
  CHECK(epsilon_of_profile(pd, StrategyProfile{0, 0}) == 1.0);
  CHECK(epsilon_of_profile(one_player({1, 5, 2}), StrategyProfile{1}) == 0.0);
  CHECK_THROWS_CODE(epsilon_of_profile(pd, StrategyProfile{2, 0}), ErrorCode::InvalidArgument);
  CHECK_THROWS_CODE(epsilon_of_profile(pd, StrategyProfile{0}), ErrorCode::BadDimensions);
}

TEST_CASE("pure Nash enumeration") {
  const auto pd = solve_nash_finite(prisoners_dilemma());
  REQUIRE(pd.size() == 1);
  CHECK(std::get<StrategyProfile>(pd[0].profile) == StrategyProfile{1, 1});
  CHECK(pd[0].solution_concept == SolutionConcept::Nash);

  CHECK_THROWS_CODE(solve_nash_finite(matching_pennies()), ErrorCode::NoPureNash);

  const auto co = solve_nash_finite(coordination());
  REQUIRE(co.size() == 2);
  CHECK(std::get<StrategyProfile>(co[0].profile) == StrategyProfile{0, 0});
  CHECK(std::get<StrategyProfile>(co[1].profile) == StrategyProfile{1, 1});
}

TEST_CASE("dominant profiles") {
  CHECK(is_dominant_profile(prisoners_dilemma(), StrategyProfile{1, 1}));
  CHECK_FALSE(is_dominant_profile(prisoners_dilemma(), StrategyProfile{0, 0}));
  CHECK_FALSE(is_dominant_profile(coordination(), StrategyProfile{0, 0}));
  CHECK(is_dominant_profile(one_player({1, 5, 2}), StrategyProfile{1}));
}

TEST_CASE("solution concepts agree on random games") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = random_game(rng);
    std::vector<StrategyProfile> zero_eps;
    for (std::size_t k = 0; k < g.profile_count(); ++k)
      if (epsilon_of_profile(g, g.profile_at(k)) == 0.0) zero_eps.push_back(g.profile_at(k));

    std::vector<StrategyProfile> nash;
    try {
      for (const auto& s : solve_nash_finite(g)) nash.push_back(std::get<StrategyProfile>(s.profile));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoPureNash);
    }
    CHECK(nash == zero_eps);

    for (std::size_t k = 0; k < g.profile_count(); ++k)
      if (is_dominant_profile(g, g.profile_at(k))) CHECK(epsilon_of_profile(g, g.profile_at(k)) == 0.0);
  }
}

TEST_CASE("interim expected payoff") {
  // Two bidders with values {1, 2}; strategies bid {0, 0.5, 1}; highest bid
  // wins and pays its bid, ties split.
  const std::vector<double> bids{0.0, 0.5, 1.0}, values{1.0, 2.0};
  BayesianGame g;
  g.strategy_sets = {{"0", "0.5", "1"}, {"0", "0.5", "1"}};
  g.payoff = [&](std::span<const std::size_t> types, std::span<const std::size_t> s) {
    std::vector<double> u(2, 0.0);
    const double b0 = bids[s[0]], b1 = bids[s[1]];
    if (b0 > b1) u[0] = values[types[0]] - b0;
    else if (b1 > b0) u[1] = values[types[1]] - b1;
    else {
      u[0] = 0.5 * (values[types[0]] - b0);
      u[1] = 0.5 * (values[types[1]] - b1);
    }
    return u;
  };
  TypePrior prior;
  prior.support = {{{1, 1}, {2, 1}}, {{1, 1}, {2, 1}}};
  prior.weights = {{0.25, 0.75}, {0.25, 0.75}};
  const BayesianStrategy strategy{{1, 2}, {0, 1}};  // player 0 bids 0.5 / 1, player 1 bids 0 / 0.5

  // Player 0 with value 2 bids 1: beats both opponent bids, gains 1 either way.
  CHECK(bayesian_expected_payoff(g, prior, strategy, 0, 1) == doctest::Approx(1.0));
  // Player 0 with value 1 bids 0.5: wins outright against 0 (p 0.25), ties 0.5 (p 0.75).
  CHECK(bayesian_expected_payoff(g, prior, strategy, 0, 0) == doctest::Approx(0.25 * 0.5 + 0.75 * 0.25));
  // Player 1 with value 2 bids 0.5: ties player 0's 0.5 (p 0.25), loses to 1 (p 0.75).
  CHECK(bayesian_expected_payoff(g, prior, strategy, 1, 1) == doctest::Approx(0.25 * 0.75));

  SUBCASE("point prior reduces to complete information") {
    TypePrior point;
    point.support = {{{2, 1}}, {{1, 1}}};
    point.weights = {{1.0}, {1.0}};
    // type index 0 carries value 1 in this game; bidding 0.5 against 0 wins 0.5
    const BayesianStrategy s{{1}, {0}};
    CHECK(bayesian_expected_payoff(g, point, s, 0, 0) == doctest::Approx(0.5));
  }
  SUBCASE("payoffs constant across opponent types") {
    BayesianGame flat;
    flat.strategy_sets = g.strategy_sets;
    flat.payoff = [](std::span<const std::size_t>, std::span<const std::size_t>) {
      return std::vector<double>{3.5, -1};
    };
    CHECK(bayesian_expected_payoff(flat, prior, strategy, 0, 0) == doctest::Approx(3.5));
  }
  SUBCASE("errors") {
    CHECK_THROWS_CODE(bayesian_expected_payoff(g, prior, strategy, 0, 2), ErrorCode::TypeOffSupport);
    CHECK_THROWS_CODE(bayesian_expected_payoff(g, prior, BayesianStrategy{{1}, {0, 1}}, 0, 0),
                      ErrorCode::TypeOffSupport);
    auto correlated = prior;
    correlated.independent = false;
    CHECK_THROWS_CODE(bayesian_expected_payoff(g, correlated, strategy, 0, 0), ErrorCode::InvalidArgument);
  }
}

TEST_CASE("supply-function clearing") {
  auto out = clear_supply_function({{1, 1}}, 6);
  CHECK(out.uniform_price() == 3.0);
  CHECK(out.allocations == std::vector<double>{3, 3});
  CHECK(out.payments == std::vector<double>{9, 9});
  out = clear_supply_function({{3, 1}}, 8);
  CHECK(out.uniform_price() == 2.0);
  CHECK(out.allocations == std::vector<double>{6, 2});
  CHECK_THROWS_CODE(clear_supply_function({{0, 0}}, 5), ErrorCode::ZeroBidSum);
  CHECK_THROWS_CODE(clear_supply_function({{-1, 2}}, 5), ErrorCode::InvalidArgument);
}

TEST_CASE("clearing sums to the deficit and keeps bid ratios") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> bid(0.0, 5.0), deficit(0.1, 50.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> b(2 + trial % 4);
    for (auto& x : b) x = bid(rng);
    const double d = deficit(rng);
    const auto out = clear_supply_function({b}, d);
    const double total = std::accumulate(out.allocations.begin(), out.allocations.end(), 0.0);
    CHECK(std::abs(total - d) <= 4.0 * b.size() * std::numeric_limits<double>::epsilon() * d);
    CHECK(out.allocations[0] / out.allocations[1] == doctest::Approx(b[0] / b[1]).epsilon(1e-12));
  }
}

TEST_CASE("symmetric supply game matches the closed form") {
  // Symmetric fixed point of b = S / (1 + beta S) with S = (N - 1) b.
  for (std::size_t n : {3u, 4u, 6u}) {
    const std::vector<double> betas(n, 1.0);
    const auto r = supply_function_nash(betas, 2.0);
    const double expected = (n - 2.0) / (n - 1.0);
    for (double b : r.bids.bids) CHECK(b == doctest::Approx(expected).epsilon(1e-9));
    for (double a : r.outcome.allocations) CHECK(a == doctest::Approx(2.0 / n).epsilon(1e-9));
    CHECK(r.solution.epsilon <= 1e-6);
  }
}

TEST_CASE("cheaper shedders shed more") {
  const std::vector<double> betas{1, 2, 4};
  const auto r = supply_function_nash(betas, 3.0);
  CHECK(r.outcome.allocations[0] > r.outcome.allocations[1]);
  CHECK(r.outcome.allocations[1] > r.outcome.allocations[2]);
  CHECK(r.solution.epsilon <= 1e-6);
  CHECK(r.realized_welfare <= r.efficient_welfare + 1e-12);

  // Each bid is a grid best reply to the others.
  const double b_max = 10.0 * 3.0 / 1.0;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    auto trial = r.bids.bids;
    const auto best = oracle::grid_argmax(
        [&](double x) {
          trial[i] = x;
          return shedding(trial, 3.0, betas[i], i);
        },
        1e-6, b_max, 1e-4);
    CHECK(shedding(r.bids.bids, 3.0, betas[i], i) >= best.value - 1e-7);
  }
}

TEST_CASE("supply game needs three bidders") {
  CHECK_THROWS_CODE(supply_function_nash(std::vector<double>{1.0}, 2.0), ErrorCode::InvalidArgument);
  CHECK_THROWS_CODE(supply_function_nash(std::vector<double>{1.0, 1.0}, 2.0), ErrorCode::NotConverged);
  CHECK_THROWS_CODE(supply_function_nash(std::vector<double>{1.0, 2.0}, 3.0), ErrorCode::NotConverged);
  CHECK_THROWS_CODE(supply_function_nash(std::vector<double>{1.0, 0.0, 1.0}, 3.0), ErrorCode::InvalidArgument);
  auto s = fixtures::make_scenario({{1, 1}, {1, 1}, {1, 1}}, {0, 10});
  CHECK_THROWS_CODE(supply_function_nash(s), ErrorCode::ScenarioInvalid);
  s.coordinator.deficit = 2.0;
  CHECK(supply_function_nash(s).outcome.supply == 2.0);
}

TEST_CASE("epsilon certificate detects a bad profile") {
  const std::vector<double> betas{1, 1, 1};
  CHECK(supply_bid_epsilon(std::vector<double>{0.5, 0.5, 0.5}, betas, 2.0, 20.0, 10000) <= 1e-9);
  CHECK(supply_bid_epsilon(std::vector<double>{3.0, 0.5, 0.5}, betas, 2.0, 20.0, 10000) > 1e-3);
}
