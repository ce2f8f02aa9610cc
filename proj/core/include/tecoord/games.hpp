#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tecoord/model.hpp"

namespace tecoord {

using StrategyProfile = std::vector<std::size_t>;

/// Finite normal-form game.  payoff maps a strategy-index profile to one
/// payoff per player and must be defined on every profile.
struct FiniteGame {
  std::vector<std::vector<std::string>> strategy_sets;
  std::function<std::vector<double>(std::span<const std::size_t>)> payoff;

  std::size_t players() const noexcept { return strategy_sets.size(); }
  std::size_t profile_count() const noexcept;
  /// Mixed-radix decoding; player 0 is the most significant digit.
  StrategyProfile profile_at(std::size_t index) const;
  void validate() const;
  void validate(std::span<const std::size_t> profile) const;
};

/// Two-player game from a payoff table indexed [row][column].
FiniteGame make_bimatrix(std::vector<std::string> rows, std::vector<std::string> columns,
                         std::vector<std::vector<std::pair<double, double>>> table);

enum class SolutionConcept { Nash, EpsilonNash, Dominant, BayesianNash };

std::string_view to_string(SolutionConcept c) noexcept;

struct GameSolution {
  std::variant<StrategyProfile, std::vector<double>> profile;
  SolutionConcept solution_concept = SolutionConcept::Nash;
  double epsilon = 0.0;  // certified max unilateral improvement
};

inline constexpr double kPayoffTolerance = 1e-12;

/// Largest gain any single player can get by deviating from profile.
double epsilon_of_profile(const FiniteGame& game, std::span<const std::size_t> profile);

/// All pure Nash equilibria, in profile order.  Throws NoPureNash if none.
std::vector<GameSolution> solve_nash_finite(const FiniteGame& game);

/// True iff every player's strategy is a best reply to every opponent profile.
bool is_dominant_profile(const FiniteGame& game, std::span<const std::size_t> profile);

// ---------------------------------------------------------------------------
// Incomplete information

/// Game whose payoffs depend on the realized type-index profile.  Types are
/// indices into the prior's per-player support.
struct BayesianGame {
  std::vector<std::vector<std::string>> strategy_sets;
  std::function<std::vector<double>(std::span<const std::size_t> types, std::span<const std::size_t> strategies)>
      payoff;
};

/// strategies[player][type index] = strategy index
using BayesianStrategy = std::vector<std::vector<std::size_t>>;

/// Interim expected payoff of `player` holding type `type_index` when every
/// player follows `strategies` and opponents' types are drawn from the prior.
double bayesian_expected_payoff(const BayesianGame& game, const TypePrior& prior,
                                const BayesianStrategy& strategies, std::size_t player, std::size_t type_index);

// ---------------------------------------------------------------------------
// Linear supply-function bidding

struct SupplyBidProfile {
  std::vector<double> bids;  // agent i sheds bids[i] * price
};

/// Price d / sum(b), shedding b_i * d / sum(b), payments to agents price * a_i.
MarketOutcome clear_supply_function(const SupplyBidProfile& bids, double deficit);

/// Payment received minus quadratic shedding cost beta_i * a_i^2 / 2.
double shedding_payoff(std::span<const double> bids, double deficit, double beta, std::size_t agent);

struct SupplyGameConfig {
  double damping = 0.5;
  std::size_t max_iterations = 100000;
  double tolerance = 1e-13;  // relative bid change that counts as a fixed point
  std::size_t deviation_grid = 10000;
  double epsilon_target = 1e-6;
};

struct SupplyGameResult {
  SupplyBidProfile bids;
  MarketOutcome outcome;
  GameSolution solution;
  double efficient_welfare = 0.0;  // -min sum beta_i a_i^2 / 2 subject to sum a = d
  double realized_welfare = 0.0;
  std::size_t iterations = 0;
};

/// Damped best-response dynamics on the bids with a grid-certified epsilon.
/// Needs at least three bidders for a positive-bid equilibrium; with two
/// none exists and NotConverged is thrown.
SupplyGameResult supply_function_nash(std::span<const double> betas, double deficit,
                                      const SupplyGameConfig& config = {});
SupplyGameResult supply_function_nash(const Scenario& scenario, const SupplyGameConfig& config = {});

/// Largest unilateral gain over a bid grid on [0, b_max] with one golden-
/// section refinement pass around each player's best grid cell.
double supply_bid_epsilon(std::span<const double> bids, std::span<const double> betas, double deficit,
                          double b_max, std::size_t grid_points);

}  // namespace tecoord
