#include "tecoord/games.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "search.hpp"
#include "tecoord/error.hpp"
#include "tecoord/parallel.hpp"

namespace tecoord {

std::string_view to_string(SolutionConcept c) noexcept {
  switch (c) {
    case SolutionConcept::Nash: return "nash";
    case SolutionConcept::EpsilonNash: return "epsilon-nash";
    case SolutionConcept::Dominant: return "dominant";
    case SolutionConcept::BayesianNash: return "bayesian-nash";
  }
  return "unknown";
}

std::size_t FiniteGame::profile_count() const noexcept {
  std::size_t n = 1;
  for (const auto& s : strategy_sets) n *= s.size();
  return n;
}

StrategyProfile FiniteGame::profile_at(std::size_t index) const {
  StrategyProfile p(players());
  for (std::size_t i = players(); i-- > 0;) {
    p[i] = index % strategy_sets[i].size();
    index /= strategy_sets[i].size();
  }
  return p;
}

void FiniteGame::validate() const {
  if (strategy_sets.empty()) throw Error(ErrorCode::InvalidArgument, "game has no players");
  for (const auto& s : strategy_sets)
    if (s.empty()) throw Error(ErrorCode::InvalidArgument, "every strategy set must be nonempty");
  if (!payoff) throw Error(ErrorCode::InvalidArgument, "game has no payoff function");
}

void FiniteGame::validate(std::span<const std::size_t> profile) const {
  if (profile.size() != players()) throw Error(ErrorCode::BadDimensions, "profile length differs from player count");
  for (std::size_t i = 0; i < profile.size(); ++i)
    if (profile[i] >= strategy_sets[i].size())
      throw Error(ErrorCode::InvalidArgument, "strategy index out of range for player " + std::to_string(i));
}

FiniteGame make_bimatrix(std::vector<std::string> rows, std::vector<std::string> columns,
                         std::vector<std::vector<std::pair<double, double>>> table) {
  if (table.size() != rows.size()) throw Error(ErrorCode::BadDimensions, "table row count differs from labels");
  for (const auto& r : table)
    if (r.size() != columns.size()) throw Error(ErrorCode::BadDimensions, "table column count differs from labels");
  FiniteGame g;
  g.strategy_sets = {std::move(rows), std::move(columns)};
  g.payoff = [table = std::move(table)](std::span<const std::size_t> p) {
    const auto& [u1, u2] = table[p[0]][p[1]];
    return std::vector<double>{u1, u2};
  };
  return g;
}

double epsilon_of_profile(const FiniteGame& game, std::span<const std::size_t> profile) {
  game.validate();
  game.validate(profile);
  const auto base = game.payoff(profile);
  StrategyProfile dev(profile.begin(), profile.end());
  double eps = 0.0;
  for (std::size_t i = 0; i < game.players(); ++i) {
    for (std::size_t s = 0; s < game.strategy_sets[i].size(); ++s) {
      if (s == profile[i]) continue;
      dev[i] = s;
      eps = std::max(eps, game.payoff(dev)[i] - base[i]);
    }
    dev[i] = profile[i];
  }
  return eps;
}

std::vector<GameSolution> solve_nash_finite(const FiniteGame& game) {
  game.validate();
  const auto n = game.profile_count();
  std::vector<double> eps(n);
  parallel_for(n, [&](std::size_t k) { eps[k] = epsilon_of_profile(game, game.profile_at(k)); });
  std::vector<GameSolution> out;
  for (std::size_t k = 0; k < n; ++k) {
    if (eps[k] <= kPayoffTolerance) out.push_back({game.profile_at(k), SolutionConcept::Nash, eps[k]});
  }
  if (out.empty()) throw Error(ErrorCode::NoPureNash, "no pure-strategy profile is a Nash equilibrium");
  return out;
}

bool is_dominant_profile(const FiniteGame& game, std::span<const std::size_t> profile) {
  game.validate();
  game.validate(profile);
  const auto n = game.profile_count();
  for (std::size_t k = 0; k < n; ++k) {
    auto opp = game.profile_at(k);
    for (std::size_t i = 0; i < game.players(); ++i) {
      if (opp[i] != 0) continue;  // visit each opponent profile once per player
      auto mine = opp;
      mine[i] = profile[i];
      const double u = game.payoff(mine)[i];
      for (std::size_t s = 0; s < game.strategy_sets[i].size(); ++s) {
        mine[i] = s;
        if (game.payoff(mine)[i] > u + kPayoffTolerance) return false;
      }
    }
  }
  return true;
}

double bayesian_expected_payoff(const BayesianGame& game, const TypePrior& prior,
                                const BayesianStrategy& strategies, std::size_t player, std::size_t type_index) {
  const auto n = game.strategy_sets.size();
  if (!prior.independent)
    throw Error(ErrorCode::InvalidArgument, "interim expectations need an independent prior");
  if (prior.agent_count() != n || strategies.size() != n)
    throw Error(ErrorCode::BadDimensions, "prior, strategies and game disagree on player count");
  if (player >= n) throw Error(ErrorCode::InvalidArgument, "player index out of range");
  if (type_index >= prior.support[player].size())
    throw Error(ErrorCode::TypeOffSupport, "type index " + std::to_string(type_index) + " is off the support");
  for (std::size_t j = 0; j < n; ++j) {
    if (strategies[j].size() != prior.support[j].size())
      throw Error(ErrorCode::TypeOffSupport, "strategy of player " + std::to_string(j) + " is not total on its support");
    for (auto s : strategies[j])
      if (s >= game.strategy_sets[j].size()) throw Error(ErrorCode::InvalidArgument, "strategy index out of range");
  }

  StrategyProfile types(n, 0), actions(n, 0);
  types[player] = type_index;
  double expected = 0.0;
  // odometer over opponents' types
  while (true) {
    double w = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != player) w *= prior.weights[j][types[j]];
      actions[j] = strategies[j][types[j]];
    }
    if (w > 0.0) expected += w * game.payoff(types, actions)[player];
    std::size_t j = n;
    while (j-- > 0) {
      if (j == player) continue;
      if (++types[j] < prior.support[j].size()) break;
      types[j] = 0;
    }
    if (j == static_cast<std::size_t>(-1)) break;
  }
  return expected;
}

MarketOutcome clear_supply_function(const SupplyBidProfile& profile, double deficit) {
  const auto& b = profile.bids;
  for (double x : b)
    if (!(x >= 0.0)) throw Error(ErrorCode::InvalidArgument, "bids must be nonnegative");
  if (!(deficit > 0.0)) throw Error(ErrorCode::InvalidArgument, "deficit must be positive");
  const double total = std::accumulate(b.begin(), b.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroBidSum, "bids sum to zero; no clearing price");
  MarketOutcome out;
  const double price = deficit / total;
  out.prices = UniformPrice{price};
  out.allocations.resize(b.size());
  out.payments.resize(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    out.allocations[i] = b[i] * deficit / total;
    out.payments[i] = price * out.allocations[i];
  }
  out.supply = deficit;
  return out;
}

double shedding_payoff(std::span<const double> bids, double deficit, double beta, std::size_t agent) {
  const double total = std::accumulate(bids.begin(), bids.end(), 0.0);
  const double price = deficit / total;
  const double a = bids[agent] * deficit / total;
  return price * a - 0.5 * beta * a * a;
}

double supply_bid_epsilon(std::span<const double> bids, std::span<const double> betas, double deficit,
                          double b_max, std::size_t grid_points) {
  std::vector<double> trial(bids.begin(), bids.end());
  std::vector<double> gains(bids.size(), 0.0);
  for (std::size_t i = 0; i < bids.size(); ++i) {
    const double current = shedding_payoff(bids, deficit, betas[i], i);
    double others = 0.0;
    for (std::size_t j = 0; j < bids.size(); ++j)
      if (j != i) others += bids[j];
    const auto payoff = [&](double x) {
      if (x + others <= 0.0) return -std::numeric_limits<double>::infinity();
      trial[i] = x;
      return shedding_payoff(trial, deficit, betas[i], i);
    };
    const auto best = detail::grid_then_refine(payoff, 0.0, b_max, grid_points, 1e-12 * (1.0 + b_max));
    gains[i] = std::max(0.0, best.value - current);
    trial[i] = bids[i];
  }
  return *std::max_element(gains.begin(), gains.end());
}

SupplyGameResult supply_function_nash(std::span<const double> betas, double deficit, const SupplyGameConfig& config) {
  const auto n = betas.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "supply-function bidding needs at least two bidders");
  if (!(deficit > 0.0)) throw Error(ErrorCode::InvalidArgument, "deficit must be positive");
  for (double b : betas)
    if (!(b > 0.0)) throw Error(ErrorCode::InvalidArgument, "shedding cost slopes must be positive");
  if (n == 2)
    throw Error(ErrorCode::NotConverged,
                "two-bidder linear supply functions have no equilibrium with positive bids; the only fixed point "
                "of the best responses is b = 0, where the market cannot clear");
  if (!(config.damping > 0.0 && config.damping <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "damping must lie in (0, 1]");

  const double min_beta = *std::min_element(betas.begin(), betas.end());
  const double b_max = 10.0 * deficit / min_beta;
  std::vector<double> b(n), next(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = std::min(1.0 / betas[i], b_max);
  const double initial_scale = *std::max_element(b.begin(), b.end());

  // Best reply to opponents' total S maximizes (x - beta x^2 / 2) / (x + S)^2,
  // which peaks at x = S / (1 + beta S).
  std::size_t it = 0;
  bool fixed = false;
  for (; it < config.max_iterations && !fixed; ++it) {
    const double total = std::accumulate(b.begin(), b.end(), 0.0);
    double change = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double others = total - b[i];
      const double reply = std::clamp(others / (1.0 + betas[i] * others), 0.0, b_max);
      next[i] = (1.0 - config.damping) * b[i] + config.damping * reply;
      change = std::max(change, std::abs(next[i] - b[i]));
      scale = std::max(scale, next[i]);
    }
    b.swap(next);
    if (scale < 1e-9 * initial_scale)
      throw Error(ErrorCode::NotConverged,
                  "bids collapse toward zero; no equilibrium with positive bids");
    fixed = change <= config.tolerance * scale;
  }
  if (!fixed) throw Error(ErrorCode::NotConverged, "best-response iteration did not reach a fixed point");

  SupplyGameResult r;
  r.iterations = it;
  r.bids.bids = b;
  r.outcome = clear_supply_function(r.bids, deficit);
  const double eps = supply_bid_epsilon(b, betas, deficit, b_max, config.deviation_grid);
  if (eps > config.epsilon_target)
    throw Error(ErrorCode::NotConverged, "epsilon certificate " + std::to_string(eps) + " exceeds target");
  r.solution = {b, eps == 0.0 ? SolutionConcept::Nash : SolutionConcept::EpsilonNash, eps};

  double inv_beta_sum = 0.0;
  for (double beta : betas) inv_beta_sum += 1.0 / beta;
  r.efficient_welfare = -0.5 * deficit * deficit / inv_beta_sum;
  r.realized_welfare = 0.0;
  for (std::size_t i = 0; i < n; ++i) r.realized_welfare -= 0.5 * betas[i] * r.outcome.allocations[i] * r.outcome.allocations[i];
  return r;
}

SupplyGameResult supply_function_nash(const Scenario& scenario, const SupplyGameConfig& config) {
  if (!scenario.coordinator.deficit)
    throw Error(ErrorCode::ScenarioInvalid, "supply-function bidding needs a coordinator deficit");
  std::vector<double> betas;
  for (const auto& a : scenario.agents) betas.push_back(a.theta.beta);
  return supply_function_nash(betas, *scenario.coordinator.deficit, config);
}

}  // namespace tecoord
