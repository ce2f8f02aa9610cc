#include "tecoord/stackelberg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "search.hpp"
#include "tecoord/error.hpp"
#include "tecoord/parallel.hpp"

namespace tecoord {

namespace {

double total_demand(const Scenario& scenario, double price) {
  double total = 0.0;
  for (const auto& a : scenario.agents) total += demand(price, a);
  return total;
}

bool within_capacity(const Scenario& scenario, double price) {
  const auto& cap = scenario.coordinator.capacity;
  return !cap || total_demand(scenario, price) <= *cap;
}

}  // namespace

double leader_payoff(const Scenario& scenario, LeaderObjective objective, double price) {
  const auto& cost = scenario.coordinator.cost;
  double y = 0.0, utility = 0.0;
  for (const auto& agent : scenario.agents) {
    const double a = demand(price, agent);
    y += a;
    utility += utility_value(a, agent.theta);
  }
  switch (objective) {
    case LeaderObjective::Profit: return price * y - cost(y);
    case LeaderObjective::Welfare: return utility - cost(y);
  }
  return 0.0;
}

StackelbergSolution solve_price_stackelberg(const Scenario& scenario, LeaderObjective objective,
                                            const StackelbergConfig& config) {
  scenario.validate();
  double hi = 0.0;
  for (const auto& a : scenario.agents) hi = std::max(hi, a.theta.alpha);
  if (!within_capacity(scenario, hi))
    throw Error(ErrorCode::InfeasibleCapacity, "minimum demands exceed the capacity at every price");

  // Demand is nonincreasing in price, so the feasible prices form [floor, hi].
  double floor = 0.0;
  if (!within_capacity(scenario, 0.0)) {
    double lo = 0.0, up = hi;
    for (int i = 0; i < 200 && up - lo > 0.0; ++i) {
      const double mid = 0.5 * (lo + up);
      if (mid <= lo || mid >= up) break;
      (within_capacity(scenario, mid) ? up : lo) = mid;
    }
    floor = up;
  }

  StackelbergSolution sol;
  const std::size_t points = std::max<std::size_t>(config.grid_points, 2);
  const double h = hi > 0.0 ? hi / static_cast<double>(points - 1) : 0.0;
  sol.scan.resize(hi > 0.0 ? points : 1);
  parallel_for(sol.scan.size(), [&](std::size_t k) {
    const double price = k + 1 == sol.scan.size() ? hi : h * static_cast<double>(k);
    sol.scan[k] = {price, leader_payoff(scenario, objective, price), price >= floor};
  });

  double best_price = floor;
  double best_value = leader_payoff(scenario, objective, floor);
  for (const auto& p : sol.scan) {
    if (p.feasible && (p.payoff > best_value || (p.payoff == best_value && p.price < best_price))) {
      best_price = p.price;
      best_value = p.payoff;
    }
  }
  if (h > 0.0) {
    const auto f = [&](double price) { return leader_payoff(scenario, objective, price); };
    const auto refined = detail::golden_section_max(f, std::max(best_price - h, floor), std::min(best_price + h, hi),
                                                    config.refine_tolerance);
    if (refined.value > best_value) {
      best_price = refined.x;
      best_value = refined.value;
    }
  }

  sol.price = best_price;
  sol.leader_payoff = best_value;
  auto& out = sol.outcome;
  out.prices = UniformPrice{best_price};
  for (const auto& a : scenario.agents) {
    out.allocations.push_back(demand(best_price, a));
    out.payments.push_back(-best_price * out.allocations.back());
  }
  out.supply = out.total_allocation();
  return sol;
}

TeamPoint solve_team_problem(const AgentSpec& agent, const LeaderPayoff& payoff, const TeamAxis& allocations,
                             const TeamAxis& prices, const TeamConfig& config) {
  validate(agent);
  const auto& A = allocations.range;
  const auto& L = prices.range;
  if (!A.bounded() || !L.bounded() || A.lo > A.hi || L.lo > L.hi)
    throw Error(ErrorCode::UnboundedTeam, "team boxes must be finite, ordered intervals");
  const std::size_t n = std::max<std::size_t>(config.grid_points, 2);

  const auto axis = [n](const Interval& r, std::size_t k) {
    return k + 1 == n ? r.hi : r.lo + r.width() * static_cast<double>(k) / static_cast<double>(n - 1);
  };
  TeamPoint best{A.lo, L.lo, payoff(A.lo, L.lo)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = axis(A, i), p = axis(L, j);
      const double v = payoff(a, p);
      if (v > best.value) best = {a, p, v};
    }
  }

  double ha = A.width() / static_cast<double>(n - 1);
  double hp = L.width() / static_cast<double>(n - 1);
  constexpr int kLocal = 10;  // local grid is (2 * kLocal + 1)^2
  for (std::size_t pass = 0; pass < config.refine_passes; ++pass) {
    const TeamPoint centre = best;
    for (int i = -kLocal; i <= kLocal; ++i) {
      const double a = A.clamp(centre.allocation + ha * i / kLocal);
      for (int j = -kLocal; j <= kLocal; ++j) {
        const double p = L.clamp(centre.price + hp * j / kLocal);
        const double v = payoff(a, p);
        if (v > best.value) best = {a, p, v};
      }
    }
    ha *= 0.5;
    hp *= 0.5;
  }

  const bool on_open_side = (allocations.open_below && best.allocation == A.lo) ||
                            (allocations.open_above && best.allocation == A.hi) ||
                            (prices.open_below && best.price == L.lo) || (prices.open_above && best.price == L.hi);
  if (on_open_side)
    throw Error(ErrorCode::UnboundedTeam, "team optimum sits on a side where the domain is unbounded");
  return best;
}

double best_response(const IncentivePricing& pricing, const AgentSpec& agent, std::size_t grid_points) {
  if (!agent.bounds.bounded()) throw Error(ErrorCode::InvalidArgument, "best response needs a bounded box");
  const auto f = [&](double a) { return follower_payoff(agent, a, pricing(a)); };
  return detail::grid_then_refine(f, agent.bounds.lo, agent.bounds.hi, grid_points,
                                  1e-12 * (1.0 + agent.bounds.width()))
      .x;
}

bool verify_incentive_controllable(const IncentivePricing& pricing, const AgentSpec& agent, double tol) {
  const double a = best_response(pricing, agent);
  return std::abs(a - pricing.team_allocation) <= tol &&
         std::abs(pricing(a) - pricing.team_price) <= tol * std::abs(pricing.slope) + tol;
}

IncentivePricing construct_linear_incentive(const AgentSpec& agent, double team_allocation, double team_price) {
  validate(agent);
  const double grad_a = marginal_utility(team_allocation, agent.theta) - team_price;
  const double grad_price = -team_allocation;
  const double scale = 1.0 + std::abs(agent.theta.alpha) + std::abs(team_price);
  if (std::abs(grad_a) <= 1e-12 * scale)
    throw Error(ErrorCode::GradientDegenerate, "follower payoff is stationary in the allocation at the team point");
  // The upper contour set {U >= c} is bounded by price = (V(a) - c) / a,
  // strictly concave exactly when c > 0.
  if (!(follower_payoff(agent, team_allocation, team_price) > 0.0))
    throw Error(ErrorCode::NotIncentiveControllable,
                "follower payoff at the team point is not positive; contour set not strictly convex");

  const IncentivePricing pricing{team_allocation, team_price, grad_a / grad_price};
  // Induced payoff V(a) - price(a) * a has curvature slope - beta / 2.
  if (!(pricing.slope < 0.5 * agent.theta.beta))
    throw Error(ErrorCode::NotIncentiveControllable, "induced follower problem is not concave");
  if (!verify_incentive_controllable(pricing, agent, 1e-4))
    throw Error(ErrorCode::NotIncentiveControllable, "follower best response leaves the team allocation");
  return pricing;
}

ReverseStackelbergSolution solve_reverse_stackelberg(const AgentSpec& agent, const LeaderPayoff& payoff,
                                                     const TeamAxis& allocations, const TeamAxis& prices,
                                                     const TeamConfig& config) {
  ReverseStackelbergSolution sol;
  sol.team = solve_team_problem(agent, payoff, allocations, prices, config);
  sol.pricing = construct_linear_incentive(agent, sol.team.allocation, sol.team.price);
  sol.response = best_response(sol.pricing, agent);
  sol.leader_value = payoff(sol.response, sol.pricing(sol.response));
  sol.follower_value = follower_payoff(agent, sol.response, sol.pricing(sol.response));
  return sol;
}

}  // namespace tecoord
