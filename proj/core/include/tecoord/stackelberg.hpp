#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "tecoord/model.hpp"

namespace tecoord {

// ---------------------------------------------------------------------------
// Price-setting leader

enum class LeaderObjective {
  Profit,   // price * sum(a) - C(sum(a))
  Welfare,  // sum V_i(a_i) - C(sum(a))
};

struct ScanPoint {
  double price = 0.0;
  double payoff = 0.0;
  bool feasible = true;  // sum of responses within capacity
};

struct StackelbergSolution {
  double price = 0.0;
  MarketOutcome outcome;
  double leader_payoff = 0.0;
  std::vector<ScanPoint> scan;
};

struct StackelbergConfig {
  std::size_t grid_points = 100001;
  double refine_tolerance = 1e-8;
};

/// Leader payoff when followers answer `price` with their demands.
double leader_payoff(const Scenario& scenario, LeaderObjective objective, double price);

/// Scans prices on [0, max alpha], keeps those whose total demand respects
/// the capacity, and refines the best cell by golden section.  Throws
/// InfeasibleCapacity when no price in range meets the capacity.
StackelbergSolution solve_price_stackelberg(const Scenario& scenario, LeaderObjective objective,
                                            const StackelbergConfig& config = {});

// ---------------------------------------------------------------------------
// Pricing-function leader (single follower)

using LeaderPayoff = std::function<double(double allocation, double price)>;

/// One axis of the team-problem box.  The flags mark a side where the true
/// domain continues past the searched range.
struct TeamAxis {
  Interval range;
  bool open_below = false;
  bool open_above = false;
};

struct TeamPoint {
  double allocation = 0.0;
  double price = 0.0;
  double value = 0.0;
};

struct TeamConfig {
  std::size_t grid_points = 200;  // per axis
  std::size_t refine_passes = 40;
};

/// Joint maximizer of the leader payoff over allocation x price boxes:
/// a 200 x 200 grid then shrinking local grids.  Ties go to the smallest
/// allocation, then the smallest price.  Throws UnboundedTeam when the best
/// point sits on an open side.
TeamPoint solve_team_problem(const AgentSpec& agent, const LeaderPayoff& payoff, const TeamAxis& allocations,
                             const TeamAxis& prices, const TeamConfig& config = {});

/// price(a) = team_price - slope * (a - team_allocation)
struct IncentivePricing {
  double team_allocation = 0.0;
  double team_price = 0.0;
  double slope = 0.0;

  double operator()(double a) const noexcept { return team_price - slope * (a - team_allocation); }
};

/// Follower payoff V(a) - price * a.
inline double follower_payoff(const AgentSpec& agent, double a, double price) noexcept {
  return utility_value(a, agent.theta) - price * a;
}

/// Follower's best allocation under a pricing function: 10^5-point grid over
/// the agent's box plus golden-section refinement.
double best_response(const IncentivePricing& pricing, const AgentSpec& agent, std::size_t grid_points = 100001);

/// Affine pricing tangent to the follower's indifference curve at the team
/// point.  Throws GradientDegenerate when the follower's allocation gradient
/// vanishes there and NotIncentiveControllable when the contour set is not
/// strictly convex or the induced response misses the team point.
IncentivePricing construct_linear_incentive(const AgentSpec& agent, double team_allocation, double team_price);

/// True iff the follower's best response lands on the team allocation and
/// the realized price matches the team price, both within tol.
bool verify_incentive_controllable(const IncentivePricing& pricing, const AgentSpec& agent, double tol);

struct ReverseStackelbergSolution {
  TeamPoint team;
  IncentivePricing pricing;
  double response = 0.0;       // follower's best response under pricing
  double leader_value = 0.0;   // leader payoff at (response, pricing(response))
  double follower_value = 0.0;
};

/// Team problem, tangent pricing and the follower's induced response.
ReverseStackelbergSolution solve_reverse_stackelberg(const AgentSpec& agent, const LeaderPayoff& payoff,
                                                     const TeamAxis& allocations, const TeamAxis& prices,
                                                     const TeamConfig& config = {});

}  // namespace tecoord
