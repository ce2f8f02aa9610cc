#include "tecoord/welfare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace tecoord {

namespace {

void check_feasible(const Scenario& scenario) {
  double lo = 0.0, hi = 0.0;
  for (const auto& a : scenario.agents) {
    lo += a.bounds.lo;
    hi += a.bounds.hi;
  }
  const auto& y = scenario.coordinator.supply_bounds;
  if (lo > y.hi || hi < y.lo) {
    std::ostringstream os;
    os << "agent boxes sum to [" << lo << ", " << hi << "] which misses the supply range [" << y.lo << ", "
       << y.hi << "]";
    throw Error(ErrorCode::Infeasible, os.str());
  }
}

std::vector<double> demands(const Scenario& scenario, double price) {
  std::vector<double> a(scenario.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = demand(price, scenario.agents[i]);
  return a;
}

// Root of the nonincreasing excess-demand curve.
double clearing_price(const Scenario& scenario, double tol) {
  check_feasible(scenario);
  const auto& cost = scenario.coordinator.cost;
  double min_alpha = std::numeric_limits<double>::infinity();
  double max_alpha = -min_alpha;
  double sum_max = 0.0;
  for (const auto& a : scenario.agents) {
    min_alpha = std::min(min_alpha, a.theta.alpha);
    max_alpha = std::max(max_alpha, a.theta.alpha);
    sum_max += a.bounds.hi;
  }
  double lo = std::min(cost.c1, min_alpha) - 1.0;
  double hi = max_alpha + cost.c2 * sum_max + 1.0;
  if (!std::isfinite(hi)) hi = std::max(max_alpha, cost.c1) + 1.0;

  // The bracket holds for interior boxes; widen it when the supply range
  // keeps the curve from changing sign inside.
  double e_lo = excess_demand(scenario, lo);
  double e_hi = excess_demand(scenario, hi);
  for (int grow = 0; e_lo < 0.0 && grow < 200; ++grow) {
    lo -= (hi - lo);
    e_lo = excess_demand(scenario, lo);
  }
  for (int grow = 0; e_hi > 0.0 && grow < 200; ++grow) {
    hi += (hi - lo);
    e_hi = excess_demand(scenario, hi);
  }
  if (e_lo < 0.0 || e_hi > 0.0) throw Error(ErrorCode::Infeasible, "excess demand never changes sign");
  if (e_lo == 0.0) return lo;
  if (e_hi == 0.0) return hi;

  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double e = excess_demand(scenario, mid);
    if (e > 0.0) {
      lo = mid;
      e_lo = e;
    } else if (e < 0.0) {
      hi = mid;
      e_hi = e;
    } else {
      return mid;
    }
  }
  // Excess demand is piecewise linear; interpolating the final bracket lands
  // on the exact root whenever no kink falls inside it.
  return lo + (hi - lo) * e_lo / (e_lo - e_hi);
}

// At a linear-cost clearing price the supply correspondence is the whole
// supply box, so pick the point that balances the market.
double balancing_supply(const Scenario& scenario, double price, double total_demand, double tol) {
  const auto& c = scenario.coordinator;
  if (c.cost.c2 == 0.0 && std::abs(price - c.cost.c1) <= tol) return c.supply_bounds.clamp(total_demand);
  return supply(price, c);
}

}  // namespace

double step_size(const StepRule& rule, std::size_t k) {
  const double kk = static_cast<double>(std::max<std::size_t>(k, 1));
  return std::visit(
      [kk](const auto& r) -> double {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, DiminishingStep>) return r.gamma0 / std::sqrt(kk);
        else if constexpr (std::is_same_v<R, HarmonicStep>) return r.gamma0 / kk;
        else return r.gamma0;
      },
      rule);
}

void SolverConfig::validate() const {
  if (!(price_tolerance > 0.0) || !(balance_tolerance > 0.0))
    throw Error(ErrorCode::InvalidArgument, "solver tolerances must be positive");
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be at least 1");
  const double g0 = std::visit([](const auto& r) { return r.gamma0; }, step_rule);
  if (!(g0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size gamma0 must be positive");
}

PrimalDualNotConverged::PrimalDualNotConverged(ConvergenceTrace trace)
    : Error(ErrorCode::NotConverged,
            "primal-dual iteration exhausted " + std::to_string(trace.iterations.size()) + " iterations"),
      trace_(std::move(trace)) {}

double social_welfare(const Scenario& scenario, std::span<const double> allocations, double supply_amount) {
  double w = -scenario.coordinator.cost(supply_amount);
  for (std::size_t i = 0; i < allocations.size(); ++i)
    w += utility_value(allocations[i], scenario.agents[i].theta);
  return w;
}

double excess_demand(const Scenario& scenario, double price) {
  double total = 0.0;
  for (const auto& a : scenario.agents) total += demand(price, a);
  return total - supply(price, scenario.coordinator);
}

WelfareOptimum solve_social_welfare(const Scenario& scenario, const SolverConfig& config) {
  config.validate();
  const double price = clearing_price(scenario, config.price_tolerance);
  WelfareOptimum opt;
  opt.allocations = demands(scenario, price);
  opt.multiplier = price;
  // the balance constraint defines y
  opt.supply = std::accumulate(opt.allocations.begin(), opt.allocations.end(), 0.0);
  opt.welfare = social_welfare(scenario, opt.allocations, opt.supply);
  return opt;
}

MarketOutcome clear_auction(const Scenario& scenario, const SolverConfig& config) {
  config.validate();
  const double price = clearing_price(scenario, config.price_tolerance);
  MarketOutcome out;
  out.allocations = demands(scenario, price);
  out.supply = balancing_supply(scenario, price, out.total_allocation(), config.price_tolerance);
  out.prices = UniformPrice{price};
  out.payments.resize(out.allocations.size());
  for (std::size_t i = 0; i < out.allocations.size(); ++i) out.payments[i] = -price * out.allocations[i];
  return out;
}

ConvergenceTrace run_primal_dual(const Scenario& scenario, const SolverConfig& config) {
  config.validate();
  ConvergenceTrace trace;
  double price = config.initial_price;
  for (std::size_t k = 1; k <= config.max_iterations; ++k) {
    const auto a = demands(scenario, price);
    const double total = std::accumulate(a.begin(), a.end(), 0.0);
    const double y = supply(price, scenario.coordinator);
    const double imbalance = total - y;
    trace.iterations.push_back({k, price, total, y, imbalance});
    if (std::abs(imbalance) <= config.balance_tolerance) {
      trace.converged = true;
      trace.final.allocations = a;
      trace.final.supply = y;
      trace.final.prices = UniformPrice{price};
      trace.final.payments.resize(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) trace.final.payments[i] = -price * a[i];
      return trace;
    }
    price += step_size(config.step_rule, k) * imbalance;
  }
  const auto& last = trace.iterations.back();
  trace.final.allocations = demands(scenario, last.price);
  trace.final.supply = last.supply;
  trace.final.prices = UniformPrice{last.price};
  trace.final.payments.resize(scenario.size());
  for (std::size_t i = 0; i < scenario.size(); ++i)
    trace.final.payments[i] = -last.price * trace.final.allocations[i];
  throw PrimalDualNotConverged(std::move(trace));
}

EquilibriumCheck verify_competitive_equilibrium(const MarketOutcome& outcome, const Scenario& scenario,
                                                double tol) {
  const double price = outcome.uniform_price();
  EquilibriumCheck check;
  check.agents_optimal = outcome.allocations.size() == scenario.size();
  for (std::size_t i = 0; check.agents_optimal && i < scenario.size(); ++i)
    check.agents_optimal = std::abs(outcome.allocations[i] - demand(price, scenario.agents[i])) <= tol;

  const auto& c = scenario.coordinator;
  const double y = outcome.supply;
  if (c.cost.c2 > 0.0) {
    check.supply_optimal = std::abs(y - supply(price, c)) <= tol;
  } else {
    // linear cost: compare profits, the maximizer need not be unique
    const double best = supply(price, c);
    const auto profit = [&](double q) { return price * q - c.cost(q); };
    check.supply_optimal = c.supply_bounds.contains(y) && profit(y) >= profit(best) - tol;
  }
  check.balanced = std::abs(outcome.total_allocation() - y) <= tol;
  return check;
}

}  // namespace tecoord
