#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "tecoord/error.hpp"
#include "tecoord/model.hpp"

namespace tecoord {

/// gamma(k) = gamma0 / sqrt(k)
struct DiminishingStep {
  double gamma0 = 0.5;
};

/// gamma(k) = gamma0 / k
struct HarmonicStep {
  double gamma0 = 0.5;
};

/// gamma(k) = gamma0
struct ConstantStep {
  double gamma0 = 0.5;
};

using StepRule = std::variant<DiminishingStep, HarmonicStep, ConstantStep>;

double step_size(const StepRule& rule, std::size_t k);

struct SolverConfig {
  double price_tolerance = 1e-8;
  double balance_tolerance = 1e-6;
  std::size_t max_iterations = 100000;
  StepRule step_rule = DiminishingStep{0.5};
  double initial_price = 0.0;

  void validate() const;
};

struct WelfareOptimum {
  std::vector<double> allocations;
  double supply = 0.0;
  double multiplier = 0.0;  // shadow price of the balance constraint
  double welfare = 0.0;
};

struct IterationRecord {
  std::size_t k = 0;
  double price = 0.0;  // price the row's demand and supply were computed at
  double total_demand = 0.0;
  double supply = 0.0;
  double imbalance = 0.0;
};

struct ConvergenceTrace {
  std::vector<IterationRecord> iterations;
  bool converged = false;
  MarketOutcome final;
};

/// Thrown by run_primal_dual when the iteration budget runs out.
class PrimalDualNotConverged : public Error {
 public:
  explicit PrimalDualNotConverged(ConvergenceTrace trace);
  const ConvergenceTrace& trace() const noexcept { return trace_; }

 private:
  ConvergenceTrace trace_;
};

/// Sum of agent utilities minus the supply cost.
double social_welfare(const Scenario& scenario, std::span<const double> allocations, double supply);

/// Sum of price-taking demands minus supply; nonincreasing in price.
double excess_demand(const Scenario& scenario, double price);

/// Welfare-maximizing allocation with the balance multiplier, by bisection
/// on the price.  Throws Infeasible when the boxes cannot balance.
WelfareOptimum solve_social_welfare(const Scenario& scenario, const SolverConfig& config = {});

/// One-shot auction: agents report demand curves, the coordinator picks the
/// uniform price that balances them against its supply curve.
MarketOutcome clear_auction(const Scenario& scenario, const SolverConfig& config = {});

/// Iterative price adjustment driven by the observed imbalance.
ConvergenceTrace run_primal_dual(const Scenario& scenario, const SolverConfig& config = {});

struct EquilibriumCheck {
  bool agents_optimal = false;
  bool supply_optimal = false;
  bool balanced = false;

  bool holds() const noexcept { return agents_optimal && supply_optimal && balanced; }
};

EquilibriumCheck verify_competitive_equilibrium(const MarketOutcome& outcome, const Scenario& scenario,
                                                double tol);

}  // namespace tecoord
