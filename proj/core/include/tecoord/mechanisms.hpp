#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tecoord/games.hpp"
#include "tecoord/model.hpp"

namespace tecoord {

// ---------------------------------------------------------------------------
// Allocation models
//
// Every mechanism here pairs an own-allocation valuation V_i(a_i; theta_i)
// with an oracle for the welfare-maximizing feasible allocation.  Agents can
// be switched off (present[i] == false) so the same oracle computes the
// Clarke pivot, the best welfare of everyone else.

struct AllocationModel {
  std::function<double(std::size_t agent, double a, const Theta& type)> value;
  std::function<std::vector<double>(std::span<const Theta> reports, std::span<const bool> present)> allocate;
};

/// Quadratic utilities under boxes and the optional shared capacity.
AllocationModel quadratic_model(const Scenario& scenario);

/// One indivisible unit: V_i = alpha_i * a_i with a_i in {0, 1}.  The highest
/// positive report wins; ties go to the lowest index.
AllocationModel single_item_model();

struct WaterFill {
  std::vector<double> allocations;
  double multiplier = 0.0;  // shadow price of the capacity, 0 when slack
};

/// argmax sum V_i(a_i) s.t. sum a_i <= capacity and the boxes, solved exactly
/// on the piecewise-linear KKT curve.  Absent agents receive 0.
WaterFill water_fill(std::span<const Theta> types, std::span<const Interval> boxes, std::optional<double> capacity,
                     std::span<const bool> present = {});

double reported_welfare(const AllocationModel& model, std::span<const Theta> reports, std::span<const double> a,
                        std::optional<std::size_t> skip = std::nullopt);

// ---------------------------------------------------------------------------
// Direct mechanisms

/// Message spaces are type grids; outcome maps a report profile to
/// allocations and payments (payments[i] is money TO agent i).  Agent i with
/// true type theta gets value(i, a_i, theta) + t_i.
struct DirectMechanism {
  std::string name;
  std::vector<std::vector<Theta>> message_space;
  std::function<MarketOutcome(std::span<const Theta> reports)> outcome;
  std::function<double(std::size_t agent, double a, const Theta& type)> value;

  std::size_t agents() const noexcept { return message_space.size(); }
  double payoff(std::size_t agent, const MarketOutcome& out, const Theta& true_type) const {
    return value(agent, out.allocations[agent], true_type) + out.payments[agent];
  }
};

/// Efficient allocation with Clarke-pivot transfers:
/// t_i = sum_{j != i} V_j(a*_j) - max welfare of the others without i.
MarketOutcome vcg_outcome(std::span<const Theta> reports, const AllocationModel& model);
MarketOutcome vcg_outcome(std::span<const Theta> reports, const Scenario& scenario);

/// Expected-externality (d'AGVA) transfers: each agent receives the expected
/// welfare of the others given its report, minus an equal share of everyone
/// else's expected externality, so transfers sum to zero identically.
MarketOutcome dagva_outcome(std::span<const Theta> reports, const TypePrior& prior, const AllocationModel& model);
MarketOutcome dagva_outcome(std::span<const Theta> reports, const TypePrior& prior, const Scenario& scenario);
MarketOutcome dagva_outcome(std::span<const Theta> reports, const Scenario& scenario);

/// Expected welfare of everyone but `agent` when it reports `report` and the
/// others' types follow the prior.
double expected_externality(std::size_t agent, const Theta& report, const TypePrior& prior,
                            const AllocationModel& model);

DirectMechanism make_vcg_mechanism(AllocationModel model, std::vector<std::vector<Theta>> message_space);
/// Message space is the prior's support.
DirectMechanism make_dagva_mechanism(AllocationModel model, const TypePrior& prior);
/// Efficient allocation, each agent pays its declared value of its share.
DirectMechanism make_pay_your_bid_mechanism(AllocationModel model, std::vector<std::vector<Theta>> message_space);
/// Reports are ignored.
DirectMechanism make_constant_mechanism(std::vector<double> allocations, std::vector<double> payments,
                                        std::vector<std::vector<Theta>> message_space,
                                        std::function<double(std::size_t, double, const Theta&)> value);

/// {alpha/2, alpha, 3 alpha/2} at the agent's beta, per agent.
std::vector<std::vector<Theta>> default_type_grid(const Scenario& scenario);

// ---------------------------------------------------------------------------
// Scalar-strategy VCG

/// Declared utilities sigma * ln(a + 1): strictly concave and increasing for
/// sigma > 0, and sigma = g * (a + 1) reproduces any marginal g > 0 at a.
struct SSVCGFamily {
  std::string shape = "shifted-log";
  std::size_t deviation_grid = 10000;

  double value(double a, double sigma) const;
  double marginal(double a, double sigma) const;
  double sigma_for_marginal(double a, double marginal) const;
};

struct SSVCGConfig {
  double damping = 0.5;
  std::size_t max_iterations = 100000;
  double tolerance = 1e-13;  // relative change in sigma
};

struct SSVCGResult {
  std::vector<double> sigma;
  MarketOutcome outcome;
  GameSolution solution;
  std::vector<double> efficient_allocation;
  double allocation_error = 0.0;  // max |a(sigma) - a*|
  std::size_t iterations = 0;
};

/// Allocation maximizing the declared utilities under capacity and boxes.
std::vector<double> ssvcg_allocate(std::span<const double> sigma, const SSVCGFamily& family,
                                   std::span<const Interval> boxes, std::optional<double> capacity,
                                   std::span<const bool> present = {});

/// Clarke-pivot transfers on the declared utilities.
MarketOutcome ssvcg_outcome(std::span<const double> sigma, const SSVCGFamily& family, const Scenario& scenario);

/// Damped fixed-point iteration matching declared to true marginals, then a
/// deviation-grid epsilon certificate.  The declared family is increasing,
/// so the capacity must bind at the efficient allocation
/// (CapacityNotBinding otherwise).
SSVCGResult ssvcg_solve(const Scenario& scenario, const SSVCGFamily& family = {}, const SSVCGConfig& config = {});

/// Largest gain any agent can get by changing its sigma alone.
double ssvcg_epsilon(std::span<const double> sigma, const SSVCGFamily& family, const Scenario& scenario);

// ---------------------------------------------------------------------------
// Property checkers

enum class MechanismProperty { ICDominant, ICBayesian, BudgetBalance, InterimIR, Dictatorial };

std::string_view to_string(MechanismProperty p) noexcept;

enum class BalanceKind { Exact, Weak, Violated };

std::string_view to_string(BalanceKind b) noexcept;

/// Counterexample.  Indices refer to the grids the checker enumerated;
/// `profile` holds opponents' report indices (agent's own slot included and
/// left at 0) or, for budget balance, the full report profile.
struct Witness {
  std::optional<std::size_t> agent;
  std::optional<std::size_t> true_type;
  std::optional<std::size_t> misreport;
  std::vector<std::size_t> profile;
  double value = 0.0;  // gain, budget surplus, or interim payoff
  std::string description;
};

struct MechanismReport {
  MechanismProperty property = MechanismProperty::ICDominant;
  bool holds = false;
  std::optional<Witness> witness;
  double extreme = 0.0;  // max gain, max |sum t|, or min interim payoff
  std::optional<BalanceKind> balance;
  std::optional<std::size_t> dictator;
  std::size_t evaluations = 0;
};

inline constexpr double kGainTolerance = 1e-9;

/// Every (agent, true type, misreport, opponent reports) tuple; holds iff no
/// misreport gains more than 1e-9.  The witness is the first violating tuple
/// in that lexicographic order.
MechanismReport check_ic_dominant(const DirectMechanism& mechanism, const std::vector<std::vector<Theta>>& true_types);

/// Interim expected payoffs with truthful opponents drawn from the prior.
MechanismReport check_ic_bayesian(const DirectMechanism& mechanism, const TypePrior& prior);

/// Sum of transfers over every report profile in the message space.
MechanismReport check_budget_balance(const DirectMechanism& mechanism);

/// Interim expected payoff of truthful play is at least -1e-9 for every
/// agent and type.
MechanismReport check_interim_ir(const DirectMechanism& mechanism, const TypePrior& prior);

/// choice[p] is the outcome chosen at profile p; rankings[p][i] is agent i's
/// ranking at profile p, best first.  Holds iff some agent's top outcome is
/// chosen at every profile; the lowest such index is reported.
MechanismReport check_dictatorial(std::span<const std::size_t> choice,
                                  const std::vector<std::vector<std::vector<std::size_t>>>& rankings);

}  // namespace tecoord
