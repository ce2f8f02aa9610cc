#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace tecoord {

/// Closed interval [lo, hi].  Either end may be infinite.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double clamp(double x) const noexcept { return x < lo ? lo : (x > hi ? hi : x); }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  bool bounded() const noexcept;
  double width() const noexcept { return hi - lo; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Agent type: marginal utility of consumption is alpha - beta * a.
struct Theta {
  double alpha = 0.0;
  double beta = 1.0;

  friend bool operator==(const Theta&, const Theta&) = default;
};

struct AgentSpec {
  int id = 1;
  Theta theta;
  Interval bounds;

  friend bool operator==(const AgentSpec&, const AgentSpec&) = default;
};

/// C(y) = c1 * y + c2 * y^2 / 2
struct QuadraticCost {
  double c1 = 0.0;
  double c2 = 0.0;

  double operator()(double y) const noexcept { return c1 * y + 0.5 * c2 * y * y; }
  double marginal(double y) const noexcept { return c1 + c2 * y; }

  friend bool operator==(const QuadraticCost&, const QuadraticCost&) = default;
};

struct CoordinatorSpec {
  QuadraticCost cost;
  Interval supply_bounds;
  std::optional<double> capacity;  // energy limit per period
  std::optional<double> deficit;   // shedding target for supply-function markets

  friend bool operator==(const CoordinatorSpec&, const CoordinatorSpec&) = default;
};

/// Independent discrete prior over each agent's type.
struct TypePrior {
  std::vector<std::vector<Theta>> support;   // support[i] lists agent i's types
  std::vector<std::vector<double>> weights;  // weights[i][k] = P(theta_i = support[i][k])
  bool independent = true;

  std::size_t agent_count() const noexcept { return support.size(); }

  friend bool operator==(const TypePrior&, const TypePrior&) = default;
};

struct Scenario {
  std::vector<AgentSpec> agents;
  CoordinatorSpec coordinator;
  std::optional<TypePrior> prior;

  std::size_t size() const noexcept { return agents.size(); }

  /// Throws Error(ScenarioInvalid) naming the first violated invariant.
  void validate() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

void validate(const AgentSpec& agent);
void validate(const CoordinatorSpec& coordinator);
void validate(const TypePrior& prior, std::size_t agent_count);

struct UniformPrice {
  double value = 0.0;
  friend bool operator==(const UniformPrice&, const UniformPrice&) = default;
};

using PerAgentPrices = std::vector<double>;
using Prices = std::variant<UniformPrice, PerAgentPrices>;

/// Allocations, supply, prices and payments.  payments[i] is money paid TO
/// agent i, so consuming agents carry negative payments.
struct MarketOutcome {
  std::vector<double> allocations;
  double supply = 0.0;
  Prices prices = UniformPrice{};
  std::vector<double> payments;

  double total_allocation() const noexcept;
  double imbalance() const noexcept { return total_allocation() - supply; }
  /// Uniform price, or throws InvalidArgument for per-agent pricing.
  double uniform_price() const;
};

// ---------------------------------------------------------------------------
// Quadratic utility family

/// V(a; theta) = alpha * a - beta * a^2 / 2
inline double utility_value(double a, const Theta& theta) noexcept {
  return theta.alpha * a - 0.5 * theta.beta * a * a;
}

inline double marginal_utility(double a, const Theta& theta) noexcept {
  return theta.alpha - theta.beta * a;
}

/// Price-taking demand: argmax over the agent's box of V(a) - price * a.
double demand(double price, const AgentSpec& agent) noexcept;

/// Price-taking supply: argmax over the supply box of price * y - C(y).
/// For a linear cost (c2 == 0) the bound on the profitable side is returned;
/// an exact price tie returns y_min.  Throws DegenerateSupply when the
/// relevant bound is infinite.
double supply(double price, const CoordinatorSpec& coordinator);

// ---------------------------------------------------------------------------
// Information structure

/// Directed graph over nodes 0..nodes-1 (node 0 is the coordinator).
struct Digraph {
  std::size_t nodes = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // (from, to), sorted

  bool has_edge(std::size_t from, std::size_t to) const noexcept;
  bool acyclic() const;

  friend bool operator==(const Digraph&, const Digraph&) = default;
};

using Stages = std::vector<std::vector<std::size_t>>;

struct InformationStructure {
  Digraph type_graph;
  Digraph decision_graph;
  Stages stages;
};

/// knowledge[i][j] == true means node i knows theta_j; that draws j -> i.
Digraph build_type_graph(const std::vector<std::vector<bool>>& knowledge);

/// Edge j -> i for every pair with stage(i) > stage(j).  The stages must
/// partition {0, ..., n-1} where n is the total number of listed ids.
Digraph build_decision_graph(const Stages& stages);

InformationStructure make_information_structure(const std::vector<std::vector<bool>>& knowledge,
                                                const Stages& stages);

}  // namespace tecoord
