#include "tecoord/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "tecoord/error.hpp"

namespace tecoord {

namespace {

[[noreturn]] void invalid(const std::string& reason) { throw Error(ErrorCode::ScenarioInvalid, reason); }

}  // namespace

bool Interval::bounded() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }

double MarketOutcome::total_allocation() const noexcept {
  return std::accumulate(allocations.begin(), allocations.end(), 0.0);
}

double MarketOutcome::uniform_price() const {
  if (const auto* p = std::get_if<UniformPrice>(&prices)) return p->value;
  throw Error(ErrorCode::InvalidArgument, "outcome carries per-agent prices");
}

void validate(const AgentSpec& agent) {
  const auto who = "agent " + std::to_string(agent.id);
  if (!std::isfinite(agent.theta.alpha)) invalid(who + ": alpha must be finite");
  if (!(agent.theta.beta > 0.0) || !std::isfinite(agent.theta.beta))
    invalid(who + ": beta must be strictly positive");
  if (!(agent.bounds.lo >= 0.0)) invalid(who + ": a_min must be nonnegative");
  if (!(agent.bounds.lo <= agent.bounds.hi)) invalid(who + ": a_min exceeds a_max");
}

void validate(const CoordinatorSpec& coordinator) {
  if (!std::isfinite(coordinator.cost.c1)) invalid("coordinator: c1 must be finite");
  if (!(coordinator.cost.c2 >= 0.0) || !std::isfinite(coordinator.cost.c2))
    invalid("coordinator: c2 must be nonnegative");
  if (!(coordinator.supply_bounds.lo <= coordinator.supply_bounds.hi))
    invalid("coordinator: y_min exceeds y_max");
  if (coordinator.capacity && !(*coordinator.capacity > 0.0))
    invalid("coordinator: capacity must be positive");
  if (coordinator.deficit && !(*coordinator.deficit > 0.0))
    invalid("coordinator: deficit must be positive");
}

void validate(const TypePrior& prior, std::size_t agent_count) {
  if (prior.support.size() != agent_count || prior.weights.size() != agent_count)
    invalid("prior: expected one support and weight list per agent");
  for (std::size_t i = 0; i < agent_count; ++i) {
    const auto who = "prior for agent " + std::to_string(i + 1);
    if (prior.support[i].empty()) invalid(who + ": empty support");
    if (prior.support[i].size() != prior.weights[i].size())
      invalid(who + ": support and weights differ in length");
    double total = 0.0;
    for (double w : prior.weights[i]) {
      if (!(w >= 0.0)) invalid(who + ": negative weight");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) invalid(who + ": weights do not sum to 1");
    for (const auto& t : prior.support[i]) {
      if (!std::isfinite(t.alpha) || !(t.beta > 0.0)) invalid(who + ": support type violates beta > 0");
    }
  }
}

void Scenario::validate() const {
  if (agents.empty()) invalid("scenario needs at least one agent");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].id != static_cast<int>(i + 1)) {
      std::ostringstream os;
      os << "agent ids must be contiguous 1..N; position " << i + 1 << " has id " << agents[i].id;
      invalid(os.str());
    }
    tecoord::validate(agents[i]);
  }
  tecoord::validate(coordinator);
  if (prior) tecoord::validate(*prior, agents.size());
}

double demand(double price, const AgentSpec& agent) noexcept {
  return agent.bounds.clamp((agent.theta.alpha - price) / agent.theta.beta);
}

double supply(double price, const CoordinatorSpec& coordinator) {
  const auto& box = coordinator.supply_bounds;
  const auto& cost = coordinator.cost;
  if (cost.c2 > 0.0) return box.clamp((price - cost.c1) / cost.c2);
  const double y = price > cost.c1 ? box.hi : box.lo;
  if (!std::isfinite(y))
    throw Error(ErrorCode::DegenerateSupply, "linear cost with unbounded supply has no finite maximizer");
  return y;
}

bool Digraph::has_edge(std::size_t from, std::size_t to) const noexcept {
  return std::binary_search(edges.begin(), edges.end(), std::pair{from, to});
}

bool Digraph::acyclic() const {
  // Kahn's algorithm.
  std::vector<std::size_t> indegree(nodes, 0);
  for (const auto& [from, to] : edges) ++indegree[to];
  std::vector<std::size_t> ready;
  for (std::size_t v = 0; v < nodes; ++v)
    if (indegree[v] == 0) ready.push_back(v);
  std::size_t visited = 0;
  while (!ready.empty()) {
    const auto v = ready.back();
    ready.pop_back();
    ++visited;
    for (const auto& [from, to] : edges) {
      if (from == v && --indegree[to] == 0) ready.push_back(to);
    }
  }
  return visited == nodes;
}

Digraph build_type_graph(const std::vector<std::vector<bool>>& knowledge) {
  const auto n = knowledge.size();
  for (const auto& row : knowledge) {
    if (row.size() != n) throw Error(ErrorCode::BadDimensions, "knowledge matrix must be square");
  }
  if (n == 0) throw Error(ErrorCode::BadDimensions, "knowledge matrix is empty");
  Digraph g{n, {}};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && knowledge[i][j]) g.edges.emplace_back(j, i);
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

Digraph build_decision_graph(const Stages& stages) {
  std::size_t n = 0;
  for (const auto& s : stages) n += s.size();
  std::vector<std::size_t> stage_of(n, n);
  for (std::size_t m = 0; m < stages.size(); ++m) {
    for (auto id : stages[m]) {
      if (id >= n) throw Error(ErrorCode::NotAPartition, "node id " + std::to_string(id) + " out of range");
      if (stage_of[id] != n) throw Error(ErrorCode::NotAPartition, "node " + std::to_string(id) + " appears twice");
      stage_of[id] = m;
    }
  }
  Digraph g{n, {}};
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (stage_of[i] > stage_of[j]) g.edges.emplace_back(j, i);
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

InformationStructure make_information_structure(const std::vector<std::vector<bool>>& knowledge,
                                                const Stages& stages) {
  InformationStructure info{build_type_graph(knowledge), build_decision_graph(stages), stages};
  if (info.type_graph.nodes != info.decision_graph.nodes)
    throw Error(ErrorCode::BadDimensions, "knowledge matrix and stage partition disagree on node count");
  return info;
}

}  // namespace tecoord
