#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "tecoord/error.hpp"
#include "tecoord/model.hpp"

namespace fixtures {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline tecoord::Scenario make_scenario(const std::vector<tecoord::Theta>& thetas, tecoord::Interval box,
                                       tecoord::QuadraticCost cost = {0.0, 1.0},
                                       tecoord::Interval supply = {0.0, 100.0},
                                       std::optional<double> capacity = std::nullopt) {
  tecoord::Scenario s;
  for (std::size_t i = 0; i < thetas.size(); ++i)
    s.agents.push_back({static_cast<int>(i + 1), thetas[i], box});
  s.coordinator.cost = cost;
  s.coordinator.supply_bounds = supply;
  s.coordinator.capacity = capacity;
  return s;
}

/// theta = [(10,1), (8,1)], boxes [0,10], C(y) = y^2 / 2, supply [0,100].
inline tecoord::Scenario canonical(std::optional<double> capacity = std::nullopt) {
  return make_scenario({{10, 1}, {8, 1}}, {0, 10}, {0, 1}, {0, 100}, capacity);
}

/// Uniform two-point prior {alpha - spread, alpha + spread} per agent.
inline tecoord::TypePrior two_point_prior(const tecoord::Scenario& s, double spread) {
  tecoord::TypePrior p;
  for (const auto& a : s.agents) {
    p.support.push_back({{a.theta.alpha - spread, a.theta.beta}, {a.theta.alpha + spread, a.theta.beta}});
    p.weights.push_back({0.5, 0.5});
  }
  return p;
}

}  // namespace fixtures

/// Checks that `expr` throws tecoord::Error carrying `expected_code`.
#define CHECK_THROWS_CODE(expr, expected_code)                        \
  do {                                                                \
    bool thrown_ = false;                                             \
    try {                                                             \
      (void)(expr);                                                   \
    } catch (const tecoord::Error& e_) {                              \
      thrown_ = true;                                                 \
      CHECK_MESSAGE(e_.code() == (expected_code), e_.what());         \
    }                                                                 \
    CHECK_MESSAGE(thrown_, "expected tecoord::Error from " #expr);    \
  } while (false)
