#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tecoord/model.hpp"

namespace tecoord {

/// Ranges for the random scenario generator.  Types are drawn uniformly from
/// the alpha and beta ranges; each agent's box is [0, 2 alpha / beta].
struct CorpusShape {
  std::size_t min_agents = 2;
  std::size_t max_agents = 3;
  double alpha_lo = 4.0, alpha_hi = 16.0;
  double beta_lo = 0.5, beta_hi = 2.0;
  double c1_lo = 0.0, c1_hi = 2.0;
  double c2_lo = 0.5, c2_hi = 2.0;
  /// Capacity as a fraction of the unconstrained total demand at price 0;
  /// 0 leaves the capacity out.
  double capacity_fraction = 0.6;
  /// Shedding deficit as a fraction of the same total; 0 leaves it out.
  double deficit_fraction = 0.25;
  /// Uniform two-point prior {(1 - s) alpha, (1 + s) alpha} at the true beta;
  /// 0 leaves the prior out.
  double prior_spread = 0.25;
};

/// Deterministic in (seed, count, shape) on every platform: draws come from
/// mt19937_64 and are mapped to [0, 1) by the top 53 bits.
std::vector<Scenario> generate_corpus(std::uint64_t seed, std::size_t count, const CorpusShape& shape = {});

/// Writes scenario_0001.json, scenario_0002.json, ... into `dir` and returns
/// the paths in order.
std::vector<std::filesystem::path> write_corpus(const std::vector<Scenario>& corpus,
                                                const std::filesystem::path& dir);

}  // namespace tecoord
