#include "tecoord/corpus.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "tecoord/error.hpp"
#include "tecoord/scenario_io.hpp"

namespace tecoord {

namespace {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : engine_(seed) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Four decimals keep the files readable without changing their meaning.
  double in(double lo, double hi) { return std::round((lo + (hi - lo) * unit()) * 1e4) / 1e4; }
  std::size_t count(std::size_t lo, std::size_t hi) { return lo + engine_() % (hi - lo + 1); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

std::vector<Scenario> generate_corpus(std::uint64_t seed, std::size_t count, const CorpusShape& shape) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "corpus count must be at least 1");
  if (shape.min_agents < 1 || shape.min_agents > shape.max_agents)
    throw Error(ErrorCode::InvalidArgument, "agent-count range is empty");
  Draw draw(seed);
  std::vector<Scenario> corpus;
  corpus.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    Scenario sc;
    const auto n = draw.count(shape.min_agents, shape.max_agents);
    double unconstrained = 0.0, ceiling = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      AgentSpec a;
      a.id = static_cast<int>(i + 1);
      a.theta = {draw.in(shape.alpha_lo, shape.alpha_hi), draw.in(shape.beta_lo, shape.beta_hi)};
      a.bounds = {0.0, 2.0 * a.theta.alpha / a.theta.beta};
      unconstrained += a.theta.alpha / a.theta.beta;
      ceiling += a.bounds.hi;
      sc.agents.push_back(a);
    }
    auto& co = sc.coordinator;
    co.cost = {draw.in(shape.c1_lo, shape.c1_hi), draw.in(shape.c2_lo, shape.c2_hi)};
    co.supply_bounds = {0.0, ceiling};
    if (shape.capacity_fraction > 0.0) co.capacity = shape.capacity_fraction * unconstrained;
    if (shape.deficit_fraction > 0.0) co.deficit = shape.deficit_fraction * unconstrained;
    if (shape.prior_spread > 0.0) {
      TypePrior prior;
      for (const auto& a : sc.agents) {
        const auto& t = a.theta;
        prior.support.push_back({{(1.0 - shape.prior_spread) * t.alpha, t.beta},
                                 {(1.0 + shape.prior_spread) * t.alpha, t.beta}});
        prior.weights.push_back({0.5, 0.5});
      }
      sc.prior = std::move(prior);
    }
    sc.validate();
    corpus.push_back(std::move(sc));
  }
  return corpus;
}

std::vector<std::filesystem::path> write_corpus(const std::vector<Scenario>& corpus,
                                                const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "scenario_%04zu.json", k + 1);
    paths.push_back(dir / name);
    save_scenario(corpus[k], paths.back());
  }
  return paths;
}

}  // namespace tecoord
