#include "tecoord/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include "search.hpp"
#include "tecoord/error.hpp"
#include "tecoord/parallel.hpp"

namespace tecoord {

namespace {

std::vector<bool> everyone(std::size_t n, std::span<const bool> present) {
  if (present.empty()) return std::vector<bool>(n, true);
  if (present.size() != n) throw Error(ErrorCode::BadDimensions, "presence mask length differs from agent count");
  return {present.begin(), present.end()};
}

// std::vector<bool> has no contiguous storage, so masks travel as bool arrays.
struct Mask {
  std::unique_ptr<bool[]> bits;
  std::size_t n;
  explicit Mask(std::size_t size) : bits(new bool[size]), n(size) { std::fill_n(bits.get(), n, true); }
  bool& operator[](std::size_t i) { return bits[i]; }
  std::span<const bool> span() const { return {bits.get(), n}; }
};

std::vector<Interval> boxes_of(const Scenario& scenario) {
  std::vector<Interval> boxes;
  for (const auto& a : scenario.agents) boxes.push_back(a.bounds);
  return boxes;
}

std::vector<Theta> types_of(const Scenario& scenario) {
  std::vector<Theta> t;
  for (const auto& a : scenario.agents) t.push_back(a.theta);
  return t;
}

Prices per_unit_charges(const std::vector<double>& a, const std::vector<double>& t) {
  // t_i = -price_i * a_i, matching the uniform-price convention
  PerAgentPrices p(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != 0.0) p[i] = -t[i] / a[i];
  return p;
}

std::size_t product_size(const std::vector<std::vector<Theta>>& space, std::optional<std::size_t> skip) {
  std::size_t n = 1;
  for (std::size_t j = 0; j < space.size(); ++j)
    if (!skip || j != *skip) n *= space[j].size();
  return n;
}

// Mixed-radix decoding over every agent except `skip`; agent 0 is the most
// significant digit.  The skipped slot is left at 0.
std::vector<std::size_t> decode(std::size_t index, const std::vector<std::size_t>& sizes,
                                std::optional<std::size_t> skip) {
  std::vector<std::size_t> digits(sizes.size(), 0);
  for (std::size_t j = sizes.size(); j-- > 0;) {
    if (skip && j == *skip) continue;
    digits[j] = index % sizes[j];
    index /= sizes[j];
  }
  return digits;
}

std::vector<std::size_t> sizes_of(const std::vector<std::vector<Theta>>& space) {
  std::vector<std::size_t> s;
  for (const auto& m : space) s.push_back(m.size());
  return s;
}

void require_prior(const TypePrior& prior, std::size_t n) {
  if (!prior.independent) throw Error(ErrorCode::PriorRequired, "an independent prior is required");
  if (prior.agent_count() != n) throw Error(ErrorCode::BadDimensions, "prior and mechanism disagree on agent count");
}

double prior_weight(const TypePrior& prior, const std::vector<std::size_t>& idx, std::size_t skip) {
  double w = 1.0;
  for (std::size_t j = 0; j < idx.size(); ++j)
    if (j != skip) w *= prior.weights[j][idx[j]];
  return w;
}

std::string describe_misreport(std::size_t agent, const Theta& truth, const Theta& lie, double gain) {
  std::ostringstream os;
  os.precision(17);
  os << "agent " << agent + 1 << " with type (" << truth.alpha << ", " << truth.beta << ") gains " << gain
     << " by reporting (" << lie.alpha << ", " << lie.beta << ")";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Allocation models

WaterFill water_fill(std::span<const Theta> types, std::span<const Interval> boxes, std::optional<double> capacity,
                     std::span<const bool> present) {
  const auto n = types.size();
  if (boxes.size() != n) throw Error(ErrorCode::BadDimensions, "one box per agent required");
  const auto in = everyone(n, present);
  const auto at = [&](double mu, std::size_t i) { return boxes[i].clamp((types[i].alpha - mu) / types[i].beta); };
  const auto total = [&](double mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (in[i]) s += at(mu, i);
    return s;
  };

  double mu = 0.0;
  if (capacity) {
    const double cap = *capacity;
    double floor_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (in[i]) floor_sum += boxes[i].lo;
    if (floor_sum > cap) throw Error(ErrorCode::Infeasible, "minimum allocations exceed the capacity");
    double prev_s = total(0.0);
    if (prev_s > cap) {
      // Between consecutive kinks the total is linear in mu.
      std::vector<double> kinks;
      for (std::size_t i = 0; i < n; ++i) {
        if (!in[i]) continue;
        for (double b : {boxes[i].hi, boxes[i].lo}) {
          const double k = types[i].alpha - types[i].beta * b;
          if (std::isfinite(k) && k > 0.0) kinks.push_back(k);
        }
      }
      std::sort(kinks.begin(), kinks.end());
      double prev_mu = 0.0;
      for (double k : kinks) {
        const double s = total(k);
        if (s <= cap) {
          mu = prev_mu + (k - prev_mu) * (prev_s - cap) / (prev_s - s);
          break;
        }
        prev_mu = k;
        prev_s = s;
      }
    }
  }
  WaterFill r;
  r.multiplier = mu;
  r.allocations.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (in[i]) r.allocations[i] = at(mu, i);
  return r;
}

AllocationModel quadratic_model(const Scenario& scenario) {
  AllocationModel m;
  m.value = [](std::size_t, double a, const Theta& t) { return utility_value(a, t); };
  m.allocate = [boxes = boxes_of(scenario), cap = scenario.coordinator.capacity](std::span<const Theta> reports,
                                                                                  std::span<const bool> present) {
    return water_fill(reports, boxes, cap, present).allocations;
  };
  return m;
}

AllocationModel single_item_model() {
  AllocationModel m;
  m.value = [](std::size_t, double a, const Theta& t) { return t.alpha * a; };
  m.allocate = [](std::span<const Theta> reports, std::span<const bool> present) {
    const auto in = everyone(reports.size(), present);
    std::vector<double> a(reports.size(), 0.0);
    std::optional<std::size_t> winner;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (in[i] && reports[i].alpha > 0.0 && (!winner || reports[i].alpha > reports[*winner].alpha)) winner = i;
    }
    if (winner) a[*winner] = 1.0;
    return a;
  };
  return m;
}

double reported_welfare(const AllocationModel& model, std::span<const Theta> reports, std::span<const double> a,
                        std::optional<std::size_t> skip) {
  double w = 0.0;
  for (std::size_t j = 0; j < reports.size(); ++j)
    if (!skip || j != *skip) w += model.value(j, a[j], reports[j]);
  return w;
}

// ---------------------------------------------------------------------------
// VCG and d'AGVA

MarketOutcome vcg_outcome(std::span<const Theta> reports, const AllocationModel& model) {
  const auto n = reports.size();
  Mask present(n);
  MarketOutcome out;
  out.allocations = model.allocate(reports, present.span());
  out.payments.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    present[i] = false;
    const auto without = model.allocate(reports, present.span());
    present[i] = true;
    out.payments[i] = reported_welfare(model, reports, out.allocations, i) - reported_welfare(model, reports, without, i);
  }
  out.supply = out.total_allocation();
  out.prices = per_unit_charges(out.allocations, out.payments);
  return out;
}

MarketOutcome vcg_outcome(std::span<const Theta> reports, const Scenario& scenario) {
  if (reports.size() != scenario.size()) throw Error(ErrorCode::BadDimensions, "one report per agent required");
  return vcg_outcome(reports, quadratic_model(scenario));
}

double expected_externality(std::size_t agent, const Theta& report, const TypePrior& prior,
                            const AllocationModel& model) {
  const auto n = prior.agent_count();
  std::vector<std::size_t> sizes;
  for (const auto& s : prior.support) sizes.push_back(s.size());
  const auto count = product_size(prior.support, agent);
  std::vector<Theta> profile(n);
  Mask present(n);
  double expected = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const auto idx = decode(k, sizes, agent);
    for (std::size_t j = 0; j < n; ++j) profile[j] = j == agent ? report : prior.support[j][idx[j]];
    const double w = prior_weight(prior, idx, agent);
    if (w == 0.0) continue;
    const auto a = model.allocate(profile, present.span());
    expected += w * reported_welfare(model, profile, a, agent);
  }
  return expected;
}

namespace {

void check_dagva_inputs(std::span<const Theta> reports, const TypePrior& prior) {
  if (reports.size() < 2) throw Error(ErrorCode::NeedTwoAgents, "expected-externality transfers need two agents");
  require_prior(prior, reports.size());
}

MarketOutcome dagva_from_externalities(std::span<const Theta> reports, const AllocationModel& model,
                                       const std::vector<double>& xi) {
  const auto n = reports.size();
  const double total = std::accumulate(xi.begin(), xi.end(), 0.0);
  const double share = 1.0 / static_cast<double>(n - 1);
  MarketOutcome out;
  out.allocations = model.allocate(reports, Mask(n).span());
  out.payments.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.payments[i] = xi[i] - share * (total - xi[i]);
  out.supply = out.total_allocation();
  out.prices = per_unit_charges(out.allocations, out.payments);
  return out;
}

}  // namespace

MarketOutcome dagva_outcome(std::span<const Theta> reports, const TypePrior& prior, const AllocationModel& model) {
  check_dagva_inputs(reports, prior);
  std::vector<double> xi(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) xi[i] = expected_externality(i, reports[i], prior, model);
  return dagva_from_externalities(reports, model, xi);
}

MarketOutcome dagva_outcome(std::span<const Theta> reports, const TypePrior& prior, const Scenario& scenario) {
  if (reports.size() != scenario.size()) throw Error(ErrorCode::BadDimensions, "one report per agent required");
  return dagva_outcome(reports, prior, quadratic_model(scenario));
}

MarketOutcome dagva_outcome(std::span<const Theta> reports, const Scenario& scenario) {
  if (!scenario.prior) throw Error(ErrorCode::PriorRequired, "scenario carries no type prior");
  return dagva_outcome(reports, *scenario.prior, scenario);
}

DirectMechanism make_vcg_mechanism(AllocationModel model, std::vector<std::vector<Theta>> message_space) {
  DirectMechanism m;
  m.name = "vcg";
  m.message_space = std::move(message_space);
  m.value = model.value;
  m.outcome = [model = std::move(model)](std::span<const Theta> reports) { return vcg_outcome(reports, model); };
  return m;
}

DirectMechanism make_dagva_mechanism(AllocationModel model, const TypePrior& prior) {
  const auto n = prior.agent_count();
  if (n < 2) throw Error(ErrorCode::NeedTwoAgents, "expected-externality transfers need two agents");
  require_prior(prior, n);
  // Externalities of every support point are fixed by the prior; tabulate them.
  auto table = std::make_shared<std::vector<std::vector<double>>>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& t : prior.support[i]) (*table)[i].push_back(expected_externality(i, t, prior, model));

  DirectMechanism m;
  m.name = "dagva";
  m.message_space = prior.support;
  m.value = model.value;
  m.outcome = [model = std::move(model), prior, table](std::span<const Theta> reports) {
    check_dagva_inputs(reports, prior);
    std::vector<double> xi(reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& s = prior.support[i];
      const auto hit = std::find(s.begin(), s.end(), reports[i]);
      xi[i] = hit != s.end() ? (*table)[i][static_cast<std::size_t>(hit - s.begin())]
                             : expected_externality(i, reports[i], prior, model);
    }
    return dagva_from_externalities(reports, model, xi);
  };
  return m;
}

DirectMechanism make_pay_your_bid_mechanism(AllocationModel model, std::vector<std::vector<Theta>> message_space) {
  DirectMechanism m;
  m.name = "pay-your-bid";
  m.message_space = std::move(message_space);
  m.value = model.value;
  m.outcome = [model = std::move(model)](std::span<const Theta> reports) {
    MarketOutcome out;
    out.allocations = model.allocate(reports, Mask(reports.size()).span());
    out.payments.resize(reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i)
      out.payments[i] = -model.value(i, out.allocations[i], reports[i]);
    out.supply = out.total_allocation();
    out.prices = per_unit_charges(out.allocations, out.payments);
    return out;
  };
  return m;
}

DirectMechanism make_constant_mechanism(std::vector<double> allocations, std::vector<double> payments,
                                        std::vector<std::vector<Theta>> message_space,
                                        std::function<double(std::size_t, double, const Theta&)> value) {
  if (allocations.size() != payments.size() || allocations.size() != message_space.size())
    throw Error(ErrorCode::BadDimensions, "constant mechanism needs one allocation and payment per agent");
  MarketOutcome fixed;
  fixed.allocations = std::move(allocations);
  fixed.payments = std::move(payments);
  fixed.supply = fixed.total_allocation();
  fixed.prices = per_unit_charges(fixed.allocations, fixed.payments);
  DirectMechanism m;
  m.name = "constant";
  m.message_space = std::move(message_space);
  m.value = std::move(value);
  m.outcome = [fixed = std::move(fixed)](std::span<const Theta>) { return fixed; };
  return m;
}

std::vector<std::vector<Theta>> default_type_grid(const Scenario& scenario) {
  std::vector<std::vector<Theta>> grid;
  for (const auto& a : scenario.agents) {
    const auto& t = a.theta;
    grid.push_back({{0.5 * t.alpha, t.beta}, {t.alpha, t.beta}, {1.5 * t.alpha, t.beta}});
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Scalar-strategy VCG

namespace {

void check_family(const SSVCGFamily& family) {
  if (family.shape != "shifted-log")
    throw Error(ErrorCode::InvalidArgument, "unknown declared-utility family '" + family.shape + "'");
}

}  // namespace

double SSVCGFamily::value(double a, double sigma) const { return sigma * std::log1p(a); }

double SSVCGFamily::marginal(double a, double sigma) const { return sigma / (1.0 + a); }

double SSVCGFamily::sigma_for_marginal(double a, double marginal_value) const { return marginal_value * (1.0 + a); }

std::vector<double> ssvcg_allocate(std::span<const double> sigma, const SSVCGFamily& family,
                                   std::span<const Interval> boxes, std::optional<double> capacity,
                                   std::span<const bool> present) {
  check_family(family);
  const auto n = sigma.size();
  if (boxes.size() != n) throw Error(ErrorCode::BadDimensions, "one box per agent required");
  const auto in = everyone(n, present);
  // marginal sigma / (1 + a) equals the shared price mu
  const auto at = [&](double mu, std::size_t i) {
    return sigma[i] > 0.0 ? boxes[i].clamp(sigma[i] / mu - 1.0) : boxes[i].lo;
  };
  std::vector<double> a(n, 0.0);
  double floor_sum = 0.0, ceiling_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i]) continue;
    floor_sum += boxes[i].lo;
    ceiling_sum += sigma[i] > 0.0 ? boxes[i].hi : boxes[i].lo;
  }
  if (capacity && floor_sum > *capacity) throw Error(ErrorCode::Infeasible, "minimum allocations exceed the capacity");
  if (!capacity || ceiling_sum <= *capacity) {
    if (!std::isfinite(ceiling_sum))
      throw Error(ErrorCode::InvalidArgument, "increasing declared utilities need a capacity or bounded boxes");
    for (std::size_t i = 0; i < n; ++i)
      if (in[i]) a[i] = sigma[i] > 0.0 ? boxes[i].hi : boxes[i].lo;
    return a;
  }

  const double cap = *capacity;
  const auto total = [&](double mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (in[i]) s += at(mu, i);
    return s;
  };
  double mu_hi = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (in[i] && sigma[i] > 0.0) mu_hi = std::max(mu_hi, sigma[i] / (1.0 + boxes[i].lo));
  double mu_lo = mu_hi;
  for (int k = 0; k < 2000 && total(mu_lo) <= cap; ++k) mu_lo *= 0.5;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (mu_lo + mu_hi);
    if (mid <= mu_lo || mid >= mu_hi) break;
    (total(mid) > cap ? mu_lo : mu_hi) = mid;
  }
  double mu = 0.5 * (mu_lo + mu_hi);
  // Close the gap exactly on the active set found by bisection.
  double fixed = 0.0, weight = 0.0, active = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i]) continue;
    const double raw = sigma[i] > 0.0 ? sigma[i] / mu - 1.0 : -std::numeric_limits<double>::infinity();
    if (raw > boxes[i].lo && raw < boxes[i].hi) {
      weight += sigma[i];
      active += 1.0;
    } else {
      fixed += at(mu, i);
    }
  }
  if (weight > 0.0) {
    const double exact = weight / (cap - fixed + active);
    if (exact > 0.0 && std::abs(exact - mu) <= 1e-9 * mu) mu = exact;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (in[i]) a[i] = at(mu, i);
  return a;
}

MarketOutcome ssvcg_outcome(std::span<const double> sigma, const SSVCGFamily& family, const Scenario& scenario) {
  const auto n = scenario.size();
  if (sigma.size() != n) throw Error(ErrorCode::BadDimensions, "one sigma per agent required");
  const auto boxes = boxes_of(scenario);
  const auto cap = scenario.coordinator.capacity;
  Mask present(n);
  MarketOutcome out;
  out.allocations = ssvcg_allocate(sigma, family, boxes, cap, present.span());
  const auto declared = [&](const std::vector<double>& a, std::size_t skip) {
    double w = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != skip) w += family.value(a[j], sigma[j]);
    return w;
  };
  out.payments.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    present[i] = false;
    const auto without = ssvcg_allocate(sigma, family, boxes, cap, present.span());
    present[i] = true;
    out.payments[i] = declared(out.allocations, i) - declared(without, i);
  }
  out.supply = out.total_allocation();
  out.prices = per_unit_charges(out.allocations, out.payments);
  return out;
}

double ssvcg_epsilon(std::span<const double> sigma, const SSVCGFamily& family, const Scenario& scenario) {
  const auto n = scenario.size();
  const auto boxes = boxes_of(scenario);
  const auto cap = scenario.coordinator.capacity;
  const double sigma_max = 2.0 * *std::max_element(sigma.begin(), sigma.end()) + 1.0;
  std::vector<double> gains(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> trial(sigma.begin(), sigma.end());
    // Clarke pivot does not depend on sigma_i, so it drops out of the gain.
    const auto payoff = [&](double s) {
      trial[i] = s;
      const auto a = ssvcg_allocate(trial, family, boxes, cap);
      double u = utility_value(a[i], scenario.agents[i].theta);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) u += family.value(a[j], trial[j]);
      return u;
    };
    const double current = payoff(sigma[i]);
    const auto best = detail::grid_then_refine(payoff, 0.0, sigma_max, family.deviation_grid, 1e-12 * sigma_max);
    gains[i] = std::max(0.0, best.value - current);
  });
  return *std::max_element(gains.begin(), gains.end());
}

SSVCGResult ssvcg_solve(const Scenario& scenario, const SSVCGFamily& family, const SSVCGConfig& config) {
  scenario.validate();
  check_family(family);
  const auto n = scenario.size();
  const auto boxes = boxes_of(scenario);
  const auto types = types_of(scenario);
  const auto cap = scenario.coordinator.capacity;
  const auto efficient = water_fill(types, boxes, cap);
  if (!(efficient.multiplier > 0.0))
    throw Error(ErrorCode::CapacityNotBinding,
                "capacity does not bind at the efficient allocation; increasing declared utilities cannot match it");

  SSVCGResult r;
  r.efficient_allocation = efficient.allocations;
  std::vector<double> sigma(n), next(n);
  for (std::size_t i = 0; i < n; ++i)
    sigma[i] = family.sigma_for_marginal(boxes[i].lo, std::max(0.0, marginal_utility(boxes[i].lo, types[i])));

  bool fixed = false;
  std::size_t it = 0;
  for (; it < config.max_iterations && !fixed; ++it) {
    const auto a = ssvcg_allocate(sigma, family, boxes, cap);
    double change = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double target = family.sigma_for_marginal(a[i], std::max(0.0, marginal_utility(a[i], types[i])));
      next[i] = (1.0 - config.damping) * sigma[i] + config.damping * target;
      change = std::max(change, std::abs(next[i] - sigma[i]));
      scale = std::max(scale, next[i]);
    }
    sigma.swap(next);
    fixed = change <= config.tolerance * (1.0 + scale);
  }
  if (!fixed) throw Error(ErrorCode::NotConverged, "declared-marginal iteration did not reach a fixed point");

  r.iterations = it;
  r.sigma = sigma;
  r.outcome = ssvcg_outcome(sigma, family, scenario);
  for (std::size_t i = 0; i < n; ++i)
    r.allocation_error = std::max(r.allocation_error, std::abs(r.outcome.allocations[i] - efficient.allocations[i]));
  const double eps = ssvcg_epsilon(sigma, family, scenario);
  r.solution = {sigma, eps == 0.0 ? SolutionConcept::Nash : SolutionConcept::EpsilonNash, eps};
  return r;
}

// ---------------------------------------------------------------------------
// Checkers

std::string_view to_string(MechanismProperty p) noexcept {
  switch (p) {
    case MechanismProperty::ICDominant: return "ic-dominant";
    case MechanismProperty::ICBayesian: return "ic-bayesian";
    case MechanismProperty::BudgetBalance: return "budget-balance";
    case MechanismProperty::InterimIR: return "interim-ir";
    case MechanismProperty::Dictatorial: return "dictatorial";
  }
  return "unknown";
}

std::string_view to_string(BalanceKind b) noexcept {
  switch (b) {
    case BalanceKind::Exact: return "exact";
    case BalanceKind::Weak: return "weak";
    case BalanceKind::Violated: return "violated";
  }
  return "unknown";
}

namespace {

struct TaskResult {
  double extreme = -std::numeric_limits<double>::infinity();
  std::optional<Witness> witness;
  std::size_t evaluations = 0;
};

MechanismReport reduce(MechanismProperty property, std::vector<TaskResult>& tasks) {
  MechanismReport rep;
  rep.property = property;
  rep.extreme = tasks.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  for (auto& t : tasks) {
    rep.extreme = std::max(rep.extreme, t.extreme);
    rep.evaluations += t.evaluations;
    if (!rep.witness && t.witness) rep.witness = std::move(t.witness);
  }
  rep.holds = !rep.witness;
  return rep;
}

}  // namespace

MechanismReport check_ic_dominant(const DirectMechanism& mech, const std::vector<std::vector<Theta>>& true_types) {
  const auto n = mech.agents();
  if (true_types.size() != n) throw Error(ErrorCode::BadDimensions, "one true-type grid per agent required");
  const auto sizes = sizes_of(mech.message_space);
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < true_types[i].size(); ++k) jobs.emplace_back(i, k);

  std::vector<TaskResult> results(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t job) {
    const auto [i, k] = jobs[job];
    const auto& truth = true_types[i][k];
    auto& res = results[job];
    const auto opponents = product_size(mech.message_space, i);
    std::vector<Theta> reports(n);
    const auto fill = [&](std::size_t o) {
      const auto idx = decode(o, sizes, i);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) reports[j] = mech.message_space[j][idx[j]];
      return idx;
    };
    std::vector<double> honest(opponents);
    for (std::size_t o = 0; o < opponents; ++o) {
      fill(o);
      reports[i] = truth;
      honest[o] = mech.payoff(i, mech.outcome(reports), truth);
      ++res.evaluations;
    }
    for (std::size_t m = 0; m < sizes[i]; ++m) {
      for (std::size_t o = 0; o < opponents; ++o) {
        auto idx = fill(o);
        reports[i] = mech.message_space[i][m];
        const double gain = mech.payoff(i, mech.outcome(reports), truth) - honest[o];
        ++res.evaluations;
        res.extreme = std::max(res.extreme, gain);
        if (gain > kGainTolerance && !res.witness)
          res.witness = Witness{i, k, m, std::move(idx), gain, describe_misreport(i, truth, reports[i], gain)};
      }
    }
  });
  return reduce(MechanismProperty::ICDominant, results);
}

namespace {

// Interim expected payoff of agent i holding `truth` and reporting `report`
// while the others report their prior-drawn types.
double interim_payoff(const DirectMechanism& mech, const TypePrior& prior, std::size_t i, const Theta& truth,
                      const Theta& report, std::size_t& evaluations) {
  const auto n = mech.agents();
  std::vector<std::size_t> sizes;
  for (const auto& s : prior.support) sizes.push_back(s.size());
  const auto count = product_size(prior.support, i);
  std::vector<Theta> reports(n);
  double expected = 0.0;
  for (std::size_t o = 0; o < count; ++o) {
    const auto idx = decode(o, sizes, i);
    const double w = prior_weight(prior, idx, i);
    if (w == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) reports[j] = j == i ? report : prior.support[j][idx[j]];
    expected += w * mech.payoff(i, mech.outcome(reports), truth);
    ++evaluations;
  }
  return expected;
}

}  // namespace

MechanismReport check_ic_bayesian(const DirectMechanism& mech, const TypePrior& prior) {
  const auto n = mech.agents();
  require_prior(prior, n);
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < prior.support[i].size(); ++k) jobs.emplace_back(i, k);
  std::vector<TaskResult> results(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t job) {
    const auto [i, k] = jobs[job];
    const auto& truth = prior.support[i][k];
    auto& res = results[job];
    const double honest = interim_payoff(mech, prior, i, truth, truth, res.evaluations);
    for (std::size_t m = 0; m < mech.message_space[i].size(); ++m) {
      const auto& lie = mech.message_space[i][m];
      const double gain = interim_payoff(mech, prior, i, truth, lie, res.evaluations) - honest;
      res.extreme = std::max(res.extreme, gain);
      if (gain > kGainTolerance && !res.witness)
        res.witness = Witness{i, k, m, {}, gain, "interim: " + describe_misreport(i, truth, lie, gain)};
    }
  });
  return reduce(MechanismProperty::ICBayesian, results);
}

MechanismReport check_budget_balance(const DirectMechanism& mech) {
  const auto sizes = sizes_of(mech.message_space);
  const auto count = product_size(mech.message_space, std::nullopt);
  std::vector<double> sums(count);
  parallel_for(count, [&](std::size_t p) {
    const auto idx = decode(p, sizes, std::nullopt);
    std::vector<Theta> reports(sizes.size());
    for (std::size_t j = 0; j < sizes.size(); ++j) reports[j] = mech.message_space[j][idx[j]];
    const auto out = mech.outcome(reports);
    sums[p] = std::accumulate(out.payments.begin(), out.payments.end(), 0.0);
  });

  MechanismReport rep;
  rep.property = MechanismProperty::BudgetBalance;
  rep.evaluations = count;
  double max_sum = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < count; ++p) {
    rep.extreme = std::max(rep.extreme, std::abs(sums[p]));
    max_sum = std::max(max_sum, sums[p]);
    if (sums[p] > kGainTolerance && !rep.witness) {
      std::ostringstream os;
      os.precision(17);
      os << "transfers sum to " << sums[p] << " > 0";
      rep.witness = Witness{std::nullopt, std::nullopt, std::nullopt, decode(p, sizes, std::nullopt), sums[p], os.str()};
    }
  }
  rep.balance = rep.extreme <= kGainTolerance ? BalanceKind::Exact
                : max_sum <= kGainTolerance  ? BalanceKind::Weak
                                             : BalanceKind::Violated;
  rep.holds = rep.balance != BalanceKind::Violated;
  return rep;
}

MechanismReport check_interim_ir(const DirectMechanism& mech, const TypePrior& prior) {
  const auto n = mech.agents();
  require_prior(prior, n);
  MechanismReport rep;
  rep.property = MechanismProperty::InterimIR;
  rep.extreme = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < prior.support[i].size(); ++k) {
      const auto& truth = prior.support[i][k];
      const double u = interim_payoff(mech, prior, i, truth, truth, rep.evaluations);
      rep.extreme = std::min(rep.extreme, u);
      if (u < -kGainTolerance && !rep.witness) {
        std::ostringstream os;
        os.precision(17);
        os << "agent " << i + 1 << " expects " << u << " from truthful participation";
        rep.witness = Witness{i, k, std::nullopt, {}, u, os.str()};
      }
    }
  }
  rep.holds = !rep.witness;
  return rep;
}

MechanismReport check_dictatorial(std::span<const std::size_t> choice,
                                  const std::vector<std::vector<std::vector<std::size_t>>>& rankings) {
  if (choice.size() != rankings.size() || choice.empty())
    throw Error(ErrorCode::BadDimensions, "one choice and one ranking profile per type profile required");
  const auto n = rankings.front().size();
  MechanismReport rep;
  rep.property = MechanismProperty::Dictatorial;
  std::vector<std::size_t> counterexample(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    bool dictates = true;
    for (std::size_t p = 0; p < choice.size() && dictates; ++p) {
      if (rankings[p].size() != n || rankings[p][i].empty())
        throw Error(ErrorCode::BadDimensions, "every profile needs a nonempty ranking for every agent");
      ++rep.evaluations;
      if (rankings[p][i].front() != choice[p]) {
        dictates = false;
        counterexample[i] = p;
      }
    }
    if (dictates) {
      rep.holds = true;
      rep.dictator = i;
      return rep;
    }
  }
  rep.holds = false;
  rep.witness = Witness{std::nullopt, std::nullopt, std::nullopt, counterexample, 0.0,
                        "profile[i] is a profile where agent i's top outcome is not chosen"};
  return rep;
}

}  // namespace tecoord
