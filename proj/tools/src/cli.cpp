#include "tecoord/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tecoord/corpus.hpp"
#include "tecoord/error.hpp"
#include "tecoord/games.hpp"
#include "tecoord/mechanisms.hpp"
#include "tecoord/scenario_io.hpp"
#include "tecoord/stackelberg.hpp"
#include "tecoord/welfare.hpp"

#ifndef TECOORD_VERSION
#define TECOORD_VERSION "0.0.0"
#endif

namespace tecoord::cli {

using nlohmann::json;

namespace {

struct Options {
  std::uint64_t seed = 1;
  std::optional<double> tol;
  std::string out;
  bool quiet = false;
  bool timing = false;

  std::string scenario;
  std::string trace;
  // clear
  std::string method = "auction";
  std::optional<std::size_t> max_iters;
  // stackelberg
  std::string objective = "profit";
  std::optional<double> capacity;
  // reverse-stackelberg
  std::string leader_payoff = "profit";
  std::optional<double> price_max;
  // mechanism
  std::string kind = "vcg";
  std::string reports = "truthful";
  std::vector<std::string> checks;
  // corpus
  std::size_t count = 1;
  std::size_t min_agents = 2;
  std::size_t max_agents = 3;
};

// ---------------------------------------------------------------------------
// Serialization helpers

json outcome_json(const MarketOutcome& out) {
  json j;
  j["allocations"] = out.allocations;
  j["supply"] = out.supply;
  j["payments"] = out.payments;
  if (const auto* u = std::get_if<UniformPrice>(&out.prices))
    j["price"] = u->value;
  else
    j["prices"] = std::get<PerAgentPrices>(out.prices);
  return j;
}

json witness_json(const Witness& w) {
  json j;
  if (w.agent) j["agent"] = *w.agent;
  if (w.true_type) j["true_type"] = *w.true_type;
  if (w.misreport) j["misreport"] = *w.misreport;
  j["profile"] = w.profile;
  j["value"] = w.value;
  j["description"] = w.description;
  return j;
}

json report_json(const MechanismReport& r) {
  json j;
  j["property"] = std::string(to_string(r.property));
  j["holds"] = r.holds;
  j["extreme"] = r.extreme;
  j["evaluations"] = r.evaluations;
  if (r.balance) j["balance"] = std::string(to_string(*r.balance));
  if (r.dictator) j["dictator"] = *r.dictator;
  if (r.witness) j["witness"] = witness_json(*r.witness);
  return j;
}

json property_json(const std::string& name, bool holds, double value, double tolerance) {
  return {{"property", name}, {"holds", holds}, {"value", value}, {"tolerance", tolerance}};
}

std::string csv_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  f << text;
}

void write_trace(const std::string& path, const ConvergenceTrace& trace) {
  if (path.empty()) return;
  std::string csv = "k,lambda,total_demand,supply,imbalance\n";
  for (const auto& r : trace.iterations)
    csv += std::to_string(r.k) + ',' + csv_number(r.price) + ',' + csv_number(r.total_demand) + ',' +
           csv_number(r.supply) + ',' + csv_number(r.imbalance) + '\n';
  write_text(path, csv);
}

void write_scan(const std::string& path, const std::vector<ScanPoint>& scan) {
  if (path.empty()) return;
  std::string csv = "price,payoff,feasible\n";
  for (const auto& p : scan) csv += csv_number(p.price) + ',' + csv_number(p.payoff) + ',' + (p.feasible ? "1" : "0") + '\n';
  write_text(path, csv);
}

Theta parse_theta(const json& j) {
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object() && j.size() == 2 && j.contains("alpha") && j.contains("beta") && j["alpha"].is_number() &&
      j["beta"].is_number())
    return {j["alpha"].get<double>(), j["beta"].get<double>()};
  throw Error(ErrorCode::InvalidArgument, "a report is {\"alpha\": a, \"beta\": b} or [a, b]");
}

std::vector<Theta> load_reports(const std::string& source, const Scenario& sc) {
  std::vector<Theta> reports;
  if (source == "truthful") {
    for (const auto& a : sc.agents) reports.push_back(a.theta);
    return reports;
  }
  std::ifstream f(source);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot open reports file '" + source + "'");
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "reports file '" + source + "': " + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::InvalidArgument, "reports file must hold an array");
  for (const auto& r : doc) reports.push_back(parse_theta(r));
  if (reports.size() != sc.size()) throw Error(ErrorCode::BadDimensions, "one report per agent required");
  return reports;
}

// ---------------------------------------------------------------------------
// Subcommands

json run_clear(const Options& o, const Scenario& sc) {
  SolverConfig cfg;
  if (o.tol) cfg.balance_tolerance = *o.tol;
  if (o.max_iters) cfg.max_iterations = *o.max_iters;
  cfg.validate();

  MarketOutcome out;
  std::size_t iterations = 0;
  if (o.method == "auction") {
    out = clear_auction(sc, cfg);
  } else if (o.method == "primal-dual") {
    try {
      const auto trace = run_primal_dual(sc, cfg);
      write_trace(o.trace, trace);
      out = trace.final;
      iterations = trace.iterations.size();
    } catch (const PrimalDualNotConverged& e) {
      write_trace(o.trace, e.trace());
      throw;
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown method '" + o.method + "'");
  }
  json j = outcome_json(out);
  j["iterations"] = iterations;
  j["converged"] = true;
  j["welfare"] = social_welfare(sc, out.allocations, out.supply);

  const auto check = verify_competitive_equilibrium(out, sc, std::max(cfg.balance_tolerance, 1e-9));
  json p = property_json("competitive-equilibrium", check.holds(), out.imbalance(), cfg.balance_tolerance);
  p["agents_optimal"] = check.agents_optimal;
  p["supply_optimal"] = check.supply_optimal;
  p["balanced"] = check.balanced;
  return {{"outcome", j}, {"properties", json::array({p})}};
}

json run_stackelberg(const Options& o, Scenario sc) {
  LeaderObjective objective;
  if (o.objective == "profit")
    objective = LeaderObjective::Profit;
  else if (o.objective == "welfare")
    objective = LeaderObjective::Welfare;
  else
    throw Error(ErrorCode::InvalidArgument, "unknown objective '" + o.objective + "'");
  if (o.capacity) {
    sc.coordinator.capacity = *o.capacity;
    sc.validate();
  }
  const auto sol = solve_price_stackelberg(sc, objective);
  write_scan(o.trace, sol.scan);

  double grid_best = -std::numeric_limits<double>::infinity();
  for (const auto& p : sol.scan)
    if (p.feasible) grid_best = std::max(grid_best, p.payoff);
  const double gap = grid_best - sol.leader_payoff;

  json j = outcome_json(sol.outcome);
  j["leader_payoff"] = sol.leader_payoff;
  j["objective"] = o.objective;
  j["scan_points"] = sol.scan.size();
  return {{"outcome", j}, {"properties", json::array({property_json("grid-certificate", gap <= 1e-12, std::max(gap, 0.0), 1e-12)})}};
}

LeaderPayoff parse_leader_payoff(const std::string& choice, const Scenario& sc) {
  if (choice == "profit") {
    const auto cost = sc.coordinator.cost;
    return [cost](double a, double price) { return price * a - cost(a); };
  }
  constexpr std::string_view prefix = "bullseye:";
  if (choice.rfind(prefix, 0) == 0) {
    const auto body = choice.substr(prefix.size());
    const auto comma = body.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("missing comma");
      std::size_t used_a = 0, used_l = 0;
      const auto rest = body.substr(comma + 1);
      const double a0 = std::stod(body.substr(0, comma), &used_a);
      const double l0 = std::stod(rest, &used_l);
      if (used_a != comma || used_l != rest.size()) throw std::invalid_argument("trailing text");
      return [a0, l0](double a, double price) { return -(a - a0) * (a - a0) - (price - l0) * (price - l0); };
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "leader payoff must be bullseye:<a>,<lambda>, got '" + choice + "'");
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown leader payoff '" + choice + "'");
}

json run_reverse_stackelberg(const Options& o, const Scenario& sc) {
  const auto payoff = parse_leader_payoff(o.leader_payoff, sc);
  double price_max = 0.0;
  for (const auto& a : sc.agents) price_max = std::max(price_max, a.theta.alpha);
  if (o.price_max) price_max = *o.price_max;
  if (!(price_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "price range must be positive");

  // One pricing function per agent, each built by the single-follower construction.
  json agents = json::array();
  json props = json::array();
  for (const auto& agent : sc.agents) {
    const auto sol = solve_reverse_stackelberg(agent, payoff, {agent.bounds}, {{0.0, price_max}});
    agents.push_back({{"id", agent.id},
                      {"team_allocation", sol.team.allocation},
                      {"team_price", sol.team.price},
                      {"team_value", sol.team.value},
                      {"slope", sol.pricing.slope},
                      {"intercept", sol.pricing(0.0)},
                      {"response", sol.response},
                      {"price_at_response", sol.pricing(sol.response)},
                      {"leader_value", sol.leader_value},
                      {"follower_value", sol.follower_value}});
    const double gap = std::abs(sol.leader_value - sol.team.value);
    json p = property_json("team-value-achieved", gap <= 1e-6, gap, 1e-6);
    p["agent"] = agent.id;
    props.push_back(p);
  }
  return {{"outcome", {{"agents", agents}, {"leader_payoff", o.leader_payoff}, {"price_max", price_max}}},
          {"properties", props}};
}

json run_supply_game(const Options&, const Scenario& sc) {
  const auto r = supply_function_nash(sc);
  json j = outcome_json(r.outcome);
  j["bids"] = r.bids.bids;
  j["epsilon"] = r.solution.epsilon;
  j["solution_concept"] = std::string(to_string(r.solution.solution_concept));
  j["efficient_welfare"] = r.efficient_welfare;
  j["realized_welfare"] = r.realized_welfare;
  j["iterations"] = r.iterations;
  return {{"outcome", j}, {"properties", json::array({property_json("epsilon-nash", r.solution.epsilon <= 1e-6, r.solution.epsilon, 1e-6)})}};
}

const TypePrior& need_prior(const Scenario& sc) {
  if (!sc.prior) throw Error(ErrorCode::PriorRequired, "scenario carries no type prior");
  return *sc.prior;
}

json run_mechanism(const Options& o, const Scenario& sc) {
  if (o.kind == "ssvcg") {
    if (!o.checks.empty()) throw Error(ErrorCode::InvalidArgument, "--check applies to direct mechanisms (vcg, dagva)");
    const auto r = ssvcg_solve(sc);
    json j = outcome_json(r.outcome);
    j["sigma"] = r.sigma;
    j["epsilon"] = r.solution.epsilon;
    j["solution_concept"] = std::string(to_string(r.solution.solution_concept));
    j["efficient_allocation"] = r.efficient_allocation;
    j["allocation_error"] = r.allocation_error;
    j["iterations"] = r.iterations;
    return {{"outcome", j},
            {"properties", json::array({property_json("efficient-allocation", r.allocation_error <= 1e-5, r.allocation_error, 1e-5),
                                        property_json("epsilon-nash", r.solution.epsilon <= 1e-5, r.solution.epsilon, 1e-5)})}};
  }

  DirectMechanism mech;
  if (o.kind == "vcg")
    mech = make_vcg_mechanism(quadratic_model(sc), default_type_grid(sc));
  else if (o.kind == "dagva")
    mech = make_dagva_mechanism(quadratic_model(sc), need_prior(sc));
  else
    throw Error(ErrorCode::InvalidArgument, "unknown mechanism kind '" + o.kind + "'");

  const auto reports = load_reports(o.reports, sc);
  json j = outcome_json(mech.outcome(reports));
  j["kind"] = o.kind;
  j["reports"] = json::array();
  for (const auto& r : reports) j["reports"].push_back({{"alpha", r.alpha}, {"beta", r.beta}});

  json checks = json::array();
  for (const auto& c : o.checks) {
    if (c == "ic-dom")
      checks.push_back(report_json(check_ic_dominant(mech, mech.message_space)));
    else if (c == "ic-bayes")
      checks.push_back(report_json(check_ic_bayesian(mech, need_prior(sc))));
    else if (c == "budget")
      checks.push_back(report_json(check_budget_balance(mech)));
    else if (c == "ir")
      checks.push_back(report_json(check_interim_ir(mech, need_prior(sc))));
    else
      throw Error(ErrorCode::InvalidArgument, "unknown check '" + c + "'");
  }
  return {{"outcome", j}, {"properties", checks}};
}

json run_corpus(const Options& o) {
  if (o.out.empty()) throw Error(ErrorCode::InvalidArgument, "corpus needs --out <directory>");
  CorpusShape shape;
  shape.min_agents = o.min_agents;
  shape.max_agents = o.max_agents;
  const auto corpus = generate_corpus(o.seed, o.count, shape);
  const auto paths = write_corpus(corpus, o.out);
  json files = json::array();
  for (const auto& p : paths) files.push_back(p.filename().string());
  return {{"outcome", {{"count", corpus.size()}, {"files", files}}}, {"properties", json::array()}};
}

json run_verify(const Options& o, const Scenario& sc) {
  json props = json::array();
  const double tol = o.tol.value_or(1e-6);

  const auto optimum = solve_social_welfare(sc);
  const auto auction = clear_auction(sc);
  const auto ce = verify_competitive_equilibrium(auction, sc, tol);
  props.push_back(property_json("competitive-equilibrium", ce.holds(), auction.imbalance(), tol));
  const double price_gap = std::abs(auction.uniform_price() - optimum.multiplier);
  props.push_back(property_json("auction-matches-welfare", price_gap <= 1e-4, price_gap, 1e-4));

  Scenario open = sc;
  open.coordinator.capacity.reset();
  const auto leader = solve_price_stackelberg(open, LeaderObjective::Welfare);
  const double bridge = std::abs(leader.price - optimum.multiplier);
  props.push_back(property_json("stackelberg-welfare-bridge", bridge <= 1e-4, bridge, 1e-4));

  const auto vcg = make_vcg_mechanism(quadratic_model(sc), default_type_grid(sc));
  props.push_back(report_json(check_ic_dominant(vcg, vcg.message_space)));

  if (sc.prior && sc.size() >= 2) {
    const auto dagva = make_dagva_mechanism(quadratic_model(sc), *sc.prior);
    props.push_back(report_json(check_budget_balance(dagva)));
    props.push_back(report_json(check_ic_bayesian(dagva, *sc.prior)));
  }
  if (sc.coordinator.capacity) {
    std::vector<Theta> types;
    std::vector<Interval> boxes;
    for (const auto& a : sc.agents) {
      types.push_back(a.theta);
      boxes.push_back(a.bounds);
    }
    if (water_fill(types, boxes, sc.coordinator.capacity).multiplier > 0.0) {
      const auto r = ssvcg_solve(sc);
      props.push_back(property_json("ssvcg-efficient", r.allocation_error <= 1e-5, r.allocation_error, 1e-5));
      props.push_back(property_json("ssvcg-epsilon", r.solution.epsilon <= 1e-5, r.solution.epsilon, 1e-5));
    }
  }
  if (sc.coordinator.deficit && sc.size() >= 3) {
    const auto r = supply_function_nash(sc);
    props.push_back(property_json("supply-game-epsilon", r.solution.epsilon <= 1e-6, r.solution.epsilon, 1e-6));
  }

  bool all = true;
  for (const auto& p : props) all = all && p["holds"].get<bool>();
  return {{"outcome", {{"all_hold", all}, {"checked", props.size()}}}, {"properties", props}};
}

// ---------------------------------------------------------------------------

void add_scenario(CLI::App* sub, Options& o) {
  sub->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
}

void add_trace(CLI::App* sub, Options& o, const std::string& what) {
  sub->add_option("--trace", o.trace, "Write " + what + " as CSV to this file");
}

int exit_code_for(ErrorCode code) {
  return code == ErrorCode::NotConverged ? kExitNotConverged : kExitInvalid;
}

}  // namespace

std::string render(const json& report) { return dump_canonical(report) + "\n"; }

RunResult parse_and_dispatch(const std::vector<std::string>& args) {
  Options o;
  CLI::App app{"Transactive-energy coordination: market clearing, Stackelberg pricing and mechanism design",
               args.empty() ? "tecoord" : args.front()};
  app.require_subcommand(1);
  app.add_option("--seed", o.seed, "Seed echoed in the report and used by corpus generation");
  app.add_option("--tol", o.tol, "Tolerance (balance tolerance for clear, property tolerance for verify)");
  app.add_option("--out", o.out, "Write the report here (corpus: output directory)");
  app.add_flag("--quiet", o.quiet, "Do not print the report");
  app.add_flag("--timing", o.timing, "Include wall time in the report (breaks byte-identical reruns)");

  auto* clear = app.add_subcommand("clear", "Competitive equilibrium by one-shot auction or primal-dual iteration");
  add_scenario(clear, o);
  clear->add_option("--method", o.method, "auction | primal-dual")->check(CLI::IsMember({"auction", "primal-dual"}));
  clear->add_option("--max-iters", o.max_iters, "Primal-dual iteration budget");
  add_trace(clear, o, "the primal-dual iterations");

  auto* stack = app.add_subcommand("stackelberg", "Price-setting leader with price-taking followers");
  add_scenario(stack, o);
  stack->add_option("--objective", o.objective, "profit | welfare")->check(CLI::IsMember({"profit", "welfare"}));
  stack->add_option("--capacity", o.capacity, "Capacity D overriding the scenario");
  add_trace(stack, o, "the price scan");

  auto* reverse = app.add_subcommand("reverse-stackelberg", "Team problem and linear incentive pricing per agent");
  add_scenario(reverse, o);
  reverse->add_option("--leader-payoff", o.leader_payoff, "profit | bullseye:<a>,<lambda>");
  reverse->add_option("--price-max", o.price_max, "Upper end of the team price range (default max alpha)");

  auto* supply = app.add_subcommand("supply-game", "Linear supply-function bidding for a shedding deficit");
  add_scenario(supply, o);

  auto* mech = app.add_subcommand("mechanism", "Direct mechanisms and their property checks");
  add_scenario(mech, o);
  mech->add_option("--kind", o.kind, "vcg | dagva | ssvcg")->check(CLI::IsMember({"vcg", "dagva", "ssvcg"}));
  mech->add_option("--reports", o.reports, "Reports JSON file, or 'truthful'");
  mech->add_option("--check", o.checks, "Comma-separated: ic-dom, ic-bayes, budget, ir")->delimiter(',');

  auto* corpus = app.add_subcommand("corpus", "Generate a deterministic random scenario corpus into --out");
  corpus->add_option("--count", o.count, "Number of scenarios")->check(CLI::PositiveNumber);
  corpus->add_option("--min-agents", o.min_agents, "Fewest agents per scenario")->check(CLI::PositiveNumber);
  corpus->add_option("--max-agents", o.max_agents, "Most agents per scenario")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Run every applicable property check on one scenario");
  add_scenario(verify, o);

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("tecoord");

  RunResult result;
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    std::ostringstream out, err;
    const int code = app.exit(e, out, err);
    result.exit_code = code == 0 ? kExitOk : kExitInvalid;
    result.message = out.str() + err.str();
    return result;
  }

  const auto* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  const auto start = std::chrono::steady_clock::now();
  try {
    json body;
    if (name == "corpus") {
      body = run_corpus(o);
    } else {
      const auto sc = load_scenario(o.scenario);
      if (name == "clear") body = run_clear(o, sc);
      else if (name == "stackelberg") body = run_stackelberg(o, sc);
      else if (name == "reverse-stackelberg") body = run_reverse_stackelberg(o, sc);
      else if (name == "supply-game") body = run_supply_game(o, sc);
      else if (name == "mechanism") body = run_mechanism(o, sc);
      else body = run_verify(o, sc);
    }

    json request{{"subcommand", name}};
    json options = json::object();
    for (const auto* opt : chosen->get_options()) {
      if (opt->count() == 0 || opt->get_name() == "--help") continue;
      const auto& values = opt->results();
      options[opt->get_name()] = values.size() == 1 ? json(values.front()) : json(values);
    }
    if (o.tol) options["--tol"] = *o.tol;
    request["options"] = options;

    json report = std::move(body);
    report["request"] = request;
    report["seed"] = o.seed;
    report["artifact_version"] = TECOORD_VERSION;
    if (o.timing)
      report["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    result.quiet = o.quiet;
    if (!o.out.empty() && name != "corpus") {
      write_text(o.out, render(report));
      result.report_written = true;
    }
    if (name == "verify" && !report["outcome"]["all_hold"].get<bool>()) {
      result.exit_code = kExitPropertyViolated;
      result.message = "one or more properties failed";
    }
    result.report = std::move(report);
  } catch (const Error& e) {
    result.exit_code = exit_code_for(e.code());
    result.message = e.what();
  } catch (const std::exception& e) {
    result.exit_code = kExitInternal;
    result.message = std::string("internal error: ") + e.what();
  }
  return result;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  const auto result = parse_and_dispatch(args);
  if (result.report && !result.quiet && !result.report_written) std::cout << render(*result.report);
  if (!result.message.empty()) {
    auto& stream = result.exit_code == kExitOk ? std::cout : std::cerr;
    stream << result.message;
    if (result.message.back() != '\n') stream << '\n';
  }
  return result.exit_code;
}

}  // namespace tecoord::cli
