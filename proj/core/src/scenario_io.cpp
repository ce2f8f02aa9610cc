#include "tecoord/scenario_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "tecoord/error.hpp"

namespace tecoord {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& reason) { throw Error(ErrorCode::ScenarioInvalid, reason); }

void expect_object(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) invalid(std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) invalid(std::string(where) + ": unknown key '" + key + "'");
  }
}

double number(const json& j, std::string_view where, std::string_view key) {
  const auto it = j.find(std::string(key));
  if (it == j.end()) invalid(std::string(where) + ": missing '" + std::string(key) + "'");
  if (!it->is_number()) invalid(std::string(where) + ": '" + std::string(key) + "' must be a number");
  return it->get<double>();
}

// null encodes an unbounded end of the supply interval
double bound(const json& j, std::string_view where, std::string_view key, double unbounded) {
  const auto it = j.find(std::string(key));
  if (it != j.end() && it->is_null()) return unbounded;
  return number(j, where, key);
}

std::optional<double> optional_number(const json& j, std::string_view where, std::string_view key) {
  const auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) return std::nullopt;
  return number(j, where, key);
}

Theta parse_theta(const json& j, const std::string& where) {
  if (j.is_array()) {
    if (j.size() != 2 || !j[0].is_number() || !j[1].is_number())
      invalid(where + ": theta array must be [alpha, beta]");
    return {j[0].get<double>(), j[1].get<double>()};
  }
  expect_object(j, where, {"alpha", "beta"});
  return {number(j, where, "alpha"), number(j, where, "beta")};
}

TypePrior parse_prior(const json& j) {
  expect_object(j, "prior", {"support", "weights", "independent"});
  TypePrior prior;
  const auto support = j.find("support");
  const auto weights = j.find("weights");
  if (support == j.end() || !support->is_array()) invalid("prior: 'support' must be an array");
  if (weights == j.end() || !weights->is_array()) invalid("prior: 'weights' must be an array");
  for (std::size_t i = 0; i < support->size(); ++i) {
    const auto& row = (*support)[i];
    if (!row.is_array()) invalid("prior: support rows must be arrays");
    auto& out = prior.support.emplace_back();
    for (std::size_t k = 0; k < row.size(); ++k)
      out.push_back(parse_theta(row[k], "prior.support[" + std::to_string(i) + "][" + std::to_string(k) + "]"));
  }
  for (const auto& row : *weights) {
    if (!row.is_array()) invalid("prior: weight rows must be arrays");
    auto& out = prior.weights.emplace_back();
    for (const auto& w : row) {
      if (!w.is_number()) invalid("prior: weights must be numbers");
      out.push_back(w.get<double>());
    }
  }
  if (const auto ind = j.find("independent"); ind != j.end()) {
    if (!ind->is_boolean()) invalid("prior: 'independent' must be a boolean");
    prior.independent = ind->get<bool>();
  }
  return prior;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void dump_number(std::string& out, double x) {
  if (!std::isfinite(x)) {
    out += "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);  // no "-0"
  out += buf;
}

void dump(const json& j, std::string& out, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map keeps keys sorted
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump(it.value(), out, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        dump(v, out, indent, depth + 1);
      }
      newline(depth);
      out += ']';
      return;
    }
    case json::value_t::number_float:
      dump_number(out, j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  expect_object(doc, "scenario", {"agents", "coordinator", "prior"});
  Scenario s;
  const auto agents = doc.find("agents");
  if (agents == doc.end() || !agents->is_array()) invalid("scenario: 'agents' must be an array");
  for (std::size_t i = 0; i < agents->size(); ++i) {
    const auto& a = (*agents)[i];
    const auto where = "agents[" + std::to_string(i) + "]";
    expect_object(a, where, {"id", "alpha", "beta", "a_min", "a_max"});
    const auto id = a.find("id");
    if (id == a.end() || !id->is_number_integer()) invalid(where + ": 'id' must be an integer");
    s.agents.push_back({id->get<int>(),
                        {number(a, where, "alpha"), number(a, where, "beta")},
                        {number(a, where, "a_min"), number(a, where, "a_max")}});
  }
  const auto coord = doc.find("coordinator");
  if (coord == doc.end()) invalid("scenario: missing 'coordinator'");
  expect_object(*coord, "coordinator", {"c1", "c2", "y_min", "y_max", "capacity", "deficit"});
  auto& c = s.coordinator;
  c.cost = {number(*coord, "coordinator", "c1"), number(*coord, "coordinator", "c2")};
  constexpr double inf = std::numeric_limits<double>::infinity();
  c.supply_bounds = {bound(*coord, "coordinator", "y_min", -inf), bound(*coord, "coordinator", "y_max", inf)};
  c.capacity = optional_number(*coord, "coordinator", "capacity");
  c.deficit = optional_number(*coord, "coordinator", "deficit");
  if (const auto prior = doc.find("prior"); prior != doc.end() && !prior->is_null()) s.prior = parse_prior(*prior);
  s.validate();
  return s;
}

Scenario parse_scenario_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    invalid(std::string("malformed JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario_text(buf.str());
  } catch (const Error& e) {
    invalid(path.string() + ": " + e.what());
  }
}

json to_json(const Scenario& s) {
  json doc = json::object();
  json agents = json::array();
  for (const auto& a : s.agents) {
    agents.push_back({{"id", a.id},
                      {"alpha", a.theta.alpha},
                      {"beta", a.theta.beta},
                      {"a_min", a.bounds.lo},
                      {"a_max", a.bounds.hi}});
  }
  doc["agents"] = std::move(agents);
  const auto& c = s.coordinator;
  json coord = {{"c1", c.cost.c1},
                {"c2", c.cost.c2},
                {"y_min", finite_or_null(c.supply_bounds.lo)},
                {"y_max", finite_or_null(c.supply_bounds.hi)}};
  if (c.capacity) coord["capacity"] = *c.capacity;
  if (c.deficit) coord["deficit"] = *c.deficit;
  doc["coordinator"] = std::move(coord);
  if (s.prior) {
    json support = json::array();
    for (const auto& row : s.prior->support) {
      json r = json::array();
      for (const auto& t : row) r.push_back({{"alpha", t.alpha}, {"beta", t.beta}});
      support.push_back(std::move(r));
    }
    doc["prior"] = {{"support", std::move(support)},
                    {"weights", s.prior->weights},
                    {"independent", s.prior->independent}};
  }
  return doc;
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
  out << dump_canonical(to_json(scenario)) << '\n';
}

std::string dump_canonical(const json& doc, int indent) {
  std::string out;
  dump(doc, out, indent, 0);
  return out;
}

}  // namespace tecoord
