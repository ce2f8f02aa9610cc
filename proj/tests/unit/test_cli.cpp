#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "fixtures.hpp"
#include "tecoord/cli.hpp"
#include "tecoord/corpus.hpp"
#include "tecoord/scenario_io.hpp"

using namespace tecoord;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("tecoord_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

cli::RunResult call(std::vector<std::string> args) {
  args.insert(args.begin(), "tecoord");
  return cli::parse_and_dispatch(args);
}

fs::path write_scenario(const TempDir& dir, const std::string& name, const Scenario& s) {
  const auto p = dir.path / name;
  save_scenario(s, p);
  return p;
}

}  // namespace

TEST_CASE("corpus generation is deterministic") {
  const auto a = generate_corpus(7, 20);
  const auto b = generate_corpus(7, 20);
  REQUIRE(a.size() == 20);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(dump_canonical(to_json(a[k])) == dump_canonical(to_json(b[k])));
  const auto c = generate_corpus(8, 20);
  bool differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) differs |= dump_canonical(to_json(a[k])) != dump_canonical(to_json(c[k]));
  CHECK(differs);
}

TEST_CASE("corpus scenarios are valid and respect the shape") {
  CorpusShape shape;
  shape.min_agents = 3;
  shape.max_agents = 5;
  for (const auto& s : generate_corpus(3, 50, shape)) {
    CHECK_NOTHROW(s.validate());
    CHECK(s.size() >= 3);
    CHECK(s.size() <= 5);
    REQUIRE(s.prior);
    REQUIRE(s.coordinator.capacity);
    for (const auto& a : s.agents) {
      CHECK(a.theta.alpha >= 4.0);
      CHECK(a.theta.alpha <= 16.0);
      CHECK(a.bounds.hi == doctest::Approx(2 * a.theta.alpha / a.theta.beta));
    }
  }
  CHECK_THROWS_CODE(generate_corpus(1, 0), ErrorCode::InvalidArgument);
}

TEST_CASE("corpus files round-trip") {
  TempDir dir("corpus");
  const auto corpus = generate_corpus(11, 4);
  const auto paths = write_corpus(corpus, dir.path);
  REQUIRE(paths.size() == 4);
  CHECK(paths[0].filename() == "scenario_0001.json");
  for (std::size_t k = 0; k < paths.size(); ++k)
    CHECK(dump_canonical(to_json(load_scenario(paths[k]))) == dump_canonical(to_json(corpus[k])));
}

TEST_CASE("clear reports the equilibrium") {
  TempDir dir("clear");
  const auto path = write_scenario(dir, "s.json", fixtures::canonical());
  const auto r = call({"clear", "--scenario", path.string()});
  REQUIRE(r.exit_code == cli::kExitOk);
  REQUIRE(r.report);
  const auto& out = (*r.report)["outcome"];
  CHECK(out["price"].get<double>() == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(r.report->contains("properties"));
  CHECK((*r.report)["request"]["subcommand"] == "clear");
  CHECK_FALSE(r.report->contains("wall_time_s"));

  const auto pd = call({"clear", "--scenario", path.string(), "--method", "primal-dual"});
  CHECK(pd.exit_code == cli::kExitOk);
}

TEST_CASE("reruns are byte-identical") {
  TempDir dir("rerun");
  const auto path = write_scenario(dir, "s.json", fixtures::canonical(4.0));
  for (const std::string sub : {"clear", "stackelberg", "verify"}) {
    const auto a = call({sub, "--scenario", path.string()});
    const auto b = call({sub, "--scenario", path.string()});
    REQUIRE(a.report);
    REQUIRE(b.report);
    CHECK(cli::render(*a.report) == cli::render(*b.report));
  }
  const auto out = dir.path / "r.json";
  const auto w = call({"mechanism", "--scenario", path.string(), "--kind", "vcg", "--out", out.string()});
  CHECK(w.exit_code == cli::kExitOk);
  CHECK(w.report_written);
  const auto first = slurp(out);
  call({"mechanism", "--scenario", path.string(), "--kind", "vcg", "--out", out.string()});
  CHECK(slurp(out) == first);
}

TEST_CASE("exit codes") {
  TempDir dir("exit");
  const auto canonical = write_scenario(dir, "c.json", fixtures::canonical(4.0));
  auto two = fixtures::canonical(4.0);
  two.coordinator.deficit = 3.0;
  const auto two_path = write_scenario(dir, "two.json", two);

  CHECK(call({"clear", "--scenario", (dir.path / "missing.json").string()}).exit_code == cli::kExitInvalid);
  CHECK(call({"frobnicate"}).exit_code == cli::kExitInvalid);
  CHECK(call({"clear"}).exit_code == cli::kExitInvalid);
  CHECK(call({"mechanism", "--scenario", canonical.string(), "--kind", "dagva"}).exit_code == cli::kExitInvalid);
  CHECK(call({"supply-game", "--scenario", two_path.string()}).exit_code == cli::kExitNotConverged);
  CHECK(call({"clear", "--scenario", canonical.string(), "--method", "primal-dual", "--max-iters", "1"}).exit_code ==
        cli::kExitNotConverged);
  CHECK(call({"verify", "--scenario", canonical.string()}).exit_code == cli::kExitOk);
  CHECK(call({"corpus", "--count", "2"}).exit_code == cli::kExitInvalid);

  const auto corpus_dir = dir.path / "corpus";
  const auto c = call({"corpus", "--count", "3", "--out", corpus_dir.string(), "--seed", "5"});
  CHECK(c.exit_code == cli::kExitOk);
  CHECK(fs::exists(corpus_dir / "scenario_0003.json"));
}

TEST_CASE("mechanism reports") {
  TempDir dir("mech");
  auto s = fixtures::canonical(4.0);
  s.prior = fixtures::two_point_prior(s, 2.0);
  const auto path = write_scenario(dir, "s.json", s);

  const auto vcg = call({"mechanism", "--scenario", path.string(), "--kind", "vcg", "--check", "ic-dom,budget"});
  REQUIRE(vcg.report);
  const auto& t = (*vcg.report)["outcome"]["payments"];
  CHECK(t[0].get<double>() == doctest::Approx(-16.5).epsilon(1e-9));
  CHECK(t[1].get<double>() == doctest::Approx(-6.5).epsilon(1e-9));

  const auto dagva = call({"mechanism", "--scenario", path.string(), "--kind", "dagva", "--check", "ic-bayes,budget"});
  CHECK(dagva.exit_code == cli::kExitOk);

  const auto reports = dir.path / "reports.json";
  std::ofstream(reports) << R"([{"alpha": 12, "beta": 1}, [6, 1]])";
  const auto custom = call({"mechanism", "--scenario", path.string(), "--kind", "vcg", "--reports", reports.string()});
  CHECK(custom.exit_code == cli::kExitOk);

  CHECK(call({"mechanism", "--scenario", path.string(), "--kind", "ssvcg", "--check", "budget"}).exit_code ==
        cli::kExitInvalid);
}
