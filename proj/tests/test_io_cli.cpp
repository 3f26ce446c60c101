#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "coarse/cli.hpp"
#include "coarse/errors.hpp"
#include "coarse/feasibility.hpp"
#include "coarse/io.hpp"
#include "helpers.hpp"

using namespace coarse;
using namespace coarse::testing;
using nlohmann::json;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

uint64_t mask_from_label(const StateSpace& space, const std::string& label) {
  REQUIRE(label.size() >= 2);
  std::string inner = label.substr(1, label.size() - 2);
  uint64_t mask = 0;
  std::string current;
  for (char c : inner + ",") {
    if (c == ',') {
      if (!current.empty()) mask |= 1ull << space.require_index(current);
      current.clear();
    } else {
      current += c;
    }
  }
  return mask;
}

}  // namespace

TEST_CASE("every shipped model file parses to its kind") {
  const std::vector<std::pair<std::string, std::string>> corpus = {
      {"monty_2_16.json", "distribution"},   {"monty_2_17.json", "distribution"},
      {"tests_2_2.json", "distribution"},    {"g2_2_10.json", "coarsening_variable"},
      {"m_tests_2_1.json", "coarsening_variable"}, {"figure2a.json", "hypergraph"},
      {"figure2b.json", "hypergraph"},       {"figure3.json", "hypergraph"},
      {"rmc_two_split.json", "rmc"},         {"noise_2state.json", "noise"},
      {"pt_triangle.json", "pt"},            {"mgd_two_partitions.json", "mgd"},
      {"table1_2_16.json", "tabular"},       {"table1_2_17.json", "tabular"}};
  for (const auto& [name, kind] : corpus) {
    ParsedModel parsed = parse_model_file(data_path(name));
    CHECK(parsed.kind == kind);
  }
}

TEST_CASE("shipped files reproduce the in-memory examples") {
  ParsedModel informed = parse_model_file(data_path("monty_2_16.json"));
  CHECK(std::get<CoarseDistribution>(informed.model) == monty_informed_host());
  ParsedModel blind = parse_model_file(data_path("monty_2_17.json"));
  CHECK(std::get<CoarseDistribution>(blind.model) == monty_blind_host());

  // The two coin-flip tables induce exactly the two distributions.
  CHECK(induced_of(parse_model_file(data_path("table1_2_16.json"))) == monty_informed_host());
  CHECK(induced_of(parse_model_file(data_path("table1_2_17.json"))) == monty_blind_host());

  // The gamma-doubled variable and the plain missingness variable both induce
  // the sequential-tests distribution.
  ParsedModel g2 = parse_model_file(data_path("g2_2_10.json"));
  CoarseDistribution induced = induced_of(g2);
  CHECK(induced.observations().size() == 3);
  ParsedModel m = parse_model_file(data_path("m_tests_2_1.json"));
  CHECK(induced_of(m).observations().size() == 3);
}

TEST_CASE("parse failures carry context") {
  CHECK_THROWS_AS(parse_model_text("{", "t"), ParseError);
  CHECK_THROWS_AS(parse_model_text("{\"kind\":\"nope\"}", "t"), ParseError);
  CHECK_THROWS_AS(parse_model_text(R"({"kind":"distribution","states":["a"],"px":{"a":"0.7"}})", "t"),
                  ParseError);

  // A marginal that sums to 999/1000 surfaces the exact defect.
  try {
    parse_model_text(R"({
      "kind": "distribution",
      "states": ["a", "b"],
      "px": {"a": "1/2", "b": "499/1000"},
      "cond": {"a": [{"set": ["a"], "p": "1"}], "b": [{"set": ["b"], "p": "1"}]}
    })",
                     "t");
    FAIL("expected NormalizationError");
  } catch (const NormalizationError& e) {
    CHECK(std::string(e.what()).find("1/1000") != std::string::npos);
  }

  // Hypergraph with an uncovered node.
  CHECK_THROWS_AS(parse_model_text(R"({
    "kind": "hypergraph",
    "states": ["x"],
    "nodes": [{"name": "U1", "set": ["x"]}, {"name": "U2", "set": []}]
  })",
                                   "t"),
                  ValidationError);
}

TEST_CASE("check commands report verdicts with the right exit codes") {
  CliResult informed = run_cli({"check", "car", data_path("monty_2_16.json")});
  CHECK(informed.code == 1);
  CHECK(informed.out.find("verdict: fails") != std::string::npos);
  CHECK(informed.out.find("observation {A,C}: P(Y|X=A) = 1/2 but P(Y|X=C) = 1") !=
        std::string::npos);

  CliResult blind = run_cli({"check", "car", data_path("monty_2_17.json")});
  CHECK(blind.code == 0);
  CHECK(blind.out.find("verdict: holds") != std::string::npos);
  CHECK(blind.out.find("nu({A,B}) = 1/2") != std::string::npos);

  CliResult ccar = run_cli({"check", "ccar", data_path("monty_2_17.json")});
  CHECK(ccar.code == 1);
  CHECK(ccar.out.find("no partition mixture; exact covers of the support: 0") != std::string::npos);

  CliResult tests = run_cli({"check", "ccar", data_path("tests_2_2.json")});
  CHECK(tests.code == 0);

  CliResult gcar = run_cli({"check", "gcar", data_path("g2_2_10.json")});
  CHECK(gcar.code == 1);

  CliResult mar = run_cli({"check", "mar", data_path("m_tests_2_1.json")});
  CHECK(mar.code == 0);
  CliResult mcar = run_cli({"check", "mcar", data_path("m_tests_2_1.json")});
  CHECK(mcar.code == 1);

  // models induce before checking
  CliResult table = run_cli({"check", "car", data_path("table1_2_16.json")});
  CHECK(table.code == 1);
}

TEST_CASE("hypergraph commands") {
  CliResult nested = run_cli({"hypergraph", "check", data_path("figure2a.json")});
  CHECK(nested.code == 1);
  CliResult screen = run_cli({"hypergraph", "screen", data_path("figure2a.json")});
  CHECK(screen.code == 1);
  CHECK(screen.out.find("edge B nested inside edge A") != std::string::npos);

  CliResult triangle = run_cli({"hypergraph", "check", data_path("figure2b.json")});
  CHECK(triangle.code == 0);
  CHECK(triangle.out.find("nu(U_AB) = 1/2") != std::string::npos);

  CliResult fig3 = run_cli({"hypergraph", "check", data_path("figure3.json")});
  CHECK(fig3.code == 1);
  CHECK(fig3.out.find("z = (1,1,-1,-1,-1)") != std::string::npos);
  CHECK(fig3.out.find("sequence_x = (x1,x2)") != std::string::npos);
  CHECK(fig3.out.find("sequence_x' = (x3,x4,x5)") != std::string::npos);
  CHECK(fig3.out.find("lengths 2 vs 3") != std::string::npos);
  CliResult fig3_screen = run_cli({"hypergraph", "screen", data_path("figure3.json")});
  CHECK(fig3_screen.code == 0);

  CliResult realize = run_cli({"hypergraph", "realize", data_path("figure2b.json")});
  CHECK(realize.code == 0);
  CHECK(realize.out.find("P(X=A) = 1/3") != std::string::npos);

  CliResult enumerate = run_cli({"hypergraph", "enumerate", "--max-nodes", "2", "--max-edges", "3"});
  CHECK(enumerate.code == 0);
  CHECK(enumerate.out.find("total listed: 5") != std::string::npos);
}

TEST_CASE("update command contrasts the two conditionings") {
  CliResult informed = run_cli({"update", data_path("monty_2_16.json"), "--observe", "A,C"});
  CHECK(informed.code == 1);
  CHECK(informed.out.find("verdict: conditioning invalid") != std::string::npos);
  CHECK(informed.out.find("P(X=A | Y={A,C}) = 1/3") != std::string::npos);
  CHECK(informed.out.find("P(X=C | Y={A,C}) = 2/3") != std::string::npos);
  CHECK(informed.out.find("P(X=A | X in {A,C}) = 1/2") != std::string::npos);

  CliResult blind = run_cli({"update", data_path("monty_2_17.json"), "--observe", "A,C"});
  CHECK(blind.code == 0);
  CHECK(blind.out.find("P(X=A | Y={A,C}) = 1/2") != std::string::npos);
}

TEST_CASE("induce, simulate, transform, honesty, probe") {
  CliResult induce = run_cli({"induce", data_path("table1_2_16.json")});
  CHECK(induce.code == 0);
  CHECK(induce.out.find("P(Y={A,C}|X=A) = 1/2") != std::string::npos);
  CHECK(induce.out.find("P(Y={A,C}|X=C) = 1") != std::string::npos);

  CliResult sim = run_cli({"simulate", data_path("pt_triangle.json"), "--n", "2000", "--seed", "5",
                           "--tolerance", "0.05"});
  CHECK(sim.code == 0);
  CHECK(sim.out.find("verdict: pass") != std::string::npos);

  CliResult transform = run_cli({"transform", "bernoulli", data_path("mgd_two_partitions.json")});
  CHECK(transform.code == 0);
  ParsedModel parsed = parse_model_text(transform.out, "transform output");
  CHECK(parsed.kind == "bernoulli");
  CHECK(std::get<BernoulliModel>(parsed.model).induce() ==
        induced_of(parse_model_file(data_path("mgd_two_partitions.json"))));

  CHECK(run_cli({"honesty", data_path("mgd_two_partitions.json")}).code == 0);
  CliResult dishonest = run_cli({"honesty", data_path("pt_triangle.json")});
  CHECK(dishonest.code == 1);
  CHECK(dishonest.out.find("verdict: dishonest") != std::string::npos);

  CliResult probe = run_cli({"probe", data_path("noise_2state.json"), "--mode", "car", "--trials",
                             "5", "--seed", "3"});
  CHECK(probe.code == 1);
  CHECK(probe.out.find("verdict: broken") != std::string::npos);
  CliResult robust = run_cli({"probe", data_path("mgd_two_partitions.json"), "--mode", "ccar",
                              "--trials", "5", "--seed", "3"});
  CHECK(robust.code == 0);
  CHECK(robust.out.find("verdict: robust-so-far") != std::string::npos);
}

TEST_CASE("demos run clean") {
  CliResult monty = run_cli({"demo", "monty"});
  CHECK(monty.code == 0);
  CHECK(monty.out.find("1/3") != std::string::npos);
  CHECK(monty.out.find("2/3") != std::string::npos);
  CHECK(monty.out.find("conditioning invalid") != std::string::npos);
  CHECK(monty.out.find("conditioning valid") != std::string::npos);

  CliResult tests = run_cli({"demo", "tests"});
  CHECK(tests.code == 0);
  CHECK(tests.out.find("m-mar: holds") != std::string::npos);
  CHECK(tests.out.find("m-mcar: fails") != std::string::npos);
  CHECK(tests.out.find("d-ccar: holds") != std::string::npos);

  CliResult fig3 = run_cli({"demo", "figure3"});
  CHECK(fig3.code == 1);
  CHECK(fig3.out.find("nested edges: none") != std::string::npos);

  CliResult fig4 = run_cli({"demo", "figure4"});
  CHECK(fig4.code == 0);
  CHECK(fig4.out.find("compatible 3-node hypergraphs:") != std::string::npos);
}

TEST_CASE("reports are byte-identical across runs") {
  for (std::vector<std::string> args :
       {std::vector<std::string>{"check", "ccar", data_path("tests_2_2.json")},
        {"hypergraph", "check", data_path("figure3.json")},
        {"simulate", data_path("rmc_two_split.json"), "--n", "500", "--seed", "9"},
        {"demo", "figure4"}}) {
    CliResult first = run_cli(args);
    CliResult second = run_cli(args);
    CHECK(first.out == second.out);
    CHECK(first.code == second.code);
  }
}

TEST_CASE("json reports round-trip through the library") {
  SUBCASE("car witness re-verifies") {
    CliResult result =
        run_cli({"--format", "json", "check", "car", data_path("monty_2_17.json")});
    CHECK(result.code == 0);
    json doc = json::parse(result.out);
    CHECK(doc["verdict"] == "holds");
    CoarseDistribution p = monty_blind_host();
    // nu must match the conditionals of every supported member state.
    for (const auto& [label, value] : doc["details"]["witness"].items()) {
      uint64_t mask = mask_from_label(p.space(), label);
      Rat nu = rat_from_string(value.get<std::string>());
      for (size_t x = 0; x < p.space().size(); ++x) {
        if (((mask >> x) & 1) && p.px(x) > 0) CHECK(p.cond(x, mask) == nu);
      }
    }
  }
  SUBCASE("hypergraph witness re-verifies against the incidence") {
    CliResult result =
        run_cli({"--format", "json", "hypergraph", "check", data_path("figure2b.json")});
    json doc = json::parse(result.out);
    SupportHypergraph h =
        std::get<SupportHypergraph>(parse_model_file(data_path("figure2b.json")).model);
    FeasibilityOutcome outcome;
    outcome.feasible = true;
    for (const auto& node : h.nodes())
      outcome.witness.push_back(
          rat_from_string(doc["details"]["witness"][node.label].get<std::string>()));
    CHECK(verify_feasibility_outcome(h.incidence(), true, outcome));
  }
  SUBCASE("hypergraph certificate re-verifies") {
    CliResult result =
        run_cli({"--format", "json", "hypergraph", "check", data_path("figure3.json")});
    json doc = json::parse(result.out);
    SupportHypergraph h =
        std::get<SupportHypergraph>(parse_model_file(data_path("figure3.json")).model);
    FeasibilityOutcome outcome;
    outcome.feasible = false;
    for (const auto& z : doc["details"]["certificate"])
      outcome.certificate.push_back(Int(z.get<std::string>()));
    CHECK(verify_feasibility_outcome(h.incidence(), true, outcome));
  }
}

TEST_CASE("input problems exit with code 3, caps with code 2") {
  CHECK(run_cli({"check", "car", data_path("no_such_file.json")}).code == 3);
  CHECK(run_cli({"check", "gcar", data_path("monty_2_16.json")}).code == 3);
  CHECK(run_cli({"check", "ccar", data_path("tests_2_2.json"), "--max-covers", "0"}).code == 2);
  CHECK(run_cli({"check", "ccar", data_path("tests_2_2.json"), "--max-states", "2"}).code == 2);
  CHECK(run_cli({"nonsense"}).code == 3);
}
