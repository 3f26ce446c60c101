#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "coarse/distribution.hpp"
#include "coarse/errors.hpp"
#include "coarse/feasibility.hpp"
#include "coarse/missing.hpp"
#include "coarse/rational.hpp"
#include "coarse/space.hpp"
#include "helpers.hpp"

using namespace coarse;
using namespace coarse::testing;

TEST_CASE("rational text form") {
  CHECK(rat_to_string(Rat(1, 2)) == "1/2");
  CHECK(rat_to_string(Rat(4, 2)) == "2");
  CHECK(rat_to_string(Rat(-3, 6)) == "-1/2");
  CHECK(rat_from_string("7/21") == Rat(1, 3));
  CHECK(rat_from_string("-5") == Rat(-5));
  CHECK(rat_from_string("0") == Rat(0));
  CHECK_THROWS_AS(rat_from_string(""), ParseError);
  CHECK_THROWS_AS(rat_from_string("1/0"), ParseError);
  CHECK_THROWS_AS(rat_from_string("1/-2"), ParseError);
  CHECK_THROWS_AS(rat_from_string("0.5"), ParseError);
}

TEST_CASE("rational arithmetic stays reduced") {
  Rat r(1, 3);
  r += Rat(1, 6);
  CHECK(numerator(r) == 1);
  CHECK(denominator(r) == 2);
}

TEST_CASE("integerize clears denominators and common factors") {
  auto z = integerize({Rat(1, 2), Rat(-1, 2), Rat(1)});
  CHECK(z == std::vector<Int>{Int(1), Int(-1), Int(2)});
  auto scaled = integerize({Rat(2), Rat(4)});
  CHECK(scaled == std::vector<Int>{Int(1), Int(2)});
}

TEST_CASE("state space construction rules") {
  CHECK_THROWS_AS(StateSpace(std::vector<std::string>{}), ValidationError);
  CHECK_THROWS_AS(StateSpace({"a", "a"}), ValidationError);
  CHECK_THROWS_AS(StateSpace(std::vector<std::string>(64, "x")), ValidationError);
  StateSpace s({"a", "b"});
  CHECK(s.size() == 2);
  CHECK(s.require_index("b") == 1);
  CHECK(!s.index_of("c"));
}

TEST_CASE("canonical subset order sorts by size then mask") {
  std::set<uint64_t, SubsetOrder> order{0b11, 0b1, 0b100, 0b101, 0b10};
  std::vector<uint64_t> got(order.begin(), order.end());
  CHECK(got == std::vector<uint64_t>{0b1, 0b10, 0b100, 0b11, 0b101});
}

TEST_CASE("distribution validation") {
  SUBCASE("game show table is a valid coarse data distribution") {
    CHECK_NOTHROW(monty_informed_host().validate());
  }
  SUBCASE("single state") {
    StateSpace s({"a"});
    CoarseDistribution p(s);
    p.set_px(0, Rat(1));
    p.set_cond(0, 1, Rat(1));
    CHECK_NOTHROW(p.validate());
  }
  SUBCASE("marginal defect is reported exactly") {
    StateSpace s({"a", "b"});
    CoarseDistribution p(s);
    p.set_px(0, Rat(1, 2));
    p.set_px(1, Rat(1, 3));
    try {
      p.validate();
      FAIL("expected NormalizationError");
    } catch (const NormalizationError& e) {
      CHECK(std::string(e.what()).find("1/6") != std::string::npos);
    }
  }
  SUBCASE("positive mass outside the observation") {
    StateSpace s({"a", "b"});
    CoarseDistribution p(s);
    p.set_px(0, Rat(1));
    p.set_px(1, Rat(0));
    p.set_cond(0, 0b10, Rat(1));
    CHECK_THROWS_AS(p.validate(), MembershipError);
  }
  SUBCASE("empty observation") {
    StateSpace s({"a"});
    CoarseDistribution p(s);
    p.set_px(0, Rat(1));
    p.set_cond(0, 0, Rat(1));
    CHECK_THROWS_AS(p.validate(), EmptyObservation);
  }
}

TEST_CASE("marginal of the observed set") {
  CoarseDistribution informed = monty_informed_host();
  uint64_t ac = mask_of(informed.space(), {"A", "C"});
  CHECK(informed.marginal_y(ac) == Rat(1, 2));
  CHECK(informed.marginal_y(mask_of(informed.space(), {"B", "C"})) == Rat(0));
  CoarseDistribution blind = monty_blind_host();
  CHECK(blind.marginal_y(mask_of(blind.space(), {"A", "C"})) == Rat(1, 3));

  StateSpace other({"A", "B", "C", "D"});
  CHECK_THROWS_AS(informed.marginal_y(StateSubset(other, 1)), SpaceMismatch);
}

TEST_CASE("conditionals are undefined off the support") {
  CoarseDistribution p = sequential_tests_distribution();
  CHECK(p.cond(0, 1ull << 0) == Rat(1));
  StateSpace s({"a", "b"});
  CoarseDistribution q(s);
  q.set_px(0, Rat(1));
  q.set_cond(0, 1, Rat(1));
  CHECK_THROWS_AS(q.cond(1, 0b10), ZeroMarginal);
}

TEST_CASE("observation sets of missingness records") {
  ProductShape shape = tests_shape();
  const StateSpace& space = shape.tuple_space();

  auto record = [&](std::optional<std::string> a, std::optional<std::string> b) {
    return MissingnessRecord::from_labels(shape, {a, b});
  };
  CHECK(observation_set(shape, record("n", std::nullopt)).mask() ==
        mask_of(space, {"(n,n)", "(n,p)"}));
  CHECK(observation_set(shape, record(std::nullopt, std::nullopt)).mask() == space.full_mask());
  CHECK(observation_set(shape, record("p", "n")).mask() == mask_of(space, {"(p,n)"}));
}

TEST_CASE("missingness indicator") {
  ProductShape shape = tests_shape();
  auto rec = MissingnessRecord::from_labels(shape, {std::optional<std::string>("n"), std::nullopt});
  CHECK(missingness_indicator(rec) == std::vector<bool>{false, true});
  auto full = MissingnessRecord::from_labels(
      shape, {std::optional<std::string>("p"), std::optional<std::string>("p")});
  CHECK(missingness_indicator(full) == std::vector<bool>{false, false});
  auto none = MissingnessRecord::from_labels(shape, {std::nullopt, std::nullopt});
  CHECK(missingness_indicator(none) == std::vector<bool>{true, true});
}

TEST_CASE("missingness coarsening variable maps masks to observation sets") {
  ProductShape shape = tests_shape();
  CoarseningVariable v = missingness_coarsening_variable(shape);
  const StateSpace& space = shape.tuple_space();
  CHECK(v.gamma_size() == 4);

  size_t np = space.require_index("(n,p)");
  size_t m01 = 0;
  for (size_t g = 0; g < v.gamma_size(); ++g) {
    if (v.gamma()[g] == "01") m01 = g;
  }
  CHECK(v.map(np, m01) == mask_of(space, {"(n,n)", "(n,p)"}));

  for (size_t x = 0; x < space.size(); ++x) {
    size_t zeros = 0, ones = 0;
    for (size_t g = 0; g < v.gamma_size(); ++g) {
      if (v.gamma()[g] == "00") zeros = g;
      if (v.gamma()[g] == "11") ones = g;
    }
    CHECK(v.map(x, zeros) == (1ull << x));
    CHECK(v.map(x, ones) == space.full_mask());
  }
}

TEST_CASE("record reconstruction from any member of its observation set") {
  Rng rng(20260809);
  for (int trial = 0; trial < 50; ++trial) {
    size_t k = 1 + rng.below(3);
    std::vector<std::vector<std::string>> comps;
    for (size_t i = 0; i < k; ++i) {
      size_t vals = 1 + rng.below(3);
      std::vector<std::string> labels;
      for (size_t v = 0; v < vals; ++v)
        labels.push_back("v" + std::to_string(i) + std::to_string(v));
      comps.push_back(labels);
    }
    ProductShape shape(comps);
    if (shape.tuple_space().size() > 24) continue;

    MissingnessRecord rec;
    rec.values.resize(k);
    for (size_t i = 0; i < k; ++i) {
      if (rng.below(2)) rec.values[i] = rng.below(comps[i].size());
    }
    auto mask = missingness_indicator(rec);
    StateSubset u = observation_set(shape, rec);
    CHECK(!u.empty());
    for (size_t x : u.members()) {
      MissingnessRecord back = apply_mask(shape, x, mask);
      CHECK(back.values == rec.values);
    }
  }
}

// ---- exact feasibility ----------------------------------------------------

TEST_CASE("strict feasibility on the triangle support") {
  RatMatrix a = {{1, 1, 0}, {1, 0, 1}, {0, 1, 1}};
  FeasibilityOutcome out = solve_exact_feasibility(a, true);
  REQUIRE(out.feasible);
  CHECK(out.witness == std::vector<Rat>{Rat(1, 2), Rat(1, 2), Rat(1, 2)});
}

TEST_CASE("strict feasibility detects the two-against-three contradiction") {
  // Edges x1,x2 each covering all six observations once; x3,x4,x5 also
  // covering all six once. Row sums force 2 = 3.
  RatMatrix a = {{1, 1, 1, 0, 0, 0},
                 {0, 0, 0, 1, 1, 1},
                 {1, 0, 0, 1, 0, 0},
                 {0, 1, 0, 0, 1, 0},
                 {0, 0, 1, 0, 0, 1}};
  FeasibilityOutcome out = solve_exact_feasibility(a, true);
  REQUIRE(!out.feasible);
  CHECK(out.certificate == std::vector<Int>{Int(1), Int(1), Int(-1), Int(-1), Int(-1)});
  Int dot = 0;
  for (const Int& z : out.certificate) dot += z;
  CHECK(dot == -1);
}

TEST_CASE("strict feasibility rejects nested rows") {
  RatMatrix a = {{1, 1}, {1, 0}};
  FeasibilityOutcome out = solve_exact_feasibility(a, true);
  REQUIRE(!out.feasible);
  CHECK(out.certificate == std::vector<Int>{Int(-1), Int(1)});
}

TEST_CASE("non-strict mode solves A x = b with x >= 0 via the pinned column") {
  SUBCASE("feasible") {
    // x1 + x2 = 1, x1 = 1/2  ->  x = (1/2, 1/2)
    RatMatrix a = {{1, 1, -1}, {1, 0, Rat(-1, 2)}};
    FeasibilityOutcome out = solve_exact_feasibility(a, false);
    REQUIRE(out.feasible);
    CHECK(out.witness == std::vector<Rat>{Rat(1, 2), Rat(1, 2), Rat(1)});
  }
  SUBCASE("infeasible with a nonnegativity certificate") {
    // x1 = -1 is unsolvable with x1 >= 0.
    RatMatrix a = {{1, 1}};
    FeasibilityOutcome out = solve_exact_feasibility(a, false);
    REQUIRE(!out.feasible);
    CHECK(verify_feasibility_outcome(a, false, out));
  }
}

TEST_CASE("dimension errors") {
  CHECK_THROWS_AS(solve_exact_feasibility({}, true), DimensionError);
  CHECK_THROWS_AS(solve_exact_feasibility({{Rat(1)}, {}}, true), DimensionError);
}

TEST_CASE("duality completeness against the grid oracle") {
  Rng rng(424242);
  int witnesses = 0, certificates = 0;
  for (int trial = 0; trial < 300; ++trial) {
    size_t k = 1 + rng.below(5), l = 1 + rng.below(5);
    RatMatrix a(k, std::vector<Rat>(l, Rat(0)));
    for (size_t i = 0; i < k; ++i) {
      for (size_t j = 0; j < l; ++j) a[i][j] = Rat(rng.below(2));
    }
    FeasibilityOutcome out = solve_exact_feasibility(a, true);
    CHECK(verify_feasibility_outcome(a, true, out));
    CHECK(out.feasible == out.certificate.empty());
    if (out.feasible) {
      ++witnesses;
    } else {
      ++certificates;
      CHECK(!grid_feasible(a));
    }
  }
  CHECK(witnesses > 0);
  CHECK(certificates > 0);
}
