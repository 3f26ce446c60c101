#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <bit>

#include "coarse/car.hpp"
#include "coarse/errors.hpp"
#include "coarse/hypergraph.hpp"
#include "helpers.hpp"

using namespace coarse;
using namespace coarse::testing;

TEST_CASE("support hypergraph of the informed host") {
  SupportHypergraph h = SupportHypergraph::from_distribution(monty_informed_host());
  CHECK(h.edge_count() == 3);
  REQUIRE(h.nodes().size() == 2);
  CHECK(h.nodes()[0].label == "{A,B}");
  CHECK(h.nodes()[1].label == "{A,C}");
  // Edge A belongs to both observations.
  size_t a = h.edge_space().require_index("A");
  CHECK(((h.nodes()[0].extent >> a) & 1) == 1);
  CHECK(((h.nodes()[1].extent >> a) & 1) == 1);
}

TEST_CASE("support hypergraph of the blind host is the triangle") {
  SupportHypergraph h = SupportHypergraph::from_distribution(monty_blind_host());
  CHECK(h.edge_count() == 3);
  CHECK(h.nodes().size() == 3);
  for (size_t e = 0; e < 3; ++e) {
    size_t degree = 0;
    for (const auto& n : h.nodes()) degree += (n.extent >> e) & 1;
    CHECK(degree == 2);
  }
}

TEST_CASE("full observation gives singleton nodes") {
  StateSpace s({"a", "b", "c"});
  CoarseDistribution p(s);
  for (size_t x = 0; x < 3; ++x) {
    p.set_px(x, Rat(1, 3));
    p.set_cond(x, 1ull << x, Rat(1));
  }
  SupportHypergraph h = SupportHypergraph::from_distribution(p);
  CHECK(h.nodes().size() == 3);
  for (const auto& n : h.nodes()) CHECK(std::popcount(n.extent) == 1);
}

TEST_CASE("validation catches uncovered nodes and empty edges") {
  StateSpace edges({"x1", "x2"});
  SUBCASE("uncovered node") {
    SupportHypergraph h(edges, {{"U1", 0b11}, {"U2", 0}});
    CHECK_THROWS_AS(h.validate(), ValidationError);
  }
  SUBCASE("empty edge") {
    SupportHypergraph h(edges, {{"U1", 0b01}});
    CHECK_THROWS_AS(h.validate(), ValidationError);
  }
  SUBCASE("pairs cover everything") {
    SupportHypergraph h = pairs_hypergraph({"A", "B", "C"}, {{"A", "B"}, {"A", "C"}, {"B", "C"}});
    CHECK_NOTHROW(h.validate());
  }
}

TEST_CASE("realize builds the canonical uniform distribution") {
  SUBCASE("triangle") {
    SupportHypergraph h = pairs_hypergraph({"A", "B", "C"}, {{"A", "B"}, {"A", "C"}, {"B", "C"}});
    CoarseDistribution p = h.realize();
    for (size_t x = 0; x < 3; ++x) {
      CHECK(p.px(x) == Rat(1, 3));
      for (const auto& [mask, prob] : p.cond_row(x)) CHECK(prob == Rat(1, 2));
    }
    CHECK_NOTHROW(p.validate());
  }
  SUBCASE("single node holding every edge") {
    StateSpace edges({"x1", "x2"});
    SupportHypergraph h(edges, {{"U1", 0b11}});
    CoarseDistribution p = h.realize();
    CHECK(p.cond(0, 0b11) == Rat(1));
    CHECK(p.cond(1, 0b11) == Rat(1));
  }
  SUBCASE("two-against-three support") {
    SupportHypergraph h = bipartite_cover_hypergraph();
    CoarseDistribution p = h.realize();
    const StateSpace& edges = h.edge_space();
    CHECK(p.px(0) == Rat(1, 5));
    size_t x1 = edges.require_index("x1"), x3 = edges.require_index("x3");
    for (const auto& [mask, prob] : p.cond_row(x1)) CHECK(prob == Rat(1, 3));
    for (const auto& [mask, prob] : p.cond_row(x3)) CHECK(prob == Rat(1, 2));
  }
}

TEST_CASE("nested edges screen") {
  SUBCASE("informed host contains a nested pair") {
    SupportHypergraph h = SupportHypergraph::from_distribution(monty_informed_host());
    auto nested = nested_edges_screen(h);
    REQUIRE(nested.has_value());
    CHECK(h.edge_space().label(nested->first) == "B");
    CHECK(h.edge_space().label(nested->second) == "A");
  }
  SUBCASE("two-against-three support has none") {
    CHECK(!nested_edges_screen(bipartite_cover_hypergraph()).has_value());
  }
  SUBCASE("duplicate edges are not properly nested") {
    StateSpace edges({"x1", "x2"});
    SupportHypergraph h(edges, {{"U1", 0b11}, {"U2", 0b11}});
    CHECK(!nested_edges_screen(h).has_value());
  }
}

TEST_CASE("car compatibility of the small catalogue members") {
  SUBCASE("triangle is compatible with constant one-half") {
    SupportHypergraph h = pairs_hypergraph({"A", "B", "C"}, {{"A", "B"}, {"A", "C"}, {"B", "C"}});
    CompatibilityVerdict verdict = check_car_compatible(h);
    REQUIRE(verdict.compatible);
    CHECK(verdict.nu == std::vector<Rat>{Rat(1, 2), Rat(1, 2), Rat(1, 2)});
  }
  SUBCASE("two-against-three support is incompatible with the expected sequences") {
    SupportHypergraph h = bipartite_cover_hypergraph();
    CompatibilityVerdict verdict = check_car_compatible(h);
    REQUIRE(!verdict.compatible);
    CHECK(verdict.certificate ==
          std::vector<Int>{Int(1), Int(1), Int(-1), Int(-1), Int(-1)});
    auto label = [&](const std::vector<size_t>& seq) {
      std::vector<std::string> out;
      for (size_t e : seq) out.push_back(h.edge_space().label(e));
      return out;
    };
    CHECK(label(verdict.sequence_pos) == std::vector<std::string>{"x1", "x2"});
    CHECK(label(verdict.sequence_neg) == std::vector<std::string>{"x3", "x4", "x5"});
  }
  SUBCASE("nested support is incompatible and the certificate verifies") {
    SupportHypergraph h = SupportHypergraph::from_distribution(monty_informed_host());
    CompatibilityVerdict verdict = check_car_compatible(h);
    REQUIRE(!verdict.compatible);
    CHECK(!verdict.certificate.empty());
    CHECK(verify_feasibility_outcome(h.incidence(), true,
                                     FeasibilityOutcome{false, {}, verdict.certificate}));
  }
}

TEST_CASE("coverage-count identities of the hard-coded five-edge support") {
  SupportHypergraph h = bipartite_cover_hypergraph();
  auto indicator = [&](const std::vector<std::string>& edges_named) {
    std::vector<int> counts(h.nodes().size(), 0);
    for (const auto& name : edges_named) {
      size_t e = h.edge_space().require_index(name);
      for (size_t j = 0; j < h.nodes().size(); ++j) counts[j] += (h.nodes()[j].extent >> e) & 1;
    }
    return counts;
  };
  CHECK(indicator({"x1", "x2"}) == std::vector<int>(6, 1));
  CHECK(indicator({"x3", "x4", "x5"}) == std::vector<int>(6, 1));
  CHECK(indicator({"x1", "x3", "x4", "x5"}) == std::vector<int>{2, 2, 2, 1, 1, 1});
  CHECK(indicator({"x1", "x1", "x2"}) == std::vector<int>{2, 2, 2, 1, 1, 1});
}

TEST_CASE("enumeration of small hypergraphs") {
  SUBCASE("one node one edge") {
    auto all = enumerate_hypergraphs(1, 1);
    REQUIRE(all.size() == 1);
    CHECK(all[0].nodes().size() == 1);
    CHECK(all[0].edge_count() == 1);
  }
  SUBCASE("two nodes") {
    // Up to relabeling: {U1}{U2}; {U1,U2}; {U1}{U1,U2}; {U1}{U2}{U1,U2};
    // plus the single one-node graph.
    auto all = enumerate_hypergraphs(2, 6);
    CHECK(all.size() == 5);
    for (const auto& h : all) CHECK_NOTHROW(h.validate());
  }
  SUBCASE("caps are enforced") {
    CHECK_THROWS_AS(enumerate_hypergraphs(5, 6), CapExceeded);
    CHECK_THROWS_AS(enumerate_hypergraphs(3, 7), CapExceeded);
  }
}

TEST_CASE("decision coherence over the enumerated range") {
  auto all = enumerate_hypergraphs(3, 6);
  size_t compatible_count = 0;
  for (const auto& h : all) {
    CompatibilityVerdict verdict = check_car_compatible(h);
    if (auto nested = nested_edges_screen(h)) {
      CHECK(!verdict.compatible);
    }
    if (verdict.compatible) {
      ++compatible_count;
      for (const Rat& nu : verdict.nu) {
        CHECK(nu > 0);
        CHECK(nu <= 1);
      }
      // A distribution with these conditionals is coarsened at random.
      CoarseDistribution p(h.edge_space());
      size_t k = h.edge_count();
      for (size_t e = 0; e < k; ++e) {
        p.set_px(e, Rat(1, k));
        std::map<uint64_t, Rat, SubsetOrder> row;
        for (size_t j = 0; j < h.nodes().size(); ++j) {
          if ((h.nodes()[j].extent >> e) & 1) row[h.nodes()[j].extent] += verdict.nu[j];
        }
        for (const auto& [mask, prob] : row) p.set_cond(e, mask, prob);
      }
      p.validate();
      CHECK(check_dcar(p).holds);
    } else {
      CHECK(verify_feasibility_outcome(h.incidence(), true,
                                       FeasibilityOutcome{false, {}, verdict.certificate}));
    }
  }
  CHECK(compatible_count > 0);
}

TEST_CASE("round trip through realize and back") {
  auto all = enumerate_hypergraphs(3, 6);
  for (const auto& h : all) {
    // Two nodes with identical extents collapse into one observation, so the
    // round trip is only claimed for duplicate-free node sets.
    std::vector<uint64_t> extents;
    for (const auto& n : h.nodes()) extents.push_back(n.extent);
    std::sort(extents.begin(), extents.end());
    if (std::adjacent_find(extents.begin(), extents.end()) != extents.end()) continue;

    SupportHypergraph back = SupportHypergraph::from_distribution(h.realize());
    CHECK(back.canonical_key() == h.canonical_key());
  }
}
