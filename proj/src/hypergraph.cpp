#include "coarse/hypergraph.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "coarse/errors.hpp"

namespace coarse {

SupportHypergraph::SupportHypergraph(StateSpace edges, std::vector<Node> nodes)
    : edges_(std::move(edges)), nodes_(std::move(nodes)) {
  for (const Node& n : nodes_) {
    if (n.extent & ~edges_.full_mask())
      throw ValidationError("node " + n.label + " has members outside the edge space");
  }
}

SupportHypergraph SupportHypergraph::from_distribution(const CoarseDistribution& p) {
  p.validate();
  uint64_t support = p.support_mask();
  if (support == 0) throw EmptySupport("distribution has empty support");

  std::vector<std::string> edge_labels;
  std::vector<size_t> old_index;
  for (size_t x = 0; x < p.space().size(); ++x) {
    if ((support >> x) & 1) {
      edge_labels.push_back(p.space().label(x));
      old_index.push_back(x);
    }
  }
  StateSpace edges(edge_labels);

  std::vector<Node> nodes;
  for (uint64_t u : p.observations()) {
    uint64_t extent = 0;
    for (size_t e = 0; e < old_index.size(); ++e) {
      if ((u >> old_index[e]) & 1) extent |= 1ull << e;
    }
    nodes.push_back(Node{subset_label(p.space(), u), extent});
  }
  return SupportHypergraph(edges, std::move(nodes));
}

void SupportHypergraph::validate() const {
  if (nodes_.empty()) throw ValidationError("hypergraph has no nodes");
  for (const Node& n : nodes_) {
    if (n.extent == 0)
      throw ValidationError("uncovered node " + n.label + ": contained in no edge");
  }
  for (size_t e = 0; e < edges_.size(); ++e) {
    bool covered = false;
    for (const Node& n : nodes_) covered = covered || ((n.extent >> e) & 1);
    if (!covered) throw ValidationError("empty edge " + edges_.label(e) + ": contains no node");
  }
}

RatMatrix SupportHypergraph::incidence() const {
  RatMatrix a(edges_.size(), std::vector<Rat>(nodes_.size(), Rat(0)));
  for (size_t e = 0; e < edges_.size(); ++e) {
    for (size_t j = 0; j < nodes_.size(); ++j) {
      if ((nodes_[j].extent >> e) & 1) a[e][j] = 1;
    }
  }
  return a;
}

uint64_t SupportHypergraph::edge_nodes(size_t edge) const {
  if (nodes_.size() > 64) throw CapExceeded("edge node-set masks limited to 64 nodes");
  uint64_t m = 0;
  for (size_t j = 0; j < nodes_.size(); ++j) {
    if ((nodes_[j].extent >> edge) & 1) m |= 1ull << j;
  }
  return m;
}

CoarseDistribution SupportHypergraph::realize() const {
  validate();
  size_t k = edges_.size();
  CoarseDistribution out(edges_);
  for (size_t e = 0; e < k; ++e) {
    out.set_px(e, Rat(1, k));
    size_t degree = 0;
    for (const Node& n : nodes_) {
      if ((n.extent >> e) & 1) ++degree;
    }
    std::map<uint64_t, Rat, SubsetOrder> row;
    for (const Node& n : nodes_) {
      if ((n.extent >> e) & 1) row[n.extent] += Rat(1, degree);
    }
    for (const auto& [mask, p] : row) out.set_cond(e, mask, p);
  }
  return out;
}

std::vector<uint64_t> SupportHypergraph::canonical_key() const {
  size_t l = nodes_.size();
  if (l > 8) throw CapExceeded("canonical form limited to 8 nodes");
  size_t k = edges_.size();
  // Edge types as node masks, minimized over node permutations; sorting the
  // type list handles edge relabeling.
  std::vector<uint64_t> types(k, 0);
  for (size_t e = 0; e < k; ++e) {
    for (size_t j = 0; j < l; ++j) {
      if ((nodes_[j].extent >> e) & 1) types[e] |= 1ull << j;
    }
  }
  std::vector<size_t> perm(l);
  std::iota(perm.begin(), perm.end(), 0);
  std::optional<std::vector<uint64_t>> best;
  do {
    std::vector<uint64_t> mapped(k, 0);
    for (size_t e = 0; e < k; ++e) {
      for (size_t j = 0; j < l; ++j) {
        if ((types[e] >> j) & 1) mapped[e] |= 1ull << perm[j];
      }
    }
    std::sort(mapped.begin(), mapped.end());
    if (!best || mapped < *best) best = std::move(mapped);
  } while (std::next_permutation(perm.begin(), perm.end()));
  best->push_back(l);  // node count disambiguates graphs with uncovered-node padding removed
  return *best;
}

std::optional<std::pair<size_t, size_t>> nested_edges_screen(const SupportHypergraph& h) {
  h.validate();
  size_t k = h.edge_count(), l = h.nodes().size();
  std::vector<std::vector<bool>> rows(k, std::vector<bool>(l, false));
  for (size_t e = 0; e < k; ++e) {
    for (size_t j = 0; j < l; ++j) rows[e][j] = (h.nodes()[j].extent >> e) & 1;
  }
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      bool subset = true, proper = false;
      for (size_t n = 0; n < l; ++n) {
        if (rows[i][n] && !rows[j][n]) subset = false;
        if (!rows[i][n] && rows[j][n]) proper = true;
      }
      if (subset && proper) return std::make_pair(i, j);
    }
  }
  return std::nullopt;
}

CompatibilityVerdict check_car_compatible(const SupportHypergraph& h) {
  h.validate();
  RatMatrix a = h.incidence();
  FeasibilityOutcome outcome = solve_exact_feasibility(a, /*strict=*/true);
  CompatibilityVerdict verdict;
  if (outcome.feasible) {
    verdict.compatible = true;
    verdict.nu = std::move(outcome.witness);
    return verdict;
  }
  verdict.compatible = false;
  verdict.certificate = std::move(outcome.certificate);
  for (size_t i = 0; i < verdict.certificate.size(); ++i) {
    for (Int c = 0; c < verdict.certificate[i]; ++c) verdict.sequence_pos.push_back(i);
    for (Int c = 0; c > verdict.certificate[i]; --c) verdict.sequence_neg.push_back(i);
  }
  // The decoded sequences must violate one of the two coverage-count
  // conditions of car-compatibility.
  size_t l = h.nodes().size();
  std::vector<Int> cpos(l, 0), cneg(l, 0);
  for (size_t e : verdict.sequence_pos) {
    for (size_t j = 0; j < l; ++j) {
      if ((h.nodes()[j].extent >> e) & 1) ++cpos[j];
    }
  }
  for (size_t e : verdict.sequence_neg) {
    for (size_t j = 0; j < l; ++j) {
      if ((h.nodes()[j].extent >> e) & 1) ++cneg[j];
    }
  }
  bool equal = cpos == cneg;
  bool pos_le = true, strict_le = false;
  for (size_t j = 0; j < l; ++j) {
    if (cpos[j] > cneg[j]) pos_le = false;
    if (cpos[j] < cneg[j]) strict_le = true;
  }
  bool violates_equal_counts = equal && verdict.sequence_pos.size() != verdict.sequence_neg.size();
  bool violates_dominated = pos_le && strict_le &&
                            verdict.sequence_pos.size() >= verdict.sequence_neg.size();
  if (!violates_equal_counts && !violates_dominated)
    throw InternalInconsistency("incompatibility certificate decoded to non-violating sequences");
  return verdict;
}

std::vector<SupportHypergraph> enumerate_hypergraphs(size_t max_nodes, size_t max_edges,
                                                     const EnumerateOptions& options) {
  if (max_nodes == 0 || max_nodes > options.max_nodes_cap)
    throw CapExceeded("node count outside the enumeration limit");
  if (max_edges == 0 || max_edges > options.max_edges_cap)
    throw CapExceeded("edge count outside the enumeration limit");

  struct Entry {
    std::vector<uint64_t> key;
    size_t nodes;
    std::vector<uint64_t> types;
  };
  std::vector<Entry> entries;

  for (size_t l = 1; l <= max_nodes; ++l) {
    size_t type_count = (1ull << l) - 1;  // nonempty subsets of the nodes
    for (uint64_t chosen = 1; chosen < (1ull << type_count); ++chosen) {
      if (static_cast<size_t>(std::popcount(chosen)) > max_edges) continue;
      uint64_t covered = 0;
      std::vector<uint64_t> types;
      for (size_t t = 0; t < type_count; ++t) {
        if ((chosen >> t) & 1) {
          types.push_back(t + 1);
          covered |= t + 1;
        }
      }
      if (covered != (1ull << l) - 1) continue;  // some node in no edge

      std::vector<std::string> edge_labels;
      for (size_t e = 0; e < types.size(); ++e) edge_labels.push_back("x" + std::to_string(e + 1));
      StateSpace edges(edge_labels);
      std::vector<SupportHypergraph::Node> nodes;
      for (size_t j = 0; j < l; ++j) {
        uint64_t extent = 0;
        for (size_t e = 0; e < types.size(); ++e) {
          if ((types[e] >> j) & 1) extent |= 1ull << e;
        }
        nodes.push_back({"U" + std::to_string(j + 1), extent});
      }
      SupportHypergraph h(edges, nodes);
      entries.push_back({h.canonical_key(), l, types});
    }
  }

  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.nodes != b.nodes) return a.nodes < b.nodes;
    if (a.types.size() != b.types.size()) return a.types.size() < b.types.size();
    return a.key < b.key;
  });
  entries.erase(std::unique(entries.begin(), entries.end(),
                            [](const Entry& a, const Entry& b) { return a.key == b.key; }),
                entries.end());

  std::vector<SupportHypergraph> out;
  for (const Entry& entry : entries) {
    std::vector<std::string> edge_labels;
    for (size_t e = 0; e < entry.types.size(); ++e) edge_labels.push_back("x" + std::to_string(e + 1));
    StateSpace edges(edge_labels);
    std::vector<SupportHypergraph::Node> nodes;
    for (size_t j = 0; j < entry.nodes; ++j) {
      uint64_t extent = 0;
      for (size_t e = 0; e < entry.types.size(); ++e) {
        if ((entry.types[e] >> j) & 1) extent |= 1ull << e;
      }
      nodes.push_back({"U" + std::to_string(j + 1), extent});
    }
    out.emplace_back(edges, std::move(nodes));
  }
  return out;
}

}  // namespace coarse
