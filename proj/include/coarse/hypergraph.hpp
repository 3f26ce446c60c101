#ifndef COARSE_HYPERGRAPH_HPP
#define COARSE_HYPERGRAPH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coarse/distribution.hpp"
#include "coarse/feasibility.hpp"
#include "coarse/rational.hpp"
#include "coarse/space.hpp"

namespace coarse {

/// Support structure of a coarse data distribution, in dual form: nodes are
/// the possible observations, edges are the possible states, and an edge
/// contains the nodes whose observation sets it belongs to. Two nodes may
/// have equal extents (distinct observations that the support cannot tell
/// apart); the incidence matrix is derived from the extents, never stored.
class SupportHypergraph {
 public:
  struct Node {
    std::string label;
    uint64_t extent;  // subset of the edge space
  };

  SupportHypergraph() = default;
  SupportHypergraph(StateSpace edges, std::vector<Node> nodes);

  /// Nodes = positively observed sets, edges = positive-mass states; extents
  /// are restricted to the support but labels keep the full observation.
  static SupportHypergraph from_distribution(const CoarseDistribution& p);

  const StateSpace& edge_space() const { return edges_; }
  size_t edge_count() const { return edges_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Every node in at least one edge, every edge nonempty.
  void validate() const;

  /// 0/1 matrix, rows = edges, columns = nodes.
  RatMatrix incidence() const;

  /// Set of node indices an edge belongs to.
  uint64_t edge_nodes(size_t edge) const;

  /// The canonical distribution with this support: uniform on edges, and for
  /// each state the uniform conditional over the nodes containing it.
  CoarseDistribution realize() const;

  /// Lexicographically minimal incidence over all node and edge relabelings;
  /// usable as an isomorphism key at enumeration scale.
  std::vector<uint64_t> canonical_key() const;

 private:
  StateSpace edges_;
  std::vector<Node> nodes_;
};

/// First properly nested pair (contained edge, containing edge), if any.
/// A hit is a fast proof of car-incompatibility.
std::optional<std::pair<size_t, size_t>> nested_edges_screen(const SupportHypergraph& h);

struct CompatibilityVerdict {
  bool compatible = false;
  /// When compatible: strictly positive nu with unit sums along every edge.
  std::vector<Rat> nu;
  /// When not: integer certificate over edges, decoded into the two edge
  /// multisets whose coverage counts coincide improperly.
  std::vector<Int> certificate;
  std::vector<size_t> sequence_pos;  // edges with positive multiplicity
  std::vector<size_t> sequence_neg;  // edges with negative multiplicity
};

/// Exact car-compatibility decision via strict feasibility on the incidence
/// matrix. Certificates are re-verified and decoded to edge sequences.
CompatibilityVerdict check_car_compatible(const SupportHypergraph& h);

struct EnumerateOptions {
  size_t max_nodes_cap = 4;
  size_t max_edges_cap = 6;
};

/// Every valid hypergraph with at most the given number of nodes and of
/// distinct edge types (no duplicate edges), exactly once up to node/edge
/// relabeling, in canonical order.
std::vector<SupportHypergraph> enumerate_hypergraphs(size_t max_nodes, size_t max_edges,
                                                     const EnumerateOptions& options = {});

}  // namespace coarse

#endif
