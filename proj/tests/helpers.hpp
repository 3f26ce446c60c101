#ifndef COARSE_TESTS_HELPERS_HPP
#define COARSE_TESTS_HELPERS_HPP

#include <functional>
#include <string>
#include <vector>

#include "coarse/bernoulli.hpp"
#include "coarse/car.hpp"
#include "coarse/coarsening.hpp"
#include "coarse/distribution.hpp"
#include "coarse/hypergraph.hpp"
#include "coarse/missing.hpp"
#include "coarse/procedural.hpp"
#include "coarse/rng.hpp"

namespace coarse::testing {

inline std::string data_path(const std::string& name) {
  return std::string(COARSE_DATA_DIR) + "/" + name;
}

// Independent brute-force oracle for strict car-compatibility: searches nu
// over the rational grid {i/D : 1 <= i <= D} for D = 1..12 for a solution of
// A nu = 1. Deliberately ignorant of the simplex path it double-checks.
inline bool grid_feasible(const std::vector<std::vector<Rat>>& a, int max_den = 12) {
  size_t k = a.size(), l = a[0].size();
  for (int den = 1; den <= max_den; ++den) {
    std::vector<Rat> row_sum(k, Rat(0));
    std::function<bool(size_t)> dfs = [&](size_t j) -> bool {
      if (j == l) {
        for (size_t i = 0; i < k; ++i) {
          if (row_sum[i] != 1) return false;
        }
        return true;
      }
      for (int v = 1; v <= den; ++v) {
        Rat value(v, den);
        for (size_t i = 0; i < k; ++i) row_sum[i] += a[i][j] * value;
        bool ok = true;
        for (size_t i = 0; i < k; ++i) ok = ok && row_sum[i] <= 1;
        if (ok && dfs(j + 1)) return true;
        for (size_t i = 0; i < k; ++i) row_sum[i] -= a[i][j] * value;
        if (!ok) break;  // nonnegative entries only overshoot further
      }
      return false;
    };
    if (dfs(0)) return true;
  }
  return false;
}

inline uint64_t mask_of(const StateSpace& space, std::initializer_list<const char*> labels) {
  uint64_t m = 0;
  for (const char* l : labels) m |= 1ull << space.require_index(l);
  return m;
}

// Game show with doors A,B,C, prize uniform, contestant committed to door A:
// the host opens a goat door he is allowed to open, fair coin among options.
inline CoarseDistribution monty_informed_host() {
  StateSpace doors({"A", "B", "C"});
  CoarseDistribution p(doors);
  for (size_t x = 0; x < 3; ++x) p.set_px(x, Rat(1, 3));
  uint64_t ab = mask_of(doors, {"A", "B"}), ac = mask_of(doors, {"A", "C"});
  p.set_cond(0, ac, Rat(1, 2));
  p.set_cond(0, ab, Rat(1, 2));
  p.set_cond(1, ab, Rat(1));
  p.set_cond(2, ac, Rat(1));
  return p;
}

// Variant where the host has not heard the contestant's choice and only
// avoids the prize door.
inline CoarseDistribution monty_blind_host() {
  StateSpace doors({"A", "B", "C"});
  CoarseDistribution p(doors);
  for (size_t x = 0; x < 3; ++x) p.set_px(x, Rat(1, 3));
  uint64_t ab = mask_of(doors, {"A", "B"});
  uint64_t ac = mask_of(doors, {"A", "C"});
  uint64_t bc = mask_of(doors, {"B", "C"});
  p.set_cond(0, ac, Rat(1, 2));
  p.set_cond(0, ab, Rat(1, 2));
  p.set_cond(1, bc, Rat(1, 2));
  p.set_cond(1, ab, Rat(1, 2));
  p.set_cond(2, bc, Rat(1, 2));
  p.set_cond(2, ac, Rat(1, 2));
  return p;
}

// Two sequential medical tests, the second performed only after a positive
// first result; uniform complete-data marginal.
inline ProductShape tests_shape() { return ProductShape({{"p", "n"}, {"p", "n"}}); }

inline CoarseDistribution sequential_tests_distribution() {
  ProductShape shape = tests_shape();
  const StateSpace& space = shape.tuple_space();
  CoarseDistribution p(space);
  uint64_t n_star = mask_of(space, {"(n,p)", "(n,n)"});
  for (size_t x = 0; x < space.size(); ++x) {
    p.set_px(x, Rat(1, 4));
    if (space.label(x)[1] == 'n') {
      p.set_cond(x, n_star, Rat(1));
    } else {
      p.set_cond(x, 1ull << x, Rat(1));
    }
  }
  return p;
}

// The missingness indicator of the sequential tests, as a coarsening
// variable with deterministic M given X.
inline CoarseningVariable tests_missingness_variable() {
  ProductShape shape = tests_shape();
  CoarseningVariable v = missingness_coarsening_variable(shape);
  const StateSpace& space = shape.tuple_space();
  for (size_t x = 0; x < space.size(); ++x) {
    bool first_negative = space.label(x)[1] == 'n';
    const char* bits = first_negative ? "01" : "00";
    for (size_t g = 0; g < v.gamma_size(); ++g) {
      if (v.gamma()[g] == bits) v.set_joint(x, g, Rat(1, 4));
    }
  }
  return v;
}

// A two-valued coarsening variable inducing the sequential-tests
// distribution whose conditional law depends on the state: a duplicate-label
// construction that breaks G-car without touching the induced data.
inline CoarseningVariable duplicated_label_variable() {
  ProductShape shape = tests_shape();
  const StateSpace& space = shape.tuple_space();
  CoarseningVariable v(space, {"g1", "g2"});
  uint64_t n_star = mask_of(space, {"(n,p)", "(n,n)"});
  for (size_t x = 0; x < space.size(); ++x) {
    uint64_t u = space.label(x)[1] == 'n' ? n_star : (1ull << x);
    v.set_map(x, 0, u);
    v.set_map(x, 1, u);
  }
  size_t nn = space.require_index("(n,n)");
  size_t np = space.require_index("(n,p)");
  size_t pn = space.require_index("(p,n)");
  size_t pp = space.require_index("(p,p)");
  v.set_joint(nn, 0, Rat(1, 4) * Rat(2, 3));
  v.set_joint(nn, 1, Rat(1, 4) * Rat(1, 3));
  v.set_joint(np, 0, Rat(1, 4) * Rat(1, 3));
  v.set_joint(np, 1, Rat(1, 4) * Rat(2, 3));
  v.set_joint(pn, 0, Rat(1, 4));
  v.set_joint(pp, 0, Rat(1, 4));
  return v;
}

inline SupportHypergraph pairs_hypergraph(const std::vector<std::string>& edges,
                                          const std::vector<std::pair<std::string, std::string>>&
                                              node_pairs) {
  StateSpace space(edges);
  std::vector<SupportHypergraph::Node> nodes;
  for (const auto& [a, b] : node_pairs) {
    uint64_t extent = (1ull << space.require_index(a)) | (1ull << space.require_index(b));
    nodes.push_back({subset_label(space, extent), extent});
  }
  return SupportHypergraph(space, nodes);
}

// The car-incompatible six-observation support over five states with no
// nested edges: one state pair covering everything in threes, one triple
// covering it in twos.
inline SupportHypergraph bipartite_cover_hypergraph() {
  StateSpace edges({"x1", "x2", "x3", "x4", "x5"});
  std::vector<SupportHypergraph::Node> nodes;
  auto add = [&](const char* name, std::initializer_list<const char*> members) {
    nodes.push_back({name, mask_of(edges, members)});
  };
  add("U1", {"x1", "x3"});
  add("U2", {"x1", "x4"});
  add("U3", {"x1", "x5"});
  add("U4", {"x2", "x3"});
  add("U5", {"x2", "x4"});
  add("U6", {"x2", "x5"});
  return SupportHypergraph(edges, nodes);
}

// ---- seeded random generators (desk scale) -------------------------------

// Exact distribution over `count` cells: composition of a denominator <= 12.
inline std::vector<Rat> random_distribution(Rng& rng, size_t count, bool strictly_positive) {
  size_t den;
  if (strictly_positive) {
    den = count <= 12 ? count + rng.below(12 - count + 1) : count;
  } else {
    den = 1 + rng.below(12);
  }
  std::vector<size_t> parts(count, strictly_positive ? 1 : 0);
  size_t remaining = den - (strictly_positive ? count : 0);
  for (size_t i = 0; i < remaining; ++i) ++parts[rng.below(count)];
  std::vector<Rat> out(count);
  for (size_t i = 0; i < count; ++i) out[i] = Rat(parts[i], den);
  return out;
}

inline StateSpace random_space(Rng& rng, size_t min_n = 2, size_t max_n = 6) {
  size_t n = min_n + rng.below(max_n - min_n + 1);
  std::vector<std::string> labels;
  for (size_t i = 0; i < n; ++i) labels.push_back("s" + std::to_string(i + 1));
  return StateSpace(labels);
}

inline std::vector<uint64_t> random_partition(Rng& rng, const StateSpace& space) {
  size_t groups = 1 + rng.below(space.size());
  std::vector<uint64_t> blocks(groups, 0);
  for (size_t x = 0; x < space.size(); ++x) blocks[rng.below(groups)] |= 1ull << x;
  std::vector<uint64_t> out;
  for (uint64_t b : blocks) {
    if (b) out.push_back(b);
  }
  return out;
}

inline MgdModel random_mgd(Rng& rng, size_t max_states = 6, bool full_support = true) {
  MgdModel m;
  m.space = random_space(rng, 2, max_states);
  m.px = random_distribution(rng, m.space.size(), full_support);
  if (!full_support) {
    // make sure at least one state has mass
    Rat total = 0;
    for (const Rat& p : m.px) total += p;
    if (total == 0) m.px[0] = 1;
  }
  size_t k = 1 + rng.below(4);
  std::vector<Rat> lambda = random_distribution(rng, k, true);
  for (size_t i = 0; i < k; ++i) {
    m.partitions.push_back(random_partition(rng, m.space));
    m.lambda.push_back(lambda[i]);
  }
  m.validate();
  return m;
}

inline uint64_t random_proper_subset(Rng& rng, uint64_t set) {
  std::vector<size_t> members;
  for (size_t i = 0; i < 64; ++i) {
    if ((set >> i) & 1) members.push_back(i);
  }
  // choose a nonempty proper subset
  uint64_t h = 0;
  do {
    h = 0;
    for (size_t i : members) {
      if (rng.below(2)) h |= 1ull << i;
    }
  } while (h == 0 || h == set);
  return h;
}

inline void random_rmc_node(Rng& rng, RmcModel& m, uint64_t set, size_t depth, size_t max_depth,
                            size_t max_splits) {
  if (m.tree.count(set)) return;
  RmcModel::Node node;
  if (std::popcount(set) == 1 || depth >= max_depth) {
    node.stop = 1;
    m.tree[set] = node;
    return;
  }
  size_t splits = 1 + rng.below(max_splits);
  std::vector<Rat> weights = random_distribution(rng, splits + 1, false);
  // keep at least some stop mass at the root only sometimes; ensure sum is 1
  node.stop = weights[0];
  std::vector<uint64_t> children;
  for (size_t s = 0; s < splits; ++s) {
    uint64_t h = random_proper_subset(rng, set);
    node.splits.emplace_back(h, weights[s + 1]);
    if (weights[s + 1] > 0) {
      children.push_back(h);
      children.push_back(set & ~h);
    }
  }
  m.tree[set] = node;
  for (uint64_t child : children) random_rmc_node(rng, m, child, depth + 1, max_depth, max_splits);
}

inline RmcModel random_rmc(Rng& rng, size_t max_states = 6, size_t max_depth = 3,
                           size_t max_splits = 3) {
  RmcModel m;
  m.space = random_space(rng, 2, max_states);
  m.px = random_distribution(rng, m.space.size(), true);
  random_rmc_node(rng, m, m.space.full_mask(), 0, max_depth, max_splits);
  m.validate();
  return m;
}

inline UniformNoiseModel random_noise(Rng& rng, size_t max_states = 5, size_t max_steps = 3) {
  UniformNoiseModel m;
  m.space = random_space(rng, 2, max_states);
  m.px = random_distribution(rng, m.space.size(), true);
  size_t steps = rng.below(max_steps + 1);
  for (size_t i = 0; i < steps; ++i) m.steps.push_back(Rat(rng.below(13), 12));
  m.validate();
  return m;
}

// Unbiased proposals built from a partition mixture: the per-state acceptance
// mass of such a proposal is constant by construction.
inline PtModel random_pt(Rng& rng, size_t max_states = 6) {
  MgdModel mgd = random_mgd(rng, max_states, true);
  PtModel m;
  m.space = mgd.space;
  m.px = mgd.px;
  std::map<uint64_t, Rat, SubsetOrder> weight;
  Rat total = 0;
  for (size_t i = 0; i < mgd.partitions.size(); ++i) {
    for (uint64_t block : mgd.partitions[i]) {
      weight[block] += mgd.lambda[i];
      total += mgd.lambda[i];
    }
  }
  for (const auto& [mask, w] : weight) m.proposal[mask] = w / total;
  m.validate();
  return m;
}

// A coarsened-at-random distribution that is not a partition mixture when the
// cycle is odd: observations are the consecutive pairs of a cycle, each with
// conditional one half.
inline CoarseDistribution cycle_car_distribution(Rng& rng, size_t n) {
  std::vector<std::string> labels;
  for (size_t i = 0; i < n; ++i) labels.push_back("c" + std::to_string(i + 1));
  StateSpace space(labels);
  CoarseDistribution p(space);
  std::vector<Rat> px = random_distribution(rng, n, true);
  for (size_t x = 0; x < n; ++x) p.set_px(x, px[x]);
  for (size_t x = 0; x < n; ++x) {
    uint64_t left = (1ull << x) | (1ull << ((x + n - 1) % n));
    uint64_t right = (1ull << x) | (1ull << ((x + 1) % n));
    p.set_cond(x, left, Rat(1, 2));
    p.set_cond(x, right, Rat(1, 2));
  }
  p.validate();
  return p;
}

inline CoarseDistribution random_car_distribution(Rng& rng) {
  switch (rng.below(3)) {
    case 0:
      return induce_mgd(random_mgd(rng));
    case 1:
      return induce_pt(random_pt(rng));
    default:
      return cycle_car_distribution(rng, 3 + rng.below(4));
  }
}

// One-variable tabular encoding of a grouped-data model: G picks a partition,
// independent of the state.
inline TabularSequentialModel mgd_as_tabular(const MgdModel& m) {
  std::vector<std::string> gamma;
  for (size_t i = 0; i < m.partitions.size(); ++i) gamma.push_back(std::to_string(i + 1));
  TabularSequentialModel t(m.space, m.px, {gamma});
  for (size_t x = 0; x < m.space.size(); ++x) {
    t.set_kernel_row(0, x, m.lambda);
    for (size_t i = 0; i < m.partitions.size(); ++i) {
      for (uint64_t block : m.partitions[i]) {
        if ((block >> x) & 1) t.set_map(x, i, block);
      }
    }
  }
  return t;
}

inline TabularSequentialModel random_tabular(Rng& rng, size_t max_states = 4, size_t max_vars = 2,
                                             size_t max_gamma = 3) {
  StateSpace space = random_space(rng, 2, max_states);
  std::vector<Rat> px = random_distribution(rng, space.size(), true);
  size_t vars = 1 + rng.below(max_vars);
  std::vector<std::vector<std::string>> gammas;
  for (size_t i = 0; i < vars; ++i) {
    size_t size = 1 + rng.below(max_gamma);
    std::vector<std::string> labels;
    for (size_t v = 0; v < size; ++v)
      labels.push_back("g" + std::to_string(i + 1) + std::to_string(v + 1));
    gammas.push_back(std::move(labels));
  }
  TabularSequentialModel m(space, px, gammas);
  for (size_t i = 0; i < vars; ++i) {
    for (size_t h = 0; h < m.history_count(i); ++h)
      m.set_kernel_row(i, h, random_distribution(rng, gammas[i].size(), rng.below(2) == 0));
  }
  uint64_t full = space.full_mask();
  for (size_t x = 0; x < space.size(); ++x) {
    for (size_t rank = 0; rank < m.assignment_count(); ++rank) {
      uint64_t extra = rng.next() & full;
      m.set_map(x, rank, (1ull << x) | extra);
    }
  }
  m.validate();
  return m;
}

}  // namespace coarse::testing

#endif
