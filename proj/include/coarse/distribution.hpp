#ifndef COARSE_DISTRIBUTION_HPP
#define COARSE_DISTRIBUTION_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "coarse/rational.hpp"
#include "coarse/space.hpp"

namespace coarse {

/// Exact joint distribution of (X, Y) on the coarse data space: X a state,
/// Y a nonempty subset of states with X in Y. Stored as the marginal of X
/// plus the conditional tables P(Y = U | X = x); absent entries are zero.
class CoarseDistribution {
 public:
  using CondRow = std::map<uint64_t, Rat, SubsetOrder>;

  CoarseDistribution() = default;
  explicit CoarseDistribution(StateSpace space);

  const StateSpace& space() const { return space_; }

  void set_px(size_t state, Rat p);
  void set_cond(size_t state, uint64_t observation_mask, Rat p);

  const Rat& px(size_t state) const { return px_[state]; }
  const std::vector<Rat>& px() const { return px_; }

  /// P(Y = U | X = x). Throws ZeroMarginal when px(x) == 0: conditionals are
  /// undefined off the support.
  Rat cond(size_t state, uint64_t observation_mask) const;
  /// The stored conditional row of a state; empty for zero-mass states.
  const CondRow& cond_row(size_t state) const { return cond_[state]; }

  /// Checks all invariants exactly: px sums to 1; each positive-mass state's
  /// conditional row sums to 1; positive entries satisfy x in U; every stored
  /// U nonempty; no negative probabilities.
  void validate() const;

  /// P(Y = U) = sum_x px(x) cond(x, U).
  Rat marginal_y(const StateSubset& observation) const;
  Rat marginal_y(uint64_t observation_mask) const;

  /// P(X in U).
  Rat event_probability(uint64_t mask) const;

  /// Mask of states with positive marginal probability.
  uint64_t support_mask() const;

  /// Distinct observations with positive marginal, in canonical order.
  std::vector<uint64_t> observations() const;

  /// Projection onto the support: states with zero mass are dropped and every
  /// observation U is replaced by U restricted to the support (rows merge
  /// when restrictions coincide).
  CoarseDistribution restrict_to_support() const;

  /// Exact equality of space, marginals, and conditional tables.
  bool operator==(const CoarseDistribution& other) const;

 private:
  StateSpace space_;
  std::vector<Rat> px_;
  std::vector<CondRow> cond_;
};

/// Exact equality after projecting both distributions onto their supports.
/// This is the right identity notion for round trips that only constrain
/// positive-probability states.
bool equal_on_support(const CoarseDistribution& a, const CoarseDistribution& b);

}  // namespace coarse

#endif
