#ifndef COARSE_COARSENING_HPP
#define COARSE_COARSENING_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coarse/distribution.hpp"
#include "coarse/rational.hpp"
#include "coarse/space.hpp"

namespace coarse {

/// A coarsening variable (G, f): finite G-value list, a total map
/// f(x, g) -> nonempty subset, and the exact joint P(X = x, G = g).
///
/// Base validity requires x in f(x, g) for positive-probability x and exact
/// normalization of the joint. The Cartesian condition
/// (f(x,g) = U and x' in U imply f(x',g) = U, over positive x, x') is what
/// makes (G, f) a coarsening variable proper; checks that rely on it call
/// validate_cartesian. The induced distribution of (X, f(X, G)) is defined
/// either way, which admits procedural tables that are not Cartesian.
class CoarseningVariable {
 public:
  CoarseningVariable() = default;
  CoarseningVariable(StateSpace space, std::vector<std::string> gamma);

  const StateSpace& space() const { return space_; }
  const std::vector<std::string>& gamma() const { return gamma_; }
  size_t gamma_size() const { return gamma_.size(); }

  void set_map(size_t state, size_t g, uint64_t observation_mask);
  void set_joint(size_t state, size_t g, Rat p);

  uint64_t map(size_t state, size_t g) const { return f_[state][g]; }
  const Rat& joint(size_t state, size_t g) const { return joint_[state][g]; }

  Rat px(size_t state) const;
  /// P(G = g | X = x); throws ZeroMarginal when px(x) = 0.
  Rat cond_g(size_t state, size_t g) const;

  void validate() const;
  /// First violating (x, x', U, g) of the Cartesian condition, if any.
  std::optional<std::tuple<size_t, size_t, uint64_t, size_t>> cartesian_violation() const;
  void validate_cartesian() const;

  /// Joint distribution of (X, f(X, G)).
  CoarseDistribution induced_distribution() const;

 private:
  StateSpace space_;
  std::vector<std::string> gamma_;
  std::vector<std::vector<uint64_t>> f_;    // [state][g] -> mask
  std::vector<std::vector<Rat>> joint_;     // [state][g]
};

struct GcarVerdict {
  bool holds = false;
  /// When holds: constant P(G=g | X=.) per (observation, g) class that meets
  /// the support.
  std::map<std::pair<uint64_t, size_t>, Rat> witness;
  /// When not: (U, g, x, x') with f(x,g) = f(x',g) = U but unequal
  /// conditional probabilities. Canonically least such tuple.
  struct Violation {
    uint64_t observation;
    size_t g;
    size_t x1, x2;
    Rat p1, p2;
  };
  std::optional<Violation> violation;
};

struct GccarVerdict {
  bool holds = false;
  std::map<size_t, Rat> witness;  // g -> constant conditional
  struct Violation {
    size_t g;
    size_t x1, x2;
    Rat p1, p2;
  };
  std::optional<Violation> violation;
};

struct InvertibilityResult {
  bool invertible = false;
  /// When invertible: h mapping each observed U to the unique g producing it.
  std::map<uint64_t, size_t, SubsetOrder> h;
  /// When not: an observation reachable from two distinct g values, or one
  /// whose g does not reproduce it across all members.
  std::optional<std::string> reason;
};

/// P(G = g | X) constant over positive-probability x with f(x, g) = U.
GcarVerdict check_gcar(const CoarseningVariable& v);

/// P(G = g | X) constant over all positive-probability x.
GccarVerdict check_gccar(const CoarseningVariable& v);

/// Whether g is recoverable from the observation alone.
InvertibilityResult check_invertible(const CoarseningVariable& v);

/// The missing-data special cases: require gamma labels to be {0,1}-strings
/// of one common length (the missingness indicator space).
GcarVerdict check_mar(const CoarseningVariable& v);
GccarVerdict check_mcar(const CoarseningVariable& v);

}  // namespace coarse

#endif
