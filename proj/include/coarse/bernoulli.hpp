#ifndef COARSE_BERNOULLI_HPP
#define COARSE_BERNOULLI_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coarse/distribution.hpp"
#include "coarse/procedural.hpp"
#include "coarse/rational.hpp"
#include "coarse/space.hpp"

namespace coarse {

/// Procedural model whose randomizers are mutually independent of each other
/// and of X: each G_i carries only an unconditional marginal. f is a dense
/// total table over W x Gamma_1 x ... x Gamma_m.
class BernoulliModel {
 public:
  struct Var {
    std::string name;
    std::vector<std::string> values;
    std::vector<Rat> marginal;
  };

  BernoulliModel() = default;
  BernoulliModel(StateSpace space, std::vector<Rat> px, std::vector<Var> vars);

  const StateSpace& space() const { return space_; }
  const std::vector<Rat>& px() const { return px_; }
  const std::vector<Var>& vars() const { return vars_; }

  size_t assignment_count() const;
  size_t assignment_rank(const std::vector<size_t>& values) const;
  std::vector<size_t> assignment_values(size_t rank) const;
  /// Product of the positive-support sizes: the size of the enumeration that
  /// honesty, induction, and extraction walk.
  size_t support_size() const;

  void set_map(size_t state, size_t assignment_rank, uint64_t mask);
  uint64_t map(size_t state, size_t assignment_rank) const;

  void validate() const;

  CoarseDistribution induce(size_t max_support = 1000000) const;

 private:
  StateSpace space_;
  std::vector<Rat> px_;
  std::vector<Var> vars_;
  std::vector<std::vector<uint64_t>> f_;  // [state][assignment]
};

struct HonestyVerdict {
  bool honest = false;
  /// First violation in lexicographic assignment order: f(x1, g) = U with
  /// x2 in U but f(x2, g) != U, all of positive probability.
  struct Violation {
    size_t x1, x2;
    uint64_t observation;
    uint64_t other;  // f(x2, g)
    std::vector<size_t> assignment;
    Rat probability;
  };
  std::optional<Violation> violation;
};

/// Whether the model uses no more information about X than the observation
/// reveals: whenever f(x, g) = U and x' in U, also f(x', g) = U, over every
/// positive-probability assignment and supported pair of states.
HonestyVerdict check_honest(const BernoulliModel& b, size_t max_support = 1000000);

/// Recovers the grouped-data structure of an honest model: assignments are
/// grouped by the observation map they induce on the support, each group's
/// observations form a partition, and the group probabilities become the
/// mixture weights. The induced distribution is preserved exactly. Throws
/// NotHonest for dishonest models; a partition failure under honesty is an
/// internal error.
MgdModel extract_mgd(const BernoulliModel& b, size_t max_support = 1000000);

/// Rebuilds a procedural model as a Bernoulli model over independent copies
/// of its randomizers. Copies are created per distinct kernel row (one copy
/// per distinguishable sampling state), which preserves the induced
/// distribution exactly and keeps X-independent kernels as single shared
/// variables.
BernoulliModel bernoulli_transform(const TabularSequentialModel& m, size_t max_support = 1000000);

BernoulliModel to_bernoulli(const MgdModel& m);
BernoulliModel to_bernoulli(const UniformNoiseModel& m);
/// Finite propose-and-test encoding: `rounds` independent proposals; the
/// first containing x is reported, else the full space. For any unbiased
/// proposal the truncation is still coarsened at random.
BernoulliModel to_bernoulli(const PtModel& m, size_t rounds = 1);
BernoulliModel to_bernoulli(const RmcModel& m, size_t max_support = 1000000);

enum class ProbeMode { Car, Ccar };

struct ProbeResult {
  bool robust_so_far = false;
  struct Break {
    std::string component;    // "px", a variable name, or "joint" for random trials
    std::string description;  // which parameter moved where
    size_t trial = 0;         // 0 = deterministic sweep
    BernoulliModel model;     // the perturbed model, for independent re-checking
  };
  std::optional<Break> broken;
  size_t trials_run = 0;
};

/// One-sided finite probe of robustness: support-preserving perturbations of
/// px and the G marginals, first a deterministic sweep nudging each positive
/// parameter to its two neighbors on the 1/24 grid, then seeded random
/// reweightings. "broken" is conclusive; "robust-so-far" is not.
ProbeResult robustness_probe(const BernoulliModel& b, ProbeMode mode, size_t trials, uint64_t seed,
                             size_t max_support = 1000000);

}  // namespace coarse

#endif
