#ifndef COARSE_CAR_HPP
#define COARSE_CAR_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "coarse/distribution.hpp"
#include "coarse/rational.hpp"

namespace coarse {

/// Verdict of the distributional coarsened-at-random check.
struct CarVerdict {
  bool holds = false;
  /// When holds: nu(U), the common conditional probability of each positively
  /// observed U across its positive-mass members.
  std::map<uint64_t, Rat, SubsetOrder> witness;
  struct Violation {
    uint64_t observation;
    size_t x1, x2;
    Rat p1, p2;  // the unequal conditionals
  };
  /// When not: every violating observation with its least unequal pair, in
  /// canonical order.
  std::vector<Violation> violations;
  /// The canonically least violation.
  std::optional<Violation> violation;
};

/// Verdict of the distributional ccar check. "Undecided" is reported when the
/// exact-cover enumeration hits its cap; it is distinct from "fails".
struct CcarVerdict {
  enum class Status { Holds, Fails, Undecided };
  Status status = Status::Fails;
  bool holds() const { return status == Status::Holds; }

  /// When holds: a mixture of partitions of the support. Blocks are the
  /// support-restricted extents; observation_masks carries the full original
  /// observations labeling the blocks, aligned with blocks.
  struct Partition {
    std::vector<uint64_t> blocks;
    std::vector<uint64_t> observation_masks;
    Rat weight;
  };
  std::vector<Partition> witness;

  enum class FailReason { None, NotCar, NoMixture };
  FailReason fail_reason = FailReason::None;
  std::optional<CarVerdict::Violation> car_violation;  // when NotCar
  size_t cover_count = 0;                              // when NoMixture
  std::vector<Int> certificate;  // infeasibility certificate over observation rows + the sum row
};

struct CcarOptions {
  size_t max_covers = 1000000;
};

/// d-car: P(Y = U | X) constant on the positive-mass part of U, for every U.
CarVerdict check_dcar(const CoarseDistribution& p);

/// d-ccar: the conditional law decomposes as a mixture of partitions of the
/// support with state-independent weights. Gates on d-car, enumerates exact
/// covers of the support by restricted extents of observed sets, and solves
/// the exact non-strict feasibility system for the mixture weights.
CcarVerdict check_dccar(const CoarseDistribution& p, const CcarOptions& options = {});

/// P(X = x | Y = U) for x in U, exact. Throws ZeroObservation when
/// P(Y = U) = 0.
std::map<size_t, Rat> update_posterior(const CoarseDistribution& p, const StateSubset& observation);

/// P(X = x | X in U): conditioning on the event, ignoring how it was
/// observed. Throws ZeroEvent when P(X in U) = 0.
std::map<size_t, Rat> naive_condition(const CoarseDistribution& p, const StateSubset& observation);

/// Checks the three equivalent ignorability conditions independently:
/// (i) d-car, (ii) posterior = naive conditional for every positively
/// observed U, (iii) cond(x, U) = P(Y=U)/P(X in U) on the support. Throws
/// InternalInconsistency if the three verdicts ever disagree.
struct IgnorabilityReport {
  CarVerdict car;
  bool posteriors_agree = false;
  bool ratio_identity = false;
  /// Largest total-variation distance between the two posteriors, and where.
  Rat max_tv_gap;
  std::optional<uint64_t> gap_observation;
};

IgnorabilityReport ignorability_report(const CoarseDistribution& p);

}  // namespace coarse

#endif
