#ifndef COARSE_FEASIBILITY_HPP
#define COARSE_FEASIBILITY_HPP

#include <vector>

#include "coarse/rational.hpp"

namespace coarse {

using RatMatrix = std::vector<std::vector<Rat>>;

/// Outcome of an exact linear feasibility question: either a rational witness
/// or an integer certificate of infeasibility. Exactly one of the two is
/// populated.
struct FeasibilityOutcome {
  bool feasible = false;

  /// Strict mode: nu with A nu = 1 and nu_j > 0 componentwise.
  /// Non-strict mode: nu >= 0 over all columns of the passed matrix, with the
  /// last component pinned to 1, satisfying A nu = 0.
  std::vector<Rat> witness;

  /// Integer row combination proving infeasibility.
  /// Strict mode: (zA = 0 and z.1 != 0) or (zA <= 0, zA != 0, z.1 >= 0).
  /// Non-strict mode: zA <= 0 with the last component strictly negative.
  std::vector<Int> certificate;
};

/// Decides an exact linear feasibility problem with a rational simplex
/// (Bland's anti-cycling rule, deterministic tie-breaking on column index).
///
/// strict = true: does A nu = 1 admit a strictly positive solution? Solved as
/// max t subject to A nu = 1, nu >= t 1, t <= 1; witness iff the optimum is
/// positive. On failure the integer certificate is recovered from the exact
/// dual and satisfies the FeasibilityOutcome conditions above.
///
/// strict = false: the last column of A is -b and the question is whether
/// A0 x = b has a solution x >= 0 (A0 = all but the last column). The witness
/// is returned with the pinned trailing 1.
///
/// Every outcome is re-verified by independent substitution before being
/// returned; a mismatch throws InternalInconsistency.
FeasibilityOutcome solve_exact_feasibility(const RatMatrix& a, bool strict);

/// Substitution check, independent of the solver internals.
bool verify_feasibility_outcome(const RatMatrix& a, bool strict, const FeasibilityOutcome& outcome);

}  // namespace coarse

#endif
