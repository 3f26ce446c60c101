#include "coarse/car.hpp"

#include <algorithm>
#include <bit>

#include "coarse/errors.hpp"
#include "coarse/feasibility.hpp"

namespace coarse {

CarVerdict check_dcar(const CoarseDistribution& p) {
  p.validate();
  const StateSpace& space = p.space();
  CarVerdict out;
  for (uint64_t u : p.observations()) {
    std::optional<Rat> value;
    std::optional<size_t> first;
    bool violated = false;
    for (size_t x = 0; x < space.size() && !violated; ++x) {
      if (!((u >> x) & 1) || p.px(x) == 0) continue;
      Rat c = p.cond(x, u);
      if (!value) {
        value = c;
        first = x;
      } else if (c != *value) {
        violated = true;
        out.violations.push_back(CarVerdict::Violation{u, *first, x, *value, c});
      }
    }
    if (!violated) out.witness[u] = *value;
  }
  out.holds = out.violations.empty();
  if (!out.holds) {
    out.violation = out.violations.front();
    out.witness.clear();
  }
  return out;
}

namespace {

// Enumerates exact covers of `support` by pairwise disjoint extents, choosing
// at each step the uncovered state with fewest admissible blocks. Nodes are
// observation labels: two observations with equal restricted extents are
// distinct nodes and never share a cover (their extents intersect). Returns
// false when the cap is exceeded.
bool enumerate_exact_covers(uint64_t support, const std::vector<uint64_t>& extents, size_t max_covers,
                            std::vector<std::vector<size_t>>& covers) {
  std::vector<size_t> chosen;
  // Recursive lambda over the uncovered mask.
  auto rec = [&](auto&& self, uint64_t uncovered) -> bool {
    if (uncovered == 0) {
      covers.push_back(chosen);
      return covers.size() <= max_covers;
    }
    // Fail-first: pick the uncovered state admitting the fewest blocks.
    size_t best_state = 64, best_count = SIZE_MAX;
    for (size_t x = 0; x < 64; ++x) {
      if (!((uncovered >> x) & 1)) continue;
      size_t count = 0;
      for (size_t j = 0; j < extents.size(); ++j) {
        if (((extents[j] >> x) & 1) && (extents[j] & ~uncovered) == 0) ++count;
      }
      if (count < best_count) {
        best_count = count;
        best_state = x;
      }
    }
    if (best_count == 0) return true;  // dead branch
    for (size_t j = 0; j < extents.size(); ++j) {
      if (!((extents[j] >> best_state) & 1) || (extents[j] & ~uncovered) != 0) continue;
      chosen.push_back(j);
      bool ok = self(self, uncovered & ~extents[j]);
      chosen.pop_back();
      if (!ok) return false;
    }
    return true;
  };
  return rec(rec, support);
}

}  // namespace

CcarVerdict check_dccar(const CoarseDistribution& p, const CcarOptions& options) {
  CcarVerdict out;
  CarVerdict car = check_dcar(p);
  if (!car.holds) {
    out.status = CcarVerdict::Status::Fails;
    out.fail_reason = CcarVerdict::FailReason::NotCar;
    out.car_violation = car.violation;
    return out;
  }

  uint64_t support = p.support_mask();
  std::vector<uint64_t> observed = p.observations();
  std::vector<uint64_t> extents;
  extents.reserve(observed.size());
  for (uint64_t u : observed) extents.push_back(u & support);

  std::vector<std::vector<size_t>> covers;
  if (!enumerate_exact_covers(support, extents, options.max_covers, covers)) {
    out.status = CcarVerdict::Status::Undecided;
    return out;
  }
  std::sort(covers.begin(), covers.end());

  // Mixture weights: one row per observed U demanding the covers containing U
  // sum to nu(U), plus the normalization row; last column carries -b.
  size_t k = observed.size();
  RatMatrix system(k + 1, std::vector<Rat>(covers.size() + 1, Rat(0)));
  for (size_t i = 0; i < k; ++i) {
    for (size_t c = 0; c < covers.size(); ++c) {
      if (std::find(covers[c].begin(), covers[c].end(), i) != covers[c].end()) system[i][c] = 1;
    }
    system[i].back() = -car.witness.at(observed[i]);
  }
  for (size_t c = 0; c < covers.size(); ++c) system[k][c] = 1;
  system[k].back() = -1;

  FeasibilityOutcome solved = solve_exact_feasibility(system, /*strict=*/false);
  if (!solved.feasible) {
    out.status = CcarVerdict::Status::Fails;
    out.fail_reason = CcarVerdict::FailReason::NoMixture;
    out.cover_count = covers.size();
    out.certificate = solved.certificate;
    return out;
  }

  out.status = CcarVerdict::Status::Holds;
  for (size_t c = 0; c < covers.size(); ++c) {
    if (solved.witness[c] == 0) continue;
    CcarVerdict::Partition part;
    part.weight = solved.witness[c];
    for (size_t node : covers[c]) {
      part.blocks.push_back(extents[node]);
      part.observation_masks.push_back(observed[node]);
    }
    out.witness.push_back(std::move(part));
  }
  return out;
}

std::map<size_t, Rat> update_posterior(const CoarseDistribution& p, const StateSubset& observation) {
  require_same_space(p.space(), observation.space());
  Rat denom = p.marginal_y(observation.mask());
  if (denom == 0)
    throw ZeroObservation("P(Y=" + observation.label() + ") = 0; posterior undefined");
  std::map<size_t, Rat> out;
  for (size_t x : observation.members()) {
    if (p.px(x) == 0) {
      out[x] = 0;
      continue;
    }
    out[x] = p.px(x) * p.cond(x, observation.mask()) / denom;
  }
  return out;
}

std::map<size_t, Rat> naive_condition(const CoarseDistribution& p, const StateSubset& observation) {
  require_same_space(p.space(), observation.space());
  Rat denom = p.event_probability(observation.mask());
  if (denom == 0) throw ZeroEvent("P(X in " + observation.label() + ") = 0; conditional undefined");
  std::map<size_t, Rat> out;
  for (size_t x : observation.members()) out[x] = p.px(x) / denom;
  return out;
}

IgnorabilityReport ignorability_report(const CoarseDistribution& p) {
  p.validate();
  IgnorabilityReport report;
  report.car = check_dcar(p);
  report.max_tv_gap = 0;

  bool posteriors_agree = true;
  bool ratio_identity = true;
  for (uint64_t u : p.observations()) {
    StateSubset obs(p.space(), u);
    auto posterior = update_posterior(p, obs);
    auto naive = naive_condition(p, obs);
    Rat tv = 0;
    for (size_t x : obs.members()) {
      Rat diff = posterior.at(x) - naive.at(x);
      if (diff < 0) diff = -diff;
      tv += diff;
    }
    tv /= 2;
    if (tv != 0) posteriors_agree = false;
    if (tv > report.max_tv_gap) {
      report.max_tv_gap = tv;
      report.gap_observation = u;
    }
    Rat ratio = p.marginal_y(u) / p.event_probability(u);
    for (size_t x : obs.members()) {
      if (p.px(x) > 0 && p.cond(x, u) != ratio) ratio_identity = false;
    }
  }
  report.posteriors_agree = posteriors_agree;
  report.ratio_identity = ratio_identity;

  if (report.car.holds != posteriors_agree || posteriors_agree != ratio_identity)
    throw InternalInconsistency(
        "ignorability conditions disagree: d-car=" + std::to_string(report.car.holds) +
        " posterior=" + std::to_string(posteriors_agree) + " ratio=" + std::to_string(ratio_identity));
  return report;
}

}  // namespace coarse
