#include "coarse/distribution.hpp"

#include <algorithm>
#include <set>

#include "coarse/errors.hpp"

namespace coarse {

CoarseDistribution::CoarseDistribution(StateSpace space)
    : space_(std::move(space)), px_(space_.size(), Rat(0)), cond_(space_.size()) {}

void CoarseDistribution::set_px(size_t state, Rat p) { px_.at(state) = std::move(p); }

void CoarseDistribution::set_cond(size_t state, uint64_t observation_mask, Rat p) {
  if (p == 0) {
    cond_.at(state).erase(observation_mask);
  } else {
    cond_.at(state)[observation_mask] = std::move(p);
  }
}

Rat CoarseDistribution::cond(size_t state, uint64_t observation_mask) const {
  if (px_.at(state) == 0)
    throw ZeroMarginal("conditional P(Y|X=" + space_.label(state) + ") undefined: state has zero probability");
  auto it = cond_[state].find(observation_mask);
  return it == cond_[state].end() ? Rat(0) : it->second;
}

void CoarseDistribution::validate() const {
  Rat total = 0;
  for (size_t x = 0; x < space_.size(); ++x) {
    if (px_[x] < 0)
      throw NormalizationError("P(X=" + space_.label(x) + ") = " + rat_to_string(px_[x]) + " is negative");
    total += px_[x];
  }
  if (total != 1)
    throw NormalizationError("P(X) sums to " + rat_to_string(total) + ", defect " +
                             rat_to_string(Rat(1) - total));
  for (size_t x = 0; x < space_.size(); ++x) {
    Rat row_sum = 0;
    for (const auto& [mask, p] : cond_[x]) {
      if (p < 0)
        throw NormalizationError("P(Y=" + subset_label(space_, mask) + "|X=" + space_.label(x) +
                                 ") is negative");
      if (mask == 0) throw EmptyObservation("empty observation stored for state " + space_.label(x));
      if (p > 0 && !((mask >> x) & 1))
        throw MembershipError("P(Y=" + subset_label(space_, mask) + "|X=" + space_.label(x) +
                              ") = " + rat_to_string(p) + " but " + space_.label(x) +
                              " is not in the observation");
      row_sum += p;
    }
    if (px_[x] > 0 && row_sum != 1)
      throw NormalizationError("P(Y|X=" + space_.label(x) + ") sums to " + rat_to_string(row_sum) +
                               ", defect " + rat_to_string(Rat(1) - row_sum));
  }
}

Rat CoarseDistribution::marginal_y(const StateSubset& observation) const {
  require_same_space(space_, observation.space());
  return marginal_y(observation.mask());
}

Rat CoarseDistribution::marginal_y(uint64_t observation_mask) const {
  Rat total = 0;
  for (size_t x = 0; x < space_.size(); ++x) {
    if (px_[x] == 0) continue;
    auto it = cond_[x].find(observation_mask);
    if (it != cond_[x].end()) total += px_[x] * it->second;
  }
  return total;
}

Rat CoarseDistribution::event_probability(uint64_t mask) const {
  Rat total = 0;
  for (size_t x = 0; x < space_.size(); ++x) {
    if ((mask >> x) & 1) total += px_[x];
  }
  return total;
}

uint64_t CoarseDistribution::support_mask() const {
  uint64_t m = 0;
  for (size_t x = 0; x < space_.size(); ++x) {
    if (px_[x] > 0) m |= 1ull << x;
  }
  return m;
}

std::vector<uint64_t> CoarseDistribution::observations() const {
  std::set<uint64_t, SubsetOrder> seen;
  for (size_t x = 0; x < space_.size(); ++x) {
    if (px_[x] == 0) continue;
    for (const auto& [mask, p] : cond_[x]) {
      if (p > 0) seen.insert(mask);
    }
  }
  return {seen.begin(), seen.end()};
}

CoarseDistribution CoarseDistribution::restrict_to_support() const {
  std::vector<std::string> labels;
  std::vector<size_t> old_index;
  for (size_t x = 0; x < space_.size(); ++x) {
    if (px_[x] > 0) {
      labels.push_back(space_.label(x));
      old_index.push_back(x);
    }
  }
  if (labels.empty()) throw EmptySupport("distribution has empty support");
  StateSpace sub(labels);
  CoarseDistribution out(sub);
  for (size_t nx = 0; nx < old_index.size(); ++nx) {
    out.set_px(nx, px_[old_index[nx]]);
    for (const auto& [mask, p] : cond_[old_index[nx]]) {
      if (p == 0) continue;
      uint64_t restricted = 0;
      for (size_t ny = 0; ny < old_index.size(); ++ny) {
        if ((mask >> old_index[ny]) & 1) restricted |= 1ull << ny;
      }
      auto& row = out.cond_[nx];
      auto it = row.find(restricted);
      if (it == row.end()) {
        row[restricted] = p;
      } else {
        it->second += p;
      }
    }
  }
  return out;
}

bool CoarseDistribution::operator==(const CoarseDistribution& other) const {
  if (!(space_ == other.space_)) return false;
  if (px_ != other.px_) return false;
  for (size_t x = 0; x < space_.size(); ++x) {
    // Compare rows modulo explicit zeros.
    auto nonzero = [](const CondRow& row) {
      CondRow out;
      for (const auto& [m, p] : row) {
        if (p != 0) out[m] = p;
      }
      return out;
    };
    if (nonzero(cond_[x]) != nonzero(other.cond_[x])) return false;
  }
  return true;
}

bool equal_on_support(const CoarseDistribution& a, const CoarseDistribution& b) {
  return a.restrict_to_support() == b.restrict_to_support();
}

}  // namespace coarse
