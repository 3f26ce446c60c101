#include "coarse/bernoulli.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <map>

#include "coarse/car.hpp"
#include "coarse/errors.hpp"
#include "coarse/rng.hpp"

namespace coarse {

namespace {

void validate_px_sum(const StateSpace& space, const std::vector<Rat>& px) {
  if (px.size() != space.size()) throw DimensionError("px length does not match the state space");
  Rat total = 0;
  for (const Rat& p : px) {
    if (p < 0) throw NormalizationError("negative state probability");
    total += p;
  }
  if (total != 1)
    throw NormalizationError("P(X) sums to " + rat_to_string(total) + ", defect " +
                             rat_to_string(Rat(1) - total));
}

}  // namespace

BernoulliModel::BernoulliModel(StateSpace space, std::vector<Rat> px, std::vector<Var> vars)
    : space_(std::move(space)), px_(std::move(px)), vars_(std::move(vars)) {
  size_t assignments = 1;
  for (const auto& v : vars_) {
    if (v.values.empty()) throw ValidationError("variable '" + v.name + "' has no values");
    if (v.values.size() != v.marginal.size())
      throw DimensionError("marginal of '" + v.name + "' has the wrong width");
    assignments *= v.values.size();
    if (assignments > 10000000) throw CapExceeded("G assignment space too large to materialize");
  }
  f_.assign(space_.size(), std::vector<uint64_t>(assignments, 0));
}

size_t BernoulliModel::assignment_count() const {
  size_t count = 1;
  for (const auto& v : vars_) count *= v.values.size();
  return count;
}

size_t BernoulliModel::assignment_rank(const std::vector<size_t>& values) const {
  size_t rank = 0;
  for (size_t i = 0; i < vars_.size(); ++i) rank = rank * vars_[i].values.size() + values.at(i);
  return rank;
}

std::vector<size_t> BernoulliModel::assignment_values(size_t rank) const {
  std::vector<size_t> out(vars_.size());
  for (size_t i = vars_.size(); i-- > 0;) {
    out[i] = rank % vars_[i].values.size();
    rank /= vars_[i].values.size();
  }
  return out;
}

size_t BernoulliModel::support_size() const {
  size_t total = 1;
  for (const auto& v : vars_) {
    size_t positive = 0;
    for (const Rat& p : v.marginal) {
      if (p > 0) ++positive;
    }
    total *= positive == 0 ? 1 : positive;
  }
  return total;
}

void BernoulliModel::set_map(size_t state, size_t assignment_rank, uint64_t mask) {
  f_.at(state).at(assignment_rank) = mask;
}

uint64_t BernoulliModel::map(size_t state, size_t assignment_rank) const {
  return f_.at(state).at(assignment_rank);
}

void BernoulliModel::validate() const {
  validate_px_sum(space_, px_);
  for (const auto& v : vars_) {
    Rat total = 0;
    for (const Rat& p : v.marginal) {
      if (p < 0) throw NormalizationError("negative probability in '" + v.name + "'");
      total += p;
    }
    if (total != 1)
      throw NormalizationError("marginal of '" + v.name + "' sums to " + rat_to_string(total));
  }
  for (size_t x = 0; x < space_.size(); ++x) {
    for (uint64_t mask : f_[x]) {
      if (mask == 0) throw EmptyObservation("f maps to the empty set at state " + space_.label(x));
    }
  }
}

namespace {

// Walks every assignment with positive product probability in lexicographic
// order, handing (values, rank, probability) to the visitor. Returns false if
// the support size exceeds the cap.
template <typename Visitor>
bool for_each_support_assignment(const BernoulliModel& b, size_t cap, Visitor&& visit) {
  if (b.support_size() > cap) return false;
  std::vector<size_t> values;
  std::function<void(const Rat&)> walk = [&](const Rat& weight) {
    size_t i = values.size();
    if (i == b.vars().size()) {
      visit(values, b.assignment_rank(values), weight);
      return;
    }
    const auto& marg = b.vars()[i].marginal;
    for (size_t v = 0; v < marg.size(); ++v) {
      if (marg[v] == 0) continue;
      values.push_back(v);
      walk(weight * marg[v]);
      values.pop_back();
    }
  };
  walk(Rat(1));
  return true;
}

void check_containment(const BernoulliModel& b, size_t cap) {
  bool ok = for_each_support_assignment(
      b, cap, [&](const std::vector<size_t>&, size_t rank, const Rat&) {
        for (size_t x = 0; x < b.space().size(); ++x) {
          if (b.px()[x] == 0) continue;
          uint64_t u = b.map(x, rank);
          if (!((u >> x) & 1))
            throw MembershipError("f(" + b.space().label(x) + ", ...) = " +
                                  subset_label(b.space(), u) + " does not contain " +
                                  b.space().label(x));
        }
      });
  if (!ok) throw CapExceeded("Bernoulli support enumeration exceeds the configured cap");
}

}  // namespace

CoarseDistribution BernoulliModel::induce(size_t max_support) const {
  validate();
  check_containment(*this, max_support);
  CoarseDistribution out(space_);
  std::vector<std::map<uint64_t, Rat, SubsetOrder>> rows(space_.size());
  bool ok = for_each_support_assignment(
      *this, max_support, [&](const std::vector<size_t>&, size_t rank, const Rat& prob) {
        for (size_t x = 0; x < space_.size(); ++x) {
          if (px_[x] > 0) rows[x][f_[x][rank]] += prob;
        }
      });
  if (!ok) throw CapExceeded("Bernoulli support enumeration exceeds the configured cap");
  for (size_t x = 0; x < space_.size(); ++x) {
    out.set_px(x, px_[x]);
    for (const auto& [mask, p] : rows[x]) {
      if (p != 0) out.set_cond(x, mask, p);
    }
  }
  return out;
}

HonestyVerdict check_honest(const BernoulliModel& b, size_t max_support) {
  b.validate();
  check_containment(b, max_support);
  HonestyVerdict out;
  const StateSpace& space = b.space();
  bool ok = for_each_support_assignment(
      b, max_support, [&](const std::vector<size_t>& values, size_t rank, const Rat& prob) {
        if (out.violation) return;
        for (size_t x1 = 0; x1 < space.size() && !out.violation; ++x1) {
          if (b.px()[x1] == 0) continue;
          uint64_t u = b.map(x1, rank);
          for (size_t x2 = 0; x2 < space.size(); ++x2) {
            if (x2 == x1 || b.px()[x2] == 0 || !((u >> x2) & 1)) continue;
            uint64_t other = b.map(x2, rank);
            if (other != u) {
              out.violation = HonestyVerdict::Violation{x1, x2, u, other, values, prob};
              break;
            }
          }
        }
      });
  if (!ok) throw CapExceeded("Bernoulli support enumeration exceeds the configured cap");
  out.honest = !out.violation.has_value();
  return out;
}

MgdModel extract_mgd(const BernoulliModel& b, size_t max_support) {
  HonestyVerdict honesty = check_honest(b, max_support);
  if (!honesty.honest)
    throw NotHonest("model is not honest; no grouped-data structure to extract");

  const StateSpace& space = b.space();
  std::vector<size_t> support;
  for (size_t x = 0; x < space.size(); ++x) {
    if (b.px()[x] > 0) support.push_back(x);
  }
  if (support.empty()) throw EmptySupport("model has empty support");

  // Group assignments by the observation map they induce on the support;
  // honesty makes these exactly the classes of the grouped-data structure.
  std::map<std::vector<uint64_t>, Rat> classes;
  bool ok = for_each_support_assignment(
      b, max_support, [&](const std::vector<size_t>&, size_t rank, const Rat& prob) {
        std::vector<uint64_t> obs_map;
        obs_map.reserve(support.size());
        for (size_t x : support) obs_map.push_back(b.map(x, rank));
        classes[std::move(obs_map)] += prob;
      });
  if (!ok) throw CapExceeded("Bernoulli support enumeration exceeds the configured cap");

  uint64_t support_mask = 0;
  for (size_t x : support) support_mask |= 1ull << x;
  uint64_t complement = space.full_mask() & ~support_mask;

  MgdModel m;
  m.space = space;
  m.px = b.px();
  for (const auto& [obs_map, weight] : classes) {
    std::vector<uint64_t> blocks;
    uint64_t covered = 0;
    for (uint64_t u : obs_map) {
      uint64_t restricted = u & support_mask;
      if (std::find(blocks.begin(), blocks.end(), restricted) != blocks.end()) continue;
      if (restricted & covered)
        throw InternalInconsistency("honest model produced overlapping observation blocks");
      blocks.push_back(restricted);
      covered |= restricted;
    }
    if (covered != support_mask)
      throw InternalInconsistency("honest model's observation blocks do not cover the support");
    if (complement) blocks.push_back(complement);
    m.partitions.push_back(std::move(blocks));
    m.lambda.push_back(weight);
  }
  m.validate();
  return m;
}

BernoulliModel bernoulli_transform(const TabularSequentialModel& m, size_t max_support) {
  m.validate();
  size_t levels = m.variable_count();

  // One independent copy of G_i per distinct kernel row: sampling states that
  // share a distribution share a copy. Histories are mapped to copy indices.
  std::vector<std::vector<size_t>> copy_of(levels);
  std::vector<std::vector<std::vector<Rat>>> copy_rows(levels);
  std::vector<BernoulliModel::Var> vars;
  std::vector<size_t> offset(levels, 0);
  size_t assignments = 1;
  for (size_t i = 0; i < levels; ++i) {
    offset[i] = vars.size();
    std::map<std::vector<Rat>, size_t> seen;
    copy_of[i].resize(m.history_count(i));
    for (size_t h = 0; h < m.history_count(i); ++h) {
      const auto& row = m.kernel_row(i, h);
      auto it = seen.find(row);
      if (it == seen.end()) {
        size_t idx = copy_rows[i].size();
        seen.emplace(row, idx);
        copy_rows[i].push_back(row);
        copy_of[i][h] = idx;
      } else {
        copy_of[i][h] = it->second;
      }
    }
    for (size_t c = 0; c < copy_rows[i].size(); ++c) {
      vars.push_back(BernoulliModel::Var{"G" + std::to_string(i + 1) + "." + std::to_string(c + 1),
                                         m.gamma(i), copy_rows[i][c]});
      assignments *= m.gamma(i).size();
      if (assignments > max_support)
        throw CapExceeded("Bernoulli transform would exceed the configured cap");
    }
  }

  BernoulliModel b(m.space(), m.px(), vars);
  size_t total = b.assignment_count();
  for (size_t x = 0; x < m.space().size(); ++x) {
    for (size_t rank = 0; rank < total; ++rank) {
      std::vector<size_t> values = b.assignment_values(rank);
      std::vector<size_t> prefix;
      prefix.reserve(levels);
      for (size_t i = 0; i < levels; ++i) {
        size_t copy = copy_of[i][m.history_rank(x, prefix)];
        prefix.push_back(values[offset[i] + copy]);
      }
      b.set_map(x, rank, m.map(x, m.assignment_rank(prefix)));
    }
  }
  return b;
}

BernoulliModel to_bernoulli(const MgdModel& m) {
  m.validate();
  std::vector<std::string> values;
  for (size_t i = 0; i < m.partitions.size(); ++i) values.push_back(std::to_string(i + 1));
  BernoulliModel b(m.space, m.px, {BernoulliModel::Var{"G", values, m.lambda}});
  for (size_t x = 0; x < m.space.size(); ++x) {
    for (size_t i = 0; i < m.partitions.size(); ++i) {
      for (uint64_t block : m.partitions[i]) {
        if ((block >> x) & 1) {
          b.set_map(x, i, block);
          break;
        }
      }
    }
  }
  return b;
}

BernoulliModel to_bernoulli(const UniformNoiseModel& m) {
  m.validate();
  size_t n = m.space.size();
  std::vector<BernoulliModel::Var> vars;
  std::vector<std::string> state_labels = m.space.labels();
  for (size_t i = 0; i < m.steps.size(); ++i) {
    vars.push_back(BernoulliModel::Var{"N" + std::to_string(i + 1),
                                       {"0", "1"},
                                       {Rat(1) - m.steps[i], m.steps[i]}});
    vars.push_back(BernoulliModel::Var{"H" + std::to_string(i + 1), state_labels,
                                       std::vector<Rat>(n, Rat(1, n))});
  }
  BernoulliModel b(m.space, m.px, vars);
  size_t total = b.assignment_count();
  for (size_t x = 0; x < n; ++x) {
    for (size_t rank = 0; rank < total; ++rank) {
      std::vector<size_t> values = b.assignment_values(rank);
      uint64_t u = 1ull << x;
      for (size_t i = 0; i < m.steps.size(); ++i) {
        if (values[2 * i] == 1) u |= 1ull << values[2 * i + 1];
      }
      b.set_map(x, rank, u);
    }
  }
  return b;
}

BernoulliModel to_bernoulli(const PtModel& m, size_t rounds) {
  m.validate();
  if (rounds == 0) throw ValidationError("propose-and-test encoding needs at least one round");
  std::vector<std::string> labels;
  std::vector<Rat> probs;
  std::vector<uint64_t> sets;
  for (const auto& [mask, p] : m.proposal) {
    labels.push_back(subset_label(m.space, mask));
    probs.push_back(p);
    sets.push_back(mask);
  }
  std::vector<BernoulliModel::Var> vars;
  for (size_t i = 0; i < rounds; ++i)
    vars.push_back(BernoulliModel::Var{"G" + std::to_string(i + 1), labels, probs});
  BernoulliModel b(m.space, m.px, vars);
  size_t total = b.assignment_count();
  for (size_t x = 0; x < m.space.size(); ++x) {
    for (size_t rank = 0; rank < total; ++rank) {
      std::vector<size_t> values = b.assignment_values(rank);
      uint64_t u = m.space.full_mask();  // no proposal accepted
      for (size_t i = 0; i < rounds; ++i) {
        if ((sets[values[i]] >> x) & 1) {
          u = sets[values[i]];
          break;
        }
      }
      b.set_map(x, rank, u);
    }
  }
  return b;
}

namespace {

// Tabular encoding of randomized monotone coarsening: one decision variable
// per round, valued "stop" or one of the split sets available at that depth.
// Kernel rows depend on the history only through (stopped, current set), so
// the Bernoulli transform shares copies across states on the same side of
// every past split.
TabularSequentialModel rmc_to_tabular(const RmcModel& m) {
  m.validate();
  uint64_t full = m.space.full_mask();

  std::vector<std::vector<uint64_t>> level_sets{{full}};
  std::vector<std::vector<uint64_t>> level_splits;
  for (;;) {
    std::vector<uint64_t> splits;
    std::vector<uint64_t> next;
    for (uint64_t a : level_sets.back()) {
      auto it = m.tree.find(a);
      if (it == m.tree.end()) continue;
      for (const auto& [h, prob] : it->second.splits) {
        if (prob == 0) continue;
        if (std::find(splits.begin(), splits.end(), h) == splits.end()) splits.push_back(h);
        for (uint64_t child : {h, a & ~h}) {
          if (std::find(next.begin(), next.end(), child) == next.end()) next.push_back(child);
        }
      }
    }
    level_splits.push_back(splits);
    if (splits.empty()) break;
    level_sets.push_back(next);
  }

  size_t rounds = level_splits.size();
  std::vector<std::vector<std::string>> gammas(rounds);
  for (size_t i = 0; i < rounds; ++i) {
    gammas[i].push_back("stop");
    for (uint64_t h : level_splits[i]) gammas[i].push_back(subset_label(m.space, h));
  }

  TabularSequentialModel t(m.space, m.px, gammas);

  // Replays a prefix of decisions for state x. Returns (stopped, current set,
  // reachable) -- unreachable histories get a stop-everything filler row.
  auto replay = [&](size_t x, const std::vector<size_t>& prefix) {
    uint64_t a = full;
    bool stopped = false, reachable = true;
    for (size_t i = 0; i < prefix.size() && reachable; ++i) {
      size_t v = prefix[i];
      if (stopped) {
        if (v != 0) reachable = false;
        continue;
      }
      if (v == 0) {
        stopped = true;
        continue;
      }
      uint64_t h = level_splits[i][v - 1];
      auto it = m.tree.find(a);
      bool offered = false;
      if (it != m.tree.end()) {
        for (const auto& [hh, prob] : it->second.splits) {
          if (hh == h && prob > 0) offered = true;
        }
      }
      if (!offered) {
        reachable = false;
      } else {
        a = ((h >> x) & 1) ? h : (a & ~h);
      }
    }
    return std::tuple<bool, uint64_t, bool>(stopped, a, reachable);
  };

  for (size_t i = 0; i < rounds; ++i) {
    std::vector<size_t> prefix(i);
    size_t histories = t.history_count(i);
    for (size_t h = 0; h < histories; ++h) {
      size_t rest = h;
      for (size_t j = i; j-- > 0;) {
        prefix[j] = rest % gammas[j].size();
        rest /= gammas[j].size();
      }
      size_t x = rest;
      auto [stopped, a, reachable] = replay(x, prefix);
      std::vector<Rat> row(gammas[i].size(), Rat(0));
      auto it = m.tree.find(a);
      if (!reachable || stopped || it == m.tree.end()) {
        row[0] = 1;
      } else {
        row[0] = it->second.stop;
        for (const auto& [split, prob] : it->second.splits) {
          if (prob == 0) continue;
          size_t v = 1 + (std::find(level_splits[i].begin(), level_splits[i].end(), split) -
                          level_splits[i].begin());
          row[v] += prob;
        }
      }
      t.set_kernel_row(i, h, std::move(row));
    }
  }

  size_t total = t.assignment_count();
  for (size_t x = 0; x < m.space.size(); ++x) {
    for (size_t rank = 0; rank < total; ++rank) {
      auto values = t.assignment_values(rank);
      auto [stopped, a, reachable] = replay(x, values);
      (void)stopped;
      (void)reachable;
      t.set_map(x, rank, a);
    }
  }
  return t;
}

}  // namespace

BernoulliModel to_bernoulli(const RmcModel& m, size_t max_support) {
  return bernoulli_transform(rmc_to_tabular(m), max_support);
}

namespace {

bool passes(const BernoulliModel& b, ProbeMode mode, size_t cap) {
  CoarseDistribution induced = b.induce(cap);
  if (mode == ProbeMode::Car) return check_dcar(induced).holds;
  CcarVerdict v = check_dccar(induced);
  // An enumeration cap here is inconclusive, which a one-sided probe must
  // treat as "not shown broken".
  return v.status != CcarVerdict::Status::Fails;
}

// Replaces entry `index` of a distribution with `value` and rescales the
// remaining positive mass, preserving support. Returns nullopt when the move
// is impossible (entry at 1, or value outside (0,1)).
std::optional<std::vector<Rat>> nudge_distribution(const std::vector<Rat>& dist, size_t index,
                                                   const Rat& value) {
  const Rat& old = dist[index];
  if (old <= 0 || old >= 1) return std::nullopt;
  if (value <= 0 || value >= 1 || value == old) return std::nullopt;
  std::vector<Rat> out(dist.size());
  Rat factor = (Rat(1) - value) / (Rat(1) - old);
  for (size_t i = 0; i < dist.size(); ++i) out[i] = i == index ? value : dist[i] * factor;
  return out;
}

std::vector<Rat> reweight_support(Rng& rng, const std::vector<Rat>& dist) {
  std::vector<Rat> weights(dist.size(), Rat(0));
  Rat total = 0;
  for (size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] > 0) {
      weights[i] = Rat(1 + rng.below(24));
      total += weights[i];
    }
  }
  for (Rat& w : weights) w /= total;
  return weights;
}

BernoulliModel with_px(const BernoulliModel& b, std::vector<Rat> px) {
  BernoulliModel fresh(b.space(), std::move(px), b.vars());
  for (size_t x = 0; x < b.space().size(); ++x) {
    for (size_t r = 0; r < b.assignment_count(); ++r) fresh.set_map(x, r, b.map(x, r));
  }
  return fresh;
}

BernoulliModel with_marginal(const BernoulliModel& b, size_t var, std::vector<Rat> marginal) {
  std::vector<BernoulliModel::Var> vars = b.vars();
  vars[var].marginal = std::move(marginal);
  BernoulliModel fresh(b.space(), b.px(), vars);
  for (size_t x = 0; x < b.space().size(); ++x) {
    for (size_t r = 0; r < b.assignment_count(); ++r) fresh.set_map(x, r, b.map(x, r));
  }
  return fresh;
}

}  // namespace

ProbeResult robustness_probe(const BernoulliModel& b, ProbeMode mode, size_t trials, uint64_t seed,
                             size_t max_support) {
  b.validate();
  if (!passes(b, mode, max_support))
    throw Error("model does not satisfy the requested property before perturbation");

  ProbeResult result;
  const Int grid = 24;

  auto neighbors = [&](const Rat& v) {
    Int lower_num = (numerator(v) * grid) / denominator(v);  // floor(24 v)
    std::vector<Rat> out;
    Rat low(lower_num, grid), high(lower_num + 1, grid);
    if (low == v) low = Rat(lower_num - 1, grid);
    out.push_back(low);
    out.push_back(high);
    return out;
  };

  // Deterministic sweep: each positive parameter of px and of every marginal
  // nudged to its two grid neighbors.
  auto sweep_target = [&](const std::vector<Rat>& dist, const std::string& component,
                          auto&& rebuild) -> bool {
    for (size_t i = 0; i < dist.size(); ++i) {
      if (dist[i] <= 0) continue;
      for (const Rat& v : neighbors(dist[i])) {
        auto moved = nudge_distribution(dist, i, v);
        if (!moved) continue;
        BernoulliModel candidate = rebuild(*moved);
        if (!passes(candidate, mode, max_support)) {
          result.broken = ProbeResult::Break{
              component,
              "entry " + std::to_string(i) + ": " + rat_to_string(dist[i]) + " -> " + rat_to_string(v),
              0, std::move(candidate)};
          return true;
        }
      }
    }
    return false;
  };

  if (sweep_target(b.px(), "px", [&](const std::vector<Rat>& d) { return with_px(b, d); })) {
    result.robust_so_far = false;
    return result;
  }
  for (size_t var = 0; var < b.vars().size(); ++var) {
    if (sweep_target(b.vars()[var].marginal, b.vars()[var].name,
                     [&](const std::vector<Rat>& d) { return with_marginal(b, var, d); })) {
      result.robust_so_far = false;
      return result;
    }
  }

  // Seeded random reweightings of everything at once.
  for (size_t t = 1; t <= trials; ++t) {
    Rng rng = Rng::stream(seed, t);
    BernoulliModel candidate = with_px(b, reweight_support(rng, b.px()));
    for (size_t var = 0; var < b.vars().size(); ++var)
      candidate = with_marginal(candidate, var, reweight_support(rng, b.vars()[var].marginal));
    result.trials_run = t;
    if (!passes(candidate, mode, max_support)) {
      result.broken = ProbeResult::Break{"joint", "random reweighting", t, std::move(candidate)};
      result.robust_so_far = false;
      return result;
    }
  }
  result.robust_so_far = true;
  return result;
}

}  // namespace coarse
