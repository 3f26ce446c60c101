#include "coarse/procedural.hpp"

#include <algorithm>
#include <bit>
#include <functional>

#include "coarse/errors.hpp"
#include "coarse/rng.hpp"

namespace coarse {

namespace {

void validate_px(const StateSpace& space, const std::vector<Rat>& px) {
  if (px.size() != space.size()) throw DimensionError("px length does not match the state space");
  Rat total = 0;
  for (size_t x = 0; x < px.size(); ++x) {
    if (px[x] < 0)
      throw NormalizationError("P(X=" + space.label(x) + ") = " + rat_to_string(px[x]) + " is negative");
    total += px[x];
  }
  if (total != 1)
    throw NormalizationError("P(X) sums to " + rat_to_string(total) + ", defect " +
                             rat_to_string(Rat(1) - total));
}

void validate_partition(const StateSpace& space, const std::vector<uint64_t>& blocks) {
  uint64_t seen = 0;
  for (uint64_t b : blocks) {
    if (b == 0) throw ValidationError("partition contains an empty block");
    if (b & seen) throw ValidationError("partition blocks overlap");
    seen |= b;
  }
  if (seen != space.full_mask()) throw ValidationError("partition does not cover the state space");
}

size_t draw_state(Rng& rng, const std::vector<Rat>& px) { return sample_categorical(rng, px); }

}  // namespace

void MgdModel::validate() const {
  validate_px(space, px);
  if (partitions.empty() || partitions.size() != lambda.size())
    throw DimensionError("partition list and lambda must be nonempty and aligned");
  Rat total = 0;
  for (const Rat& l : lambda) {
    if (l <= 0) throw ValidationError("lambda components must be strictly positive");
    total += l;
  }
  if (total != 1)
    throw NormalizationError("lambda sums to " + rat_to_string(total) + ", defect " +
                             rat_to_string(Rat(1) - total));
  for (const auto& blocks : partitions) validate_partition(space, blocks);
}

void RmcModel::validate() const {
  validate_px(space, px);
  // Walk the reachable current sets; every non-singleton must carry a spec.
  std::vector<uint64_t> stack{space.full_mask()};
  std::map<uint64_t, bool> visited;
  while (!stack.empty()) {
    uint64_t a = stack.back();
    stack.pop_back();
    if (visited[a]) continue;
    visited[a] = true;
    auto it = tree.find(a);
    if (it == tree.end()) {
      if (std::popcount(a) == 1) continue;  // singletons stop implicitly
      throw NonterminatingSpec("reachable set " + subset_label(space, a) +
                               " has no stop mass and no splits");
    }
    const Node& node = it->second;
    if (node.stop < 0) throw ValidationError("negative stop probability");
    Rat total = node.stop;
    for (const auto& [h, prob] : node.splits) {
      if (prob < 0) throw ValidationError("negative split probability");
      if (h == 0 || (h & ~a) != 0 || h == a)
        throw ValidationError("split " + subset_label(space, h) + " is not a proper nonempty subset of " +
                              subset_label(space, a));
      total += prob;
      if (prob > 0) {
        stack.push_back(h);
        stack.push_back(a & ~h);
      }
    }
    if (total != 1)
      throw NormalizationError("choices at " + subset_label(space, a) + " sum to " + rat_to_string(total));
  }
}

void UniformNoiseModel::validate() const {
  validate_px(space, px);
  for (const Rat& p : steps) {
    if (p < 0 || p > 1) throw ValidationError("noise probability " + rat_to_string(p) + " outside [0,1]");
  }
}

void PtModel::validate() const {
  validate_px(space, px);
  Rat total = 0;
  for (const auto& [mask, p] : proposal) {
    if (mask == 0) throw EmptyObservation("proposal assigns mass to the empty set");
    if (p < 0) throw ValidationError("negative proposal probability");
    total += p;
  }
  if (total != 1)
    throw NormalizationError("proposal sums to " + rat_to_string(total) + ", defect " +
                             rat_to_string(Rat(1) - total));
  std::optional<Rat> constant;
  for (size_t x = 0; x < space.size(); ++x) {
    if (px[x] == 0) continue;
    Rat s = 0;
    for (const auto& [mask, p] : proposal) {
      if ((mask >> x) & 1) s += p;
    }
    if (!constant) {
      constant = s;
    } else if (*constant != s) {
      throw UnbiasednessViolation("acceptance mass differs across supported states: " +
                                  rat_to_string(*constant) + " vs " + rat_to_string(s) + " at " +
                                  space.label(x));
    }
  }
  if (!constant || *constant == 0)
    throw UnbiasednessViolation("acceptance mass must be positive on the support");
}

Rat PtModel::acceptance_constant() const {
  for (size_t x = 0; x < space.size(); ++x) {
    if (px[x] == 0) continue;
    Rat s = 0;
    for (const auto& [mask, p] : proposal) {
      if ((mask >> x) & 1) s += p;
    }
    return s;
  }
  throw EmptySupport("model has empty support");
}

TabularSequentialModel::TabularSequentialModel(StateSpace space, std::vector<Rat> px,
                                               std::vector<std::vector<std::string>> gammas)
    : space_(std::move(space)), px_(std::move(px)), gammas_(std::move(gammas)) {
  size_t assignments = 1;
  for (const auto& g : gammas_) {
    if (g.empty()) throw ValidationError("a G variable has an empty state space");
    assignments *= g.size();
    if (assignments > 10000000) throw CapExceeded("G assignment space too large to materialize");
  }
  kernels_.resize(gammas_.size());
  for (size_t i = 0; i < gammas_.size(); ++i)
    kernels_[i].assign(history_count(i), std::vector<Rat>(gammas_[i].size(), Rat(0)));
  f_.assign(space_.size(), std::vector<uint64_t>(assignments, 0));
}

size_t TabularSequentialModel::history_count(size_t i) const {
  size_t count = space_.size();
  for (size_t j = 0; j < i; ++j) count *= gammas_[j].size();
  return count;
}

size_t TabularSequentialModel::history_rank(size_t state, const std::vector<size_t>& prefix) const {
  size_t rank = state;
  for (size_t j = 0; j < prefix.size(); ++j) rank = rank * gammas_[j].size() + prefix[j];
  return rank;
}

void TabularSequentialModel::set_kernel_row(size_t i, size_t history_rank, std::vector<Rat> row) {
  if (row.size() != gammas_.at(i).size()) throw DimensionError("kernel row has the wrong width");
  kernels_.at(i).at(history_rank) = std::move(row);
}

const std::vector<Rat>& TabularSequentialModel::kernel_row(size_t i, size_t history_rank) const {
  return kernels_.at(i).at(history_rank);
}

size_t TabularSequentialModel::assignment_count() const {
  size_t count = 1;
  for (const auto& g : gammas_) count *= g.size();
  return count;
}

size_t TabularSequentialModel::assignment_rank(const std::vector<size_t>& values) const {
  size_t rank = 0;
  for (size_t i = 0; i < gammas_.size(); ++i) rank = rank * gammas_[i].size() + values.at(i);
  return rank;
}

std::vector<size_t> TabularSequentialModel::assignment_values(size_t rank) const {
  std::vector<size_t> out(gammas_.size());
  for (size_t i = gammas_.size(); i-- > 0;) {
    out[i] = rank % gammas_[i].size();
    rank /= gammas_[i].size();
  }
  return out;
}

void TabularSequentialModel::set_map(size_t state, size_t assignment_rank, uint64_t mask) {
  f_.at(state).at(assignment_rank) = mask;
}

uint64_t TabularSequentialModel::map(size_t state, size_t assignment_rank) const {
  return f_.at(state).at(assignment_rank);
}

void TabularSequentialModel::validate() const {
  validate_px(space_, px_);
  for (size_t i = 0; i < gammas_.size(); ++i) {
    for (size_t h = 0; h < kernels_[i].size(); ++h) {
      Rat total = 0;
      for (const Rat& p : kernels_[i][h]) {
        if (p < 0) throw ValidationError("negative kernel probability");
        total += p;
      }
      if (total != 1)
        throw NormalizationError("kernel " + std::to_string(i + 1) + " row " + std::to_string(h) +
                                 " sums to " + rat_to_string(total));
    }
  }
  for (size_t x = 0; x < space_.size(); ++x) {
    for (uint64_t mask : f_[x]) {
      if (mask == 0) throw EmptyObservation("f maps to the empty set at state " + space_.label(x));
    }
  }
  // Containment along reachable assignments of supported states.
  for (size_t x = 0; x < space_.size(); ++x) {
    if (px_[x] == 0) continue;
    std::vector<size_t> prefix;
    std::function<void()> walk = [&]() {
      size_t i = prefix.size();
      if (i == gammas_.size()) {
        uint64_t u = f_[x][assignment_rank(prefix)];
        if (!((u >> x) & 1))
          throw MembershipError("f(" + space_.label(x) + ", ...) = " + subset_label(space_, u) +
                                " does not contain " + space_.label(x));
        return;
      }
      const auto& row = kernels_[i][history_rank(x, prefix)];
      for (size_t v = 0; v < row.size(); ++v) {
        if (row[v] == 0) continue;
        prefix.push_back(v);
        walk();
        prefix.pop_back();
      }
    };
    walk();
  }
}

CoarseDistribution induce_mgd(const MgdModel& m) {
  m.validate();
  CoarseDistribution out(m.space);
  for (size_t x = 0; x < m.space.size(); ++x) {
    out.set_px(x, m.px[x]);
    if (m.px[x] == 0) continue;
    std::map<uint64_t, Rat, SubsetOrder> row;
    for (size_t i = 0; i < m.partitions.size(); ++i) {
      for (uint64_t block : m.partitions[i]) {
        if ((block >> x) & 1) {
          row[block] += m.lambda[i];
          break;
        }
      }
    }
    for (const auto& [mask, p] : row) out.set_cond(x, mask, p);
  }
  return out;
}

CoarseDistribution induce_rmc(const RmcModel& m) {
  m.validate();
  CoarseDistribution out(m.space);
  for (size_t x = 0; x < m.space.size(); ++x) {
    out.set_px(x, m.px[x]);
    if (m.px[x] == 0) continue;
    std::map<uint64_t, Rat, SubsetOrder> finals;
    std::function<void(uint64_t, const Rat&)> walk = [&](uint64_t a, const Rat& weight) {
      auto it = m.tree.find(a);
      if (it == m.tree.end()) {
        finals[a] += weight;  // implicit stop at a singleton
        return;
      }
      const RmcModel::Node& node = it->second;
      if (node.stop > 0) finals[a] += weight * node.stop;
      for (const auto& [h, prob] : node.splits) {
        if (prob == 0) continue;
        uint64_t child = ((h >> x) & 1) ? h : (a & ~h);
        walk(child, weight * prob);
      }
    };
    walk(m.space.full_mask(), Rat(1));
    for (const auto& [mask, p] : finals) out.set_cond(x, mask, p);
  }
  return out;
}

CoarseDistribution induce_noise(const UniformNoiseModel& m) {
  m.validate();
  size_t n = m.space.size();
  // Exact distribution of the noise set S.
  std::map<uint64_t, Rat> noise{{0, Rat(1)}};
  for (const Rat& p : m.steps) {
    if (p == 0) continue;
    std::map<uint64_t, Rat> next;
    for (const auto& [s, q] : noise) {
      if (p < 1) next[s] += q * (1 - p);
      Rat add = q * p / Rat(n);
      for (size_t w = 0; w < n; ++w) next[s | (1ull << w)] += add;
    }
    noise = std::move(next);
  }
  CoarseDistribution out(m.space);
  for (size_t x = 0; x < n; ++x) {
    out.set_px(x, m.px[x]);
    if (m.px[x] == 0) continue;
    std::map<uint64_t, Rat, SubsetOrder> row;
    for (const auto& [s, q] : noise) row[s | (1ull << x)] += q;
    for (const auto& [mask, p] : row) {
      if (p != 0) out.set_cond(x, mask, p);
    }
  }
  return out;
}

CoarseDistribution induce_pt(const PtModel& m) {
  m.validate();
  Rat accept = m.acceptance_constant();
  CoarseDistribution out(m.space);
  for (size_t x = 0; x < m.space.size(); ++x) {
    out.set_px(x, m.px[x]);
    if (m.px[x] == 0) continue;
    for (const auto& [mask, p] : m.proposal) {
      if (p > 0 && ((mask >> x) & 1)) out.set_cond(x, mask, p / accept);
    }
  }
  return out;
}

CoarseDistribution induce_tabular(const TabularSequentialModel& m, const InduceOptions& options) {
  m.validate();
  if (m.assignment_count() > options.max_assignments)
    throw CapExceeded("G assignment space exceeds the configured cap");
  CoarseDistribution out(m.space());
  for (size_t x = 0; x < m.space().size(); ++x) {
    out.set_px(x, m.px()[x]);
    if (m.px()[x] == 0) continue;
    std::map<uint64_t, Rat, SubsetOrder> row;
    std::vector<size_t> values;
    std::function<void(const Rat&)> walk = [&](const Rat& weight) {
      size_t i = values.size();
      if (i == m.variable_count()) {
        row[m.map(x, m.assignment_rank(values))] += weight;
        return;
      }
      const auto& kernel = m.kernel_row(i, m.history_rank(x, values));
      for (size_t v = 0; v < kernel.size(); ++v) {
        if (kernel[v] == 0) continue;
        values.push_back(v);
        walk(weight * kernel[v]);
        values.pop_back();
      }
    };
    walk(Rat(1));
    for (const auto& [mask, p] : row) out.set_cond(x, mask, p);
  }
  return out;
}

TabularSequentialModel build_direct(const CoarseDistribution& p) {
  CarVerdict car = check_dcar(p);
  if (!car.holds) throw NotCar("distribution is not coarsened at random; no direct model exists");
  std::vector<uint64_t> observed = p.observations();
  if (observed.empty()) throw EmptySupport("distribution has no observations");
  std::vector<std::string> gamma;
  gamma.reserve(observed.size());
  for (uint64_t u : observed) gamma.push_back(subset_label(p.space(), u));
  TabularSequentialModel m(p.space(), p.px(), {gamma});
  for (size_t x = 0; x < p.space().size(); ++x) {
    std::vector<Rat> row(observed.size(), Rat(0));
    if (p.px(x) > 0) {
      for (size_t g = 0; g < observed.size(); ++g) row[g] = p.cond(x, observed[g]);
    } else {
      row[0] = 1;  // arbitrary valid row; zero-mass states are never reached
    }
    m.set_kernel_row(0, x, std::move(row));
    for (size_t g = 0; g < observed.size(); ++g) m.set_map(x, g, observed[g]);
  }
  return m;
}

PtModel build_pt(const CoarseDistribution& p) {
  CarVerdict car = check_dcar(p);
  if (!car.holds) throw NotCar("distribution is not coarsened at random; no propose-and-test model");
  PtModel m;
  m.space = p.space();
  m.px = p.px();
  Rat c = 0;
  for (const auto& [u, nu] : car.witness) c += nu;
  for (const auto& [u, nu] : car.witness) m.proposal[u] = nu / c;
  m.validate();
  return m;
}

MgdModel build_mgd(const CoarseDistribution& p, const CcarOptions& options) {
  CcarVerdict verdict = check_dccar(p, options);
  if (verdict.status == CcarVerdict::Status::Undecided)
    throw CapExceeded("ccar check hit the exact-cover cap");
  if (!verdict.holds())
    throw NotCcar("distribution is not coarsened completely at random; no grouped-data model");
  MgdModel m;
  m.space = p.space();
  m.px = p.px();
  uint64_t complement = p.space().full_mask() & ~p.support_mask();
  for (const auto& part : verdict.witness) {
    std::vector<uint64_t> blocks = part.blocks;
    if (complement) blocks.push_back(complement);
    m.partitions.push_back(std::move(blocks));
    m.lambda.push_back(part.weight);
  }
  m.validate();
  return m;
}

namespace {

SimulationTable make_table(const StateSpace& space, uint64_t n) {
  SimulationTable t;
  t.space = space;
  t.samples = n;
  return t;
}

}  // namespace

SimulationTable simulate(const MgdModel& m, uint64_t n_samples, uint64_t seed) {
  m.validate();
  SimulationTable table = make_table(m.space, n_samples);
  for (uint64_t s = 0; s < n_samples; ++s) {
    Rng rng = Rng::stream(seed, s);
    size_t x = draw_state(rng, m.px);
    size_t i = sample_categorical(rng, m.lambda);
    uint64_t u = 0;
    for (uint64_t block : m.partitions[i]) {
      if ((block >> x) & 1) {
        u = block;
        break;
      }
    }
    ++table.counts[{x, u}];
  }
  return table;
}

SimulationTable simulate(const RmcModel& m, uint64_t n_samples, uint64_t seed) {
  m.validate();
  SimulationTable table = make_table(m.space, n_samples);
  for (uint64_t s = 0; s < n_samples; ++s) {
    Rng rng = Rng::stream(seed, s);
    size_t x = draw_state(rng, m.px);
    uint64_t a = m.space.full_mask();
    for (;;) {
      auto it = m.tree.find(a);
      if (it == m.tree.end()) break;  // singleton stop
      const RmcModel::Node& node = it->second;
      std::vector<Rat> weights{node.stop};
      for (const auto& [h, prob] : node.splits) weights.push_back(prob);
      size_t pick = sample_categorical(rng, weights);
      if (pick == 0) break;
      uint64_t h = node.splits[pick - 1].first;
      a = ((h >> x) & 1) ? h : (a & ~h);
    }
    ++table.counts[{x, a}];
  }
  return table;
}

SimulationTable simulate(const UniformNoiseModel& m, uint64_t n_samples, uint64_t seed) {
  m.validate();
  SimulationTable table = make_table(m.space, n_samples);
  size_t n = m.space.size();
  for (uint64_t s = 0; s < n_samples; ++s) {
    Rng rng = Rng::stream(seed, s);
    size_t x = draw_state(rng, m.px);
    uint64_t u = 1ull << x;
    for (const Rat& p : m.steps) {
      size_t event = sample_categorical(rng, {Rat(1) - p, p});
      if (event == 1) u |= 1ull << rng.below(n);
    }
    ++table.counts[{x, u}];
  }
  return table;
}

SimulationTable simulate(const PtModel& m, uint64_t n_samples, uint64_t seed) {
  m.validate();
  SimulationTable table = make_table(m.space, n_samples);
  std::vector<uint64_t> sets;
  std::vector<Rat> weights;
  for (const auto& [mask, p] : m.proposal) {
    sets.push_back(mask);
    weights.push_back(p);
  }
  constexpr int kMaxRetries = 10000;
  for (uint64_t s = 0; s < n_samples; ++s) {
    Rng rng = Rng::stream(seed, s);
    size_t x = draw_state(rng, m.px);
    int tries = 0;
    uint64_t u = 0;
    for (;;) {
      if (++tries > kMaxRetries)
        throw Error("propose-and-test sample " + std::to_string(s) + " saw no acceptance after " +
                    std::to_string(kMaxRetries) + " proposals");
      u = sets[sample_categorical(rng, weights)];
      if ((u >> x) & 1) break;
    }
    ++table.counts[{x, u}];
  }
  return table;
}

SimulationTable simulate(const TabularSequentialModel& m, uint64_t n_samples, uint64_t seed) {
  m.validate();
  SimulationTable table = make_table(m.space(), n_samples);
  for (uint64_t s = 0; s < n_samples; ++s) {
    Rng rng = Rng::stream(seed, s);
    size_t x = draw_state(rng, m.px());
    std::vector<size_t> values;
    for (size_t i = 0; i < m.variable_count(); ++i)
      values.push_back(sample_categorical(rng, m.kernel_row(i, m.history_rank(x, values))));
    ++table.counts[{x, m.map(x, m.assignment_rank(values))}];
  }
  return table;
}

EmpiricalReport compare_empirical(const CoarseDistribution& exact, const SimulationTable& counts,
                                  double tolerance) {
  require_same_space(exact.space(), counts.space);
  EmpiricalReport report;
  std::vector<uint64_t> row_total(exact.space().size(), 0);
  for (const auto& [key, c] : counts.counts) row_total[key.first] += c;
  for (size_t x = 0; x < exact.space().size(); ++x) {
    if (row_total[x] == 0) continue;
    std::map<uint64_t, double, SubsetOrder> gaps;
    for (const auto& [mask, p] : exact.cond_row(x)) gaps[mask] = p.convert_to<double>();
    for (const auto& [key, c] : counts.counts) {
      if (key.first != x) continue;
      gaps[key.second] -= static_cast<double>(c) / static_cast<double>(row_total[x]);
    }
    for (const auto& [mask, g] : gaps) {
      double gap = g < 0 ? -g : g;
      if (gap > report.max_gap) {
        report.max_gap = gap;
        report.argmax_state = x;
        report.argmax_observation = mask;
      }
    }
  }
  report.pass = report.max_gap <= tolerance;
  return report;
}

}  // namespace coarse
