#ifndef COARSE_PROCEDURAL_HPP
#define COARSE_PROCEDURAL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "coarse/car.hpp"
#include "coarse/distribution.hpp"
#include "coarse/rational.hpp"
#include "coarse/space.hpp"

namespace coarse {

/// Multiple grouped data model: pick partition i with probability lambda_i,
/// report the block containing x.
struct MgdModel {
  StateSpace space;
  std::vector<Rat> px;
  std::vector<std::vector<uint64_t>> partitions;  // each a list of disjoint blocks covering W
  std::vector<Rat> lambda;

  void validate() const;
};

/// Randomized monotone coarsening: iteratively split the current candidate
/// set and keep the side containing x; split and stop choices depend only on
/// the current set. Split sets are proper nonempty subsets, so every path
/// terminates within |W|-1 steps.
struct RmcModel {
  struct Node {
    Rat stop;
    std::vector<std::pair<uint64_t, Rat>> splits;  // (H, probability), H proper nonempty subset
  };
  StateSpace space;
  std::vector<Rat> px;
  std::map<uint64_t, Node> tree;  // keyed by current set

  void validate() const;
};

/// Uniform noise: independent events N_i add a uniformly drawn state to the
/// observation {x} as noise.
struct UniformNoiseModel {
  StateSpace space;
  std::vector<Rat> px;
  std::vector<Rat> steps;  // P(N_i = 1)

  void validate() const;
};

/// Propose and test: propose subsets iid until one contains x. The proposal
/// must be unbiased: sum of proposal mass over sets containing x is one and
/// the same positive constant for every supported x.
struct PtModel {
  StateSpace space;
  std::vector<Rat> px;
  std::map<uint64_t, Rat, SubsetOrder> proposal;

  void validate() const;
  /// The constant acceptance mass of the unbiasedness condition.
  Rat acceptance_constant() const;
};

/// Fully tabular sequential model: finite G_1..G_m with full conditional
/// kernel tables and a total observation map f. General enough to encode the
/// coin-flip game-show models and every builder output.
class TabularSequentialModel {
 public:
  TabularSequentialModel() = default;
  TabularSequentialModel(StateSpace space, std::vector<Rat> px,
                         std::vector<std::vector<std::string>> gammas);

  const StateSpace& space() const { return space_; }
  const std::vector<Rat>& px() const { return px_; }
  size_t variable_count() const { return gammas_.size(); }
  const std::vector<std::string>& gamma(size_t i) const { return gammas_[i]; }

  /// Number of (x, g_1..g_{i-1}) histories indexing kernel i's rows.
  size_t history_count(size_t i) const;
  size_t history_rank(size_t state, const std::vector<size_t>& prefix) const;

  void set_kernel_row(size_t i, size_t history_rank, std::vector<Rat> row);
  const std::vector<Rat>& kernel_row(size_t i, size_t history_rank) const;

  size_t assignment_count() const;  // product of |Gamma_i|
  size_t assignment_rank(const std::vector<size_t>& values) const;
  std::vector<size_t> assignment_values(size_t rank) const;

  void set_map(size_t state, size_t assignment_rank, uint64_t mask);
  uint64_t map(size_t state, size_t assignment_rank) const;

  void validate() const;

 private:
  StateSpace space_;
  std::vector<Rat> px_;
  std::vector<std::vector<std::string>> gammas_;
  std::vector<std::vector<std::vector<Rat>>> kernels_;  // [i][history][value]
  std::vector<std::vector<uint64_t>> f_;                // [state][assignment]
};

struct InduceOptions {
  size_t max_assignments = 1000000;
};

/// Exact induced coarse data distributions.
CoarseDistribution induce_mgd(const MgdModel& m);
CoarseDistribution induce_rmc(const RmcModel& m);
CoarseDistribution induce_noise(const UniformNoiseModel& m);
CoarseDistribution induce_pt(const PtModel& m);
CoarseDistribution induce_tabular(const TabularSequentialModel& m, const InduceOptions& options = {});

/// Builders inverting the inductions on their natural domains.
/// Direct model: one G over the positively observed subsets with
/// P(G = U | X = x) = cond(x, U); requires d-car.
TabularSequentialModel build_direct(const CoarseDistribution& p);
/// Propose-and-test model with proposal nu(U)/c; requires d-car.
PtModel build_pt(const CoarseDistribution& p);
/// Partition mixture repackaged from the ccar witness; requires d-ccar.
MgdModel build_mgd(const CoarseDistribution& p, const CcarOptions& options = {});

/// Empirical (x, U) counts from a seeded forward simulation.
struct SimulationTable {
  StateSpace space;
  std::map<std::pair<size_t, uint64_t>, uint64_t> counts;
  uint64_t samples = 0;
};

SimulationTable simulate(const MgdModel& m, uint64_t n_samples, uint64_t seed);
SimulationTable simulate(const RmcModel& m, uint64_t n_samples, uint64_t seed);
SimulationTable simulate(const UniformNoiseModel& m, uint64_t n_samples, uint64_t seed);
SimulationTable simulate(const PtModel& m, uint64_t n_samples, uint64_t seed);
SimulationTable simulate(const TabularSequentialModel& m, uint64_t n_samples, uint64_t seed);

struct EmpiricalReport {
  double max_gap = 0.0;       // L-inf over conditional probabilities
  size_t argmax_state = 0;
  uint64_t argmax_observation = 0;
  bool pass = true;
};

/// Largest |empirical conditional - exact conditional| over states with at
/// least one sample, against the given tolerance.
EmpiricalReport compare_empirical(const CoarseDistribution& exact, const SimulationTable& counts,
                                  double tolerance);

}  // namespace coarse

#endif
