#ifndef COARSE_MISSING_HPP
#define COARSE_MISSING_HPP

#include <optional>
#include <string>
#include <vector>

#include "coarse/coarsening.hpp"
#include "coarse/space.hpp"

namespace coarse {

/// Multivariate product structure (V_1, ..., V_k) behind a missing-value
/// problem. States of the tuple space are labeled "(v1,...,vk)".
class ProductShape {
 public:
  explicit ProductShape(std::vector<std::vector<std::string>> components);

  size_t arity() const { return components_.size(); }
  const std::vector<std::string>& component(size_t i) const { return components_[i]; }

  /// The registered product StateSpace, tuples enumerated with the last
  /// component varying fastest.
  const StateSpace& tuple_space() const { return space_; }

  size_t tuple_index(const std::vector<size_t>& values) const;
  std::vector<size_t> tuple_values(size_t state_index) const;

 private:
  std::vector<std::vector<std::string>> components_;
  StateSpace space_;
};

/// One observed record y = (y_1, ..., y_k); nullopt marks the missing symbol.
struct MissingnessRecord {
  std::vector<std::optional<size_t>> values;  // index into V_i, or missing

  static MissingnessRecord from_labels(const ProductShape& shape,
                                       const std::vector<std::optional<std::string>>& labels);
};

/// U(y): all complete tuples consistent with the observed record.
StateSubset observation_set(const ProductShape& shape, const MissingnessRecord& record);

/// m_i = 1 iff y_i is missing.
std::vector<bool> missingness_indicator(const MissingnessRecord& record);

/// Applies the missingness mask to a complete tuple: the record observing x
/// exactly on the coordinates where m_i = 0.
MissingnessRecord apply_mask(const ProductShape& shape, size_t state_index, const std::vector<bool>& mask);

/// Builds the coarsening-variable scaffold of the missingness indicator:
/// Gamma = {0,1}^k with labels like "01", and f(x, m) the set of tuples
/// agreeing with x wherever m_i = 0. The joint P(X, M) is left to the caller
/// (all entries zero initially).
CoarseningVariable missingness_coarsening_variable(const ProductShape& shape);

}  // namespace coarse

#endif
