#include "coarse/missing.hpp"

#include "coarse/errors.hpp"

namespace coarse {

namespace {

StateSpace build_tuple_space(const std::vector<std::vector<std::string>>& components) {
  if (components.empty()) throw ValidationError("product shape needs at least one component");
  size_t total = 1;
  for (const auto& c : components) {
    if (c.empty()) throw ValidationError("product shape has an empty component");
    total *= c.size();
    if (total > StateSpace::kMaxStates)
      throw ValidationError("product space exceeds the state cap");
  }
  std::vector<std::string> labels;
  labels.reserve(total);
  std::vector<size_t> idx(components.size(), 0);
  for (size_t n = 0; n < total; ++n) {
    std::string label = "(";
    for (size_t i = 0; i < components.size(); ++i) {
      if (i) label += ",";
      label += components[i][idx[i]];
    }
    label += ")";
    labels.push_back(std::move(label));
    for (size_t i = components.size(); i-- > 0;) {
      if (++idx[i] < components[i].size()) break;
      idx[i] = 0;
    }
  }
  return StateSpace(labels);
}

}  // namespace

ProductShape::ProductShape(std::vector<std::vector<std::string>> components)
    : components_(std::move(components)), space_(build_tuple_space(components_)) {}

size_t ProductShape::tuple_index(const std::vector<size_t>& values) const {
  size_t idx = 0;
  for (size_t i = 0; i < components_.size(); ++i) idx = idx * components_[i].size() + values.at(i);
  return idx;
}

std::vector<size_t> ProductShape::tuple_values(size_t state_index) const {
  std::vector<size_t> out(components_.size());
  for (size_t i = components_.size(); i-- > 0;) {
    out[i] = state_index % components_[i].size();
    state_index /= components_[i].size();
  }
  return out;
}

MissingnessRecord MissingnessRecord::from_labels(
    const ProductShape& shape, const std::vector<std::optional<std::string>>& labels) {
  if (labels.size() != shape.arity()) throw ShapeError("record arity does not match the product shape");
  MissingnessRecord rec;
  rec.values.resize(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i]) continue;
    const auto& comp = shape.component(i);
    size_t j = 0;
    while (j < comp.size() && comp[j] != *labels[i]) ++j;
    if (j == comp.size())
      throw ValidationError("value '" + *labels[i] + "' not in component " + std::to_string(i));
    rec.values[i] = j;
  }
  return rec;
}

StateSubset observation_set(const ProductShape& shape, const MissingnessRecord& record) {
  if (record.values.size() != shape.arity())
    throw ShapeError("record arity does not match the product shape");
  const StateSpace& space = shape.tuple_space();
  uint64_t mask = 0;
  for (size_t s = 0; s < space.size(); ++s) {
    std::vector<size_t> tuple = shape.tuple_values(s);
    bool consistent = true;
    for (size_t i = 0; i < tuple.size() && consistent; ++i) {
      if (record.values[i] && *record.values[i] != tuple[i]) consistent = false;
    }
    if (consistent) mask |= 1ull << s;
  }
  return StateSubset(space, mask);
}

std::vector<bool> missingness_indicator(const MissingnessRecord& record) {
  std::vector<bool> m(record.values.size());
  for (size_t i = 0; i < record.values.size(); ++i) m[i] = !record.values[i].has_value();
  return m;
}

MissingnessRecord apply_mask(const ProductShape& shape, size_t state_index,
                             const std::vector<bool>& mask) {
  if (mask.size() != shape.arity()) throw ShapeError("mask arity does not match the product shape");
  std::vector<size_t> tuple = shape.tuple_values(state_index);
  MissingnessRecord rec;
  rec.values.resize(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) rec.values[i] = tuple[i];
  }
  return rec;
}

CoarseningVariable missingness_coarsening_variable(const ProductShape& shape) {
  size_t k = shape.arity();
  if (k > 20) throw ValidationError("missingness indicator space too large");
  size_t count = 1ull << k;
  std::vector<std::string> gamma;
  gamma.reserve(count);
  for (size_t m = 0; m < count; ++m) {
    std::string label(k, '0');
    for (size_t i = 0; i < k; ++i) {
      if ((m >> i) & 1) label[i] = '1';
    }
    gamma.push_back(std::move(label));
  }
  CoarseningVariable v(shape.tuple_space(), gamma);
  for (size_t x = 0; x < shape.tuple_space().size(); ++x) {
    for (size_t m = 0; m < count; ++m) {
      std::vector<bool> mask(k);
      for (size_t i = 0; i < k; ++i) mask[i] = (m >> i) & 1;
      v.set_map(x, m, observation_set(shape, apply_mask(shape, x, mask)).mask());
    }
  }
  return v;
}

}  // namespace coarse
