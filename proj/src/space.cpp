#include "coarse/space.hpp"

#include <algorithm>
#include <unordered_set>

#include "coarse/errors.hpp"

namespace coarse {

StateSpace::StateSpace(std::vector<std::string> labels) {
  if (labels.empty()) throw ValidationError("state space must have at least one state");
  if (labels.size() > kMaxStates)
    throw ValidationError("state space too large: " + std::to_string(labels.size()) +
                          " states (limit " + std::to_string(kMaxStates) + ")");
  std::unordered_set<std::string_view> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) throw ValidationError("duplicate state label '" + l + "'");
  }
  impl_ = std::make_shared<const Impl>(Impl{std::move(labels)});
}

std::optional<size_t> StateSpace::index_of(std::string_view label) const {
  const auto& ls = impl_->labels;
  for (size_t i = 0; i < ls.size(); ++i) {
    if (ls[i] == label) return i;
  }
  return std::nullopt;
}

size_t StateSpace::require_index(std::string_view label) const {
  auto i = index_of(label);
  if (!i) throw ValidationError("unknown state label '" + std::string(label) + "'");
  return *i;
}

bool StateSpace::operator==(const StateSpace& other) const {
  if (impl_ == other.impl_) return true;
  if (!impl_ || !other.impl_) return false;
  return impl_->labels == other.impl_->labels;
}

StateSubset::StateSubset(StateSpace space, uint64_t mask) : space_(std::move(space)), mask_(mask) {
  if (mask_ & ~space_.full_mask()) throw ValidationError("subset mask has bits outside the state space");
}

StateSubset StateSubset::from_labels(const StateSpace& space, std::span<const std::string> labels) {
  uint64_t mask = 0;
  for (const auto& l : labels) mask |= 1ull << space.require_index(l);
  return StateSubset(space, mask);
}

StateSubset StateSubset::full(const StateSpace& space) { return StateSubset(space, space.full_mask()); }

StateSubset StateSubset::singleton(const StateSpace& space, size_t index) {
  return StateSubset(space, 1ull << index);
}

bool StateSubset::subset_of(const StateSubset& other) const {
  require_same_space(space_, other.space_);
  return (mask_ & ~other.mask_) == 0;
}

std::vector<size_t> StateSubset::members() const {
  std::vector<size_t> out;
  for (size_t i = 0; i < space_.size(); ++i) {
    if (contains(i)) out.push_back(i);
  }
  return out;
}

std::string StateSubset::label() const { return subset_label(space_, mask_); }

bool StateSubset::operator==(const StateSubset& other) const {
  return space_ == other.space_ && mask_ == other.mask_;
}

std::string subset_label(const StateSpace& space, uint64_t mask) {
  std::string out = "{";
  bool first = true;
  for (size_t i = 0; i < space.size(); ++i) {
    if ((mask >> i) & 1) {
      if (!first) out += ",";
      out += space.label(i);
      first = false;
    }
  }
  out += "}";
  return out;
}

void require_same_space(const StateSpace& a, const StateSpace& b) {
  if (!(a == b)) throw SpaceMismatch("values belong to different state spaces");
}

}  // namespace coarse
