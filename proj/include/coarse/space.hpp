#ifndef COARSE_SPACE_HPP
#define COARSE_SPACE_HPP

#include <bit>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coarse {

/// A finite ordered state space W = {x_0, ..., x_{n-1}}. Immutable after
/// construction; cheap to copy (shared representation). At most 63 states so
/// that subsets fit in one machine word.
class StateSpace {
 public:
  static constexpr size_t kMaxStates = 63;

  StateSpace() = default;
  explicit StateSpace(std::vector<std::string> labels);

  size_t size() const { return impl_->labels.size(); }
  const std::string& label(size_t i) const { return impl_->labels[i]; }
  const std::vector<std::string>& labels() const { return impl_->labels; }
  std::optional<size_t> index_of(std::string_view label) const;
  size_t require_index(std::string_view label) const;  // throws ValidationError

  uint64_t full_mask() const { return size() == 64 ? ~0ull : (1ull << size()) - 1; }

  /// Content equality: same labels in the same order.
  bool operator==(const StateSpace& other) const;
  bool operator!=(const StateSpace& other) const { return !(*this == other); }

 private:
  struct Impl {
    std::vector<std::string> labels;
  };
  std::shared_ptr<const Impl> impl_;
};

/// Canonical subset order: by popcount first, then by numeric mask. All
/// reports and witnesses enumerate subsets in this order.
struct SubsetOrder {
  bool operator()(uint64_t a, uint64_t b) const {
    int pa = std::popcount(a), pb = std::popcount(b);
    if (pa != pb) return pa < pb;
    return a < b;
  }
};

/// A subset of a StateSpace, stored as a bit mask over state indices.
class StateSubset {
 public:
  StateSubset() = default;
  StateSubset(StateSpace space, uint64_t mask);
  static StateSubset from_labels(const StateSpace& space, std::span<const std::string> labels);
  static StateSubset full(const StateSpace& space);
  static StateSubset singleton(const StateSpace& space, size_t index);

  const StateSpace& space() const { return space_; }
  uint64_t mask() const { return mask_; }
  bool empty() const { return mask_ == 0; }
  size_t count() const { return static_cast<size_t>(std::popcount(mask_)); }
  bool contains(size_t index) const { return (mask_ >> index) & 1; }
  bool subset_of(const StateSubset& other) const;

  std::vector<size_t> members() const;
  std::string label() const;  // "{A,C}"

  bool operator==(const StateSubset& other) const;

 private:
  StateSpace space_;
  uint64_t mask_ = 0;
};

/// "{A,C}" rendering of a raw mask.
std::string subset_label(const StateSpace& space, uint64_t mask);

/// Throws SpaceMismatch unless both spaces are equal.
void require_same_space(const StateSpace& a, const StateSpace& b);

}  // namespace coarse

#endif
