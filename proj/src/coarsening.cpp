#include "coarse/coarsening.hpp"

#include <algorithm>

#include "coarse/errors.hpp"

namespace coarse {

CoarseningVariable::CoarseningVariable(StateSpace space, std::vector<std::string> gamma)
    : space_(std::move(space)), gamma_(std::move(gamma)) {
  if (gamma_.empty()) throw ValidationError("coarsening variable needs at least one G value");
  f_.assign(space_.size(), std::vector<uint64_t>(gamma_.size(), 0));
  joint_.assign(space_.size(), std::vector<Rat>(gamma_.size(), Rat(0)));
}

void CoarseningVariable::set_map(size_t state, size_t g, uint64_t observation_mask) {
  f_.at(state).at(g) = observation_mask;
}

void CoarseningVariable::set_joint(size_t state, size_t g, Rat p) {
  joint_.at(state).at(g) = std::move(p);
}

Rat CoarseningVariable::px(size_t state) const {
  Rat total = 0;
  for (const Rat& p : joint_.at(state)) total += p;
  return total;
}

Rat CoarseningVariable::cond_g(size_t state, size_t g) const {
  Rat marginal = px(state);
  if (marginal == 0)
    throw ZeroMarginal("P(G|X=" + space_.label(state) + ") undefined: state has zero probability");
  return joint_[state][g] / marginal;
}

void CoarseningVariable::validate() const {
  Rat total = 0;
  for (size_t x = 0; x < space_.size(); ++x) {
    for (size_t g = 0; g < gamma_.size(); ++g) {
      if (joint_[x][g] < 0)
        throw NormalizationError("P(X=" + space_.label(x) + ",G=" + gamma_[g] + ") is negative");
      total += joint_[x][g];
      if (f_[x][g] == 0)
        throw EmptyObservation("f(" + space_.label(x) + "," + gamma_[g] + ") is the empty set");
    }
  }
  if (total != 1)
    throw NormalizationError("P(X,G) sums to " + rat_to_string(total) + ", defect " +
                             rat_to_string(Rat(1) - total));
  // Containment is required almost surely: pairs (x, g) of zero joint
  // probability are exempt, which admits the canonical direct construction
  // with f(x, U) = U and zero mass off-membership.
  for (size_t x = 0; x < space_.size(); ++x) {
    if (px(x) == 0) continue;
    for (size_t g = 0; g < gamma_.size(); ++g) {
      if (joint_[x][g] > 0 && !((f_[x][g] >> x) & 1))
        throw MembershipError("f(" + space_.label(x) + "," + gamma_[g] + ") = " +
                              subset_label(space_, f_[x][g]) + " does not contain " + space_.label(x));
    }
  }
}

std::optional<std::tuple<size_t, size_t, uint64_t, size_t>> CoarseningVariable::cartesian_violation()
    const {
  for (size_t g = 0; g < gamma_.size(); ++g) {
    for (size_t x = 0; x < space_.size(); ++x) {
      if (px(x) == 0) continue;
      uint64_t u = f_[x][g];
      for (size_t x2 = 0; x2 < space_.size(); ++x2) {
        if (px(x2) == 0 || !((u >> x2) & 1)) continue;
        if (f_[x2][g] != u) return std::make_tuple(x, x2, u, g);
      }
    }
  }
  return std::nullopt;
}

void CoarseningVariable::validate_cartesian() const {
  validate();
  if (auto v = cartesian_violation()) {
    auto [x, x2, u, g] = *v;
    throw ValidationError("not a coarsening variable: f(" + space_.label(x) + "," + gamma_[g] +
                          ") = " + subset_label(space_, u) + " contains " + space_.label(x2) +
                          " but f(" + space_.label(x2) + "," + gamma_[g] + ") = " +
                          subset_label(space_, f_[x2][g]));
  }
}

CoarseDistribution CoarseningVariable::induced_distribution() const {
  CoarseDistribution out(space_);
  for (size_t x = 0; x < space_.size(); ++x) {
    Rat marginal = px(x);
    out.set_px(x, marginal);
    if (marginal == 0) continue;
    std::map<uint64_t, Rat, SubsetOrder> row;
    for (size_t g = 0; g < gamma_.size(); ++g) row[f_[x][g]] += joint_[x][g] / marginal;
    for (auto& [mask, p] : row) {
      if (p != 0) out.set_cond(x, mask, p);
    }
  }
  return out;
}

GcarVerdict check_gcar(const CoarseningVariable& v) {
  v.validate_cartesian();
  const StateSpace& space = v.space();
  GcarVerdict out;
  std::optional<GcarVerdict::Violation> best;
  // Classes keyed (U, g) in canonical order so the reported violation is the
  // least one.
  std::map<std::pair<uint64_t, size_t>, std::vector<size_t>,
           decltype([](const auto& a, const auto& b) {
             if (a.first != b.first) return SubsetOrder{}(a.first, b.first);
             return a.second < b.second;
           })>
      classes;
  // Classes restricted to members of the produced observation; for maps that
  // satisfy containment everywhere this is the plain f(x,g) = U class.
  for (size_t x = 0; x < space.size(); ++x) {
    if (v.px(x) == 0) continue;
    for (size_t g = 0; g < v.gamma_size(); ++g) {
      if ((v.map(x, g) >> x) & 1) classes[{v.map(x, g), g}].push_back(x);
    }
  }
  for (const auto& [key, members] : classes) {
    Rat value = v.cond_g(members[0], key.second);
    for (size_t i = 1; i < members.size(); ++i) {
      Rat other = v.cond_g(members[i], key.second);
      if (other != value) {
        if (!best) {
          best = GcarVerdict::Violation{key.first, key.second, members[0], members[i], value, other};
        }
        break;
      }
    }
    if (!best) out.witness[{key.first, key.second}] = value;
  }
  if (best) {
    out.holds = false;
    out.violation = best;
    out.witness.clear();
  } else {
    out.holds = true;
  }
  return out;
}

GccarVerdict check_gccar(const CoarseningVariable& v) {
  v.validate_cartesian();
  const StateSpace& space = v.space();
  GccarVerdict out;
  std::vector<size_t> support;
  for (size_t x = 0; x < space.size(); ++x) {
    if (v.px(x) > 0) support.push_back(x);
  }
  for (size_t g = 0; g < v.gamma_size(); ++g) {
    Rat value = v.cond_g(support[0], g);
    for (size_t i = 1; i < support.size(); ++i) {
      Rat other = v.cond_g(support[i], g);
      if (other != value) {
        out.holds = false;
        out.violation = GccarVerdict::Violation{g, support[0], support[i], value, other};
        out.witness.clear();
        return out;
      }
    }
    out.witness[g] = value;
  }
  out.holds = true;
  return out;
}

InvertibilityResult check_invertible(const CoarseningVariable& v) {
  v.validate_cartesian();
  const StateSpace& space = v.space();
  InvertibilityResult out;
  // Observations in the image of f, restricted to pairs with x in f(x,g).
  std::map<uint64_t, std::vector<size_t>, SubsetOrder> producers;
  for (size_t x = 0; x < space.size(); ++x) {
    for (size_t g = 0; g < v.gamma_size(); ++g) {
      uint64_t u = v.map(x, g);
      if (!((u >> x) & 1)) continue;
      auto& gs = producers[u];
      if (std::find(gs.begin(), gs.end(), g) == gs.end()) gs.push_back(g);
    }
  }
  for (const auto& [u, gs] : producers) {
    if (gs.size() > 1) {
      out.invertible = false;
      out.reason = "observation " + subset_label(space, u) + " is produced by both " +
                   v.gamma()[gs[0]] + " and " + v.gamma()[gs[1]];
      return out;
    }
    size_t g = gs[0];
    for (size_t x = 0; x < space.size(); ++x) {
      if (((u >> x) & 1) && v.map(x, g) != u) {
        out.invertible = false;
        out.reason = "f(" + space.label(x) + "," + v.gamma()[g] + ") = " +
                     subset_label(space, v.map(x, g)) + " instead of " + subset_label(space, u);
        return out;
      }
    }
    out.h[u] = g;
  }
  out.invertible = true;
  return out;
}

namespace {

void require_bit_gamma(const CoarseningVariable& v) {
  size_t k = 0;
  for (const std::string& label : v.gamma()) {
    if (label.empty() || label.find_first_not_of("01") != std::string::npos)
      throw ShapeError("gamma label '" + label + "' is not a {0,1} vector");
    if (k == 0) {
      k = label.size();
    } else if (label.size() != k) {
      throw ShapeError("gamma labels have mixed lengths; not a missingness indicator space");
    }
  }
}

}  // namespace

GcarVerdict check_mar(const CoarseningVariable& v) {
  require_bit_gamma(v);
  return check_gcar(v);
}

GccarVerdict check_mcar(const CoarseningVariable& v) {
  require_bit_gamma(v);
  return check_gccar(v);
}

}  // namespace coarse
