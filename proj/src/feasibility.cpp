#include "coarse/feasibility.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>

#include "coarse/errors.hpp"

namespace coarse {

namespace {

// Dense exact simplex tableau with explicit artificial columns. Column layout:
// [0, n) structural, [n, n+m) artificial of each row, last column rhs. The
// objective row holds reduced costs, its last entry is minus the objective
// value. Bland's rule throughout: entering = least-index column with negative
// reduced cost, leaving = least basic variable index among minimal ratios.
class Simplex {
 public:
  Simplex(RatMatrix a, std::vector<Rat> b, std::vector<int> flip)
      : m_(a.size()), n_(a.empty() ? 0 : a[0].size()), flip_(std::move(flip)) {
    t_.assign(m_, std::vector<Rat>(n_ + m_ + 1, Rat(0)));
    basis_.resize(m_);
    for (size_t i = 0; i < m_; ++i) {
      for (size_t j = 0; j < n_; ++j) t_[i][j] = std::move(a[i][j]);
      t_[i][n_ + i] = 1;
      t_[i].back() = std::move(b[i]);
      basis_[i] = n_ + i;
    }
  }

  // c has size n_ + m_. Recomputes the reduced-cost row from scratch.
  void set_costs(std::vector<Rat> c) {
    costs_ = std::move(c);
    obj_.assign(n_ + m_ + 1, Rat(0));
    for (size_t j = 0; j <= n_ + m_; ++j) {
      Rat v = j < n_ + m_ ? costs_[j] : Rat(0);
      for (size_t i = 0; i < m_; ++i) v -= costs_[basis_[i]] * t_[i][j];
      obj_[j] = v;  // last entry becomes -objective
    }
  }

  void run(bool allow_artificial_entry) {
    for (;;) {
      size_t enter = n_ + m_;
      for (size_t j = 0; j < (allow_artificial_entry ? n_ + m_ : n_); ++j) {
        if (obj_[j] < 0) {
          enter = j;
          break;
        }
      }
      if (enter == n_ + m_) return;  // optimal
      size_t leave = m_;
      Rat best_ratio;
      for (size_t i = 0; i < m_; ++i) {
        if (t_[i][enter] <= 0) continue;
        Rat ratio = t_[i].back() / t_[i][enter];
        if (leave == m_ || ratio < best_ratio ||
            (ratio == best_ratio && basis_[i] < basis_[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave == m_)
        throw InternalInconsistency("simplex: unbounded objective in a bounded formulation");
      pivot(leave, enter);
    }
  }

  void pivot(size_t row, size_t col) {
    Rat p = t_[row][col];
    for (auto& v : t_[row]) v /= p;
    for (size_t i = 0; i < m_; ++i) {
      if (i == row || t_[i][col] == 0) continue;
      Rat f = t_[i][col];
      for (size_t j = 0; j <= n_ + m_; ++j) t_[i][j] -= f * t_[row][j];
    }
    if (obj_[col] != 0) {
      Rat f = obj_[col];
      for (size_t j = 0; j <= n_ + m_; ++j) obj_[j] -= f * t_[row][j];
    }
    basis_[row] = col;
  }

  // Pivots basic artificials out on any nonzero structural entry. Rows that
  // stay artificial-basic are redundant constraints: their structural part is
  // identically zero and they remain inert afterwards.
  void drive_out_artificials() {
    for (size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (size_t j = 0; j < n_; ++j) {
        if (t_[i][j] != 0) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  Rat objective() const { return -obj_.back(); }

  std::vector<Rat> primal() const {
    std::vector<Rat> x(n_, Rat(0));
    for (size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) x[basis_[i]] = t_[i].back();
    }
    return x;
  }

  // y_i = c(artificial_i) - reduced_cost(artificial_i), mapped back through
  // the row sign flips applied when making rhs nonnegative.
  std::vector<Rat> dual() const {
    std::vector<Rat> y(m_);
    for (size_t i = 0; i < m_; ++i) y[i] = flip_[i] * (costs_[n_ + i] - obj_[n_ + i]);
    return y;
  }

 private:
  size_t m_, n_;
  std::vector<int> flip_;
  std::vector<std::vector<Rat>> t_;
  std::vector<size_t> basis_;
  std::vector<Rat> costs_;
  std::vector<Rat> obj_;
};

struct LpResult {
  bool feasible = false;
  std::vector<Rat> x;
  Rat objective;
  std::vector<Rat> dual;    // optimal dual when feasible
  std::vector<Rat> farkas;  // y with yA <= 0 (componentwise), y.b > 0 when infeasible
};

// min c.x subject to Ax = b, x >= 0, via two-phase simplex.
LpResult lp_solve(RatMatrix a, std::vector<Rat> b, const std::vector<Rat>& c) {
  size_t m = a.size(), n = a.empty() ? 0 : a[0].size();
  std::vector<int> flip(m, 1);
  for (size_t i = 0; i < m; ++i) {
    if (b[i] < 0) {
      flip[i] = -1;
      b[i] = -b[i];
      for (auto& v : a[i]) v = -v;
    }
  }
  Simplex s(std::move(a), std::move(b), flip);

  std::vector<Rat> phase1(n + m, Rat(0));
  for (size_t j = n; j < n + m; ++j) phase1[j] = 1;
  s.set_costs(phase1);
  s.run(/*allow_artificial_entry=*/true);

  LpResult out;
  if (s.objective() != 0) {
    out.feasible = false;
    out.farkas = s.dual();
    return out;
  }
  s.drive_out_artificials();

  std::vector<Rat> phase2(n + m, Rat(0));
  for (size_t j = 0; j < n; ++j) phase2[j] = c[j];
  s.set_costs(phase2);
  s.run(/*allow_artificial_entry=*/false);

  out.feasible = true;
  out.x = s.primal();
  out.objective = s.objective();
  out.dual = s.dual();
  return out;
}

void require_rectangular(const RatMatrix& a) {
  if (a.empty() || a[0].empty()) throw DimensionError("feasibility matrix must be nonempty");
  for (const auto& row : a) {
    if (row.size() != a[0].size()) throw DimensionError("feasibility matrix rows have unequal lengths");
  }
}

std::vector<Int> certificate_from(const std::vector<Rat>& y) {
  bool nonzero = false;
  for (const Rat& v : y) nonzero = nonzero || v != 0;
  if (!nonzero) throw InternalInconsistency("feasibility: zero dual vector where a certificate was expected");
  return integerize(y);
}

FeasibilityOutcome solve_strict(const RatMatrix& a) {
  size_t k = a.size(), l = a[0].size();
  // Variables: mu (l), t+, t-, slack of t <= 1. nu = mu + t, maximize t.
  RatMatrix rows(k + 1, std::vector<Rat>(l + 3, Rat(0)));
  std::vector<Rat> rhs(k + 1, Rat(1));
  for (size_t i = 0; i < k; ++i) {
    Rat row_sum = 0;
    for (size_t j = 0; j < l; ++j) {
      rows[i][j] = a[i][j];
      row_sum += a[i][j];
    }
    rows[i][l] = row_sum;
    rows[i][l + 1] = -row_sum;
  }
  rows[k][l] = 1;
  rows[k][l + 1] = -1;
  rows[k][l + 2] = 1;

  std::vector<Rat> cost(l + 3, Rat(0));
  cost[l] = -1;
  cost[l + 1] = 1;

  LpResult lp = lp_solve(rows, rhs, cost);

  FeasibilityOutcome out;
  if (!lp.feasible) {
    // The linear system A nu = 1 itself has no solution. The Farkas vector's
    // first k components satisfy yA = 0 and y.1 > 0 here; flip so z.1 < 0.
    std::vector<Rat> y(lp.farkas.begin(), lp.farkas.begin() + k);
    out.feasible = false;
    out.certificate = certificate_from(y);
    for (Int& v : out.certificate) v = -v;
    return out;
  }
  Rat t_star = lp.x[l] - lp.x[l + 1];
  if (t_star > 0) {
    out.feasible = true;
    out.witness.reserve(l);
    for (size_t j = 0; j < l; ++j) out.witness.push_back(lp.x[j] + t_star);
    return out;
  }
  // Feasible as a linear system but no strictly positive solution. The dual
  // gives z with zA <= 0 and z.1 >= 0; when zA = 0 we normalize to z.1 < 0.
  std::vector<Rat> y(lp.dual.begin(), lp.dual.begin() + k);
  out.feasible = false;
  out.certificate = certificate_from(y);
  bool za_zero = true;
  for (size_t j = 0; j < l && za_zero; ++j) {
    Rat col = 0;
    for (size_t i = 0; i < k; ++i) col += Rat(out.certificate[i]) * a[i][j];
    za_zero = (col == 0);
  }
  if (za_zero) {
    Int dot = 0;
    for (const Int& v : out.certificate) dot += v;
    if (dot > 0) {
      for (Int& v : out.certificate) v = -v;
    }
  }
  return out;
}

FeasibilityOutcome solve_nonstrict(const RatMatrix& a) {
  size_t k = a.size(), l = a[0].size() - 1;  // last column is -b
  RatMatrix a0(k, std::vector<Rat>(l));
  std::vector<Rat> b(k);
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < l; ++j) a0[i][j] = a[i][j];
    b[i] = -a[i][l];
  }
  std::vector<Rat> cost(l, Rat(0));
  LpResult lp = lp_solve(a0, b, cost);

  FeasibilityOutcome out;
  if (lp.feasible) {
    out.feasible = true;
    out.witness = lp.x;
    out.witness.push_back(Rat(1));
  } else {
    out.feasible = false;
    out.certificate = certificate_from(lp.farkas);
  }
  return out;
}

}  // namespace

bool verify_feasibility_outcome(const RatMatrix& a, bool strict, const FeasibilityOutcome& outcome) {
  size_t k = a.size(), cols = a[0].size();
  if (outcome.feasible) {
    if (outcome.witness.size() != cols) return false;
    if (strict) {
      for (const Rat& v : outcome.witness) {
        if (v <= 0) return false;
      }
      for (size_t i = 0; i < k; ++i) {
        Rat sum = 0;
        for (size_t j = 0; j < cols; ++j) sum += a[i][j] * outcome.witness[j];
        if (sum != 1) return false;
      }
    } else {
      if (outcome.witness.back() != 1) return false;
      for (const Rat& v : outcome.witness) {
        if (v < 0) return false;
      }
      for (size_t i = 0; i < k; ++i) {
        Rat sum = 0;
        for (size_t j = 0; j < cols; ++j) sum += a[i][j] * outcome.witness[j];
        if (sum != 0) return false;
      }
    }
    return true;
  }
  if (outcome.certificate.size() != k) return false;
  std::vector<Rat> za(cols, Rat(0));
  for (size_t j = 0; j < cols; ++j) {
    for (size_t i = 0; i < k; ++i) za[j] += Rat(outcome.certificate[i]) * a[i][j];
  }
  if (strict) {
    Int dot = 0;
    for (const Int& v : outcome.certificate) dot += v;
    bool all_zero = true, all_le = true, any_neg = false;
    for (const Rat& v : za) {
      all_zero = all_zero && v == 0;
      all_le = all_le && v <= 0;
      any_neg = any_neg || v < 0;
    }
    if (all_zero) return dot != 0;
    return all_le && any_neg && dot >= 0;
  }
  for (const Rat& v : za) {
    if (v > 0) return false;
  }
  return za.back() < 0;
}

FeasibilityOutcome solve_exact_feasibility(const RatMatrix& a, bool strict) {
  require_rectangular(a);
  FeasibilityOutcome out = strict ? solve_strict(a) : solve_nonstrict(a);
  if (!verify_feasibility_outcome(a, strict, out))
    throw InternalInconsistency("feasibility outcome failed independent substitution check");
  return out;
}

}  // namespace coarse
