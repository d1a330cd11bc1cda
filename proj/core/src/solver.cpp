// Exact integer lexicographic optimisation over small bounded systems.
//
// Variables are fixed one at a time in index order. For each variable the
// integer range to explore comes from Fourier-Motzkin projection of the
// remaining system onto it; every derived row is gcd-tightened, which is sound
// for integer points and prunes most parity-style infeasibilities early.

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "warpsim/intset.hpp"

namespace warpsim {

namespace {

struct RowHash {
  std::size_t operator()(const std::vector<Value>& v) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (Value x : v) {
      h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

Value abs_checked(Value v) {
  if (v == INT64_MIN) throw OverflowError("integer overflow in abs");
  return v < 0 ? -v : v;
}

Value row_gcd(const Row& r) {
  Value g = 0;
  for (Value c : r.coeffs) g = std::gcd(g, abs_checked(c));
  return g;
}

enum class Norm { Keep, Drop, Infeasible };

Norm normalize_ge(Row& r) {
  Value g = row_gcd(r);
  if (g == 0) return r.constant >= 0 ? Norm::Drop : Norm::Infeasible;
  if (g > 1) {
    for (Value& c : r.coeffs) c /= g;
    r.constant = floor_div(r.constant, g);
  }
  return Norm::Keep;
}

Norm normalize_eq(Row& r) {
  Value g = row_gcd(r);
  if (g == 0) return r.constant == 0 ? Norm::Drop : Norm::Infeasible;
  if (r.constant % g != 0) return Norm::Infeasible;
  if (g > 1) {
    for (Value& c : r.coeffs) c /= g;
    r.constant /= g;
  }
  // Canonical sign: first nonzero coefficient positive.
  for (Value c : r.coeffs) {
    if (c == 0) continue;
    if (c < 0) {
      for (Value& x : r.coeffs) x = -x;
      r.constant = -r.constant;
    }
    break;
  }
  return Norm::Keep;
}

// Working system for one search node. Equalities and inequalities are kept
// separately; both are over the full variable vector.
struct Work {
  std::vector<Row> ge;
  std::vector<Row> eq;
  bool infeasible = false;

  // Tightens, deduplicates and keeps only the strongest inequality per
  // coefficient vector. Detects directly contradictory pairs.
  void simplify() {
    if (infeasible) return;
    std::unordered_map<std::vector<Value>, Value, RowHash> best;
    best.reserve(ge.size() * 2 + 1);
    for (Row& r : ge) {
      switch (normalize_ge(r)) {
        case Norm::Drop: continue;
        case Norm::Infeasible: infeasible = true; return;
        case Norm::Keep: break;
      }
      auto [it, inserted] = best.try_emplace(r.coeffs, r.constant);
      if (!inserted) it->second = std::min(it->second, r.constant);
    }
    std::vector<Row> eqs;
    eqs.reserve(eq.size());
    for (Row& r : eq) {
      switch (normalize_eq(r)) {
        case Norm::Drop: continue;
        case Norm::Infeasible: infeasible = true; return;
        case Norm::Keep: break;
      }
      eqs.push_back(std::move(r));
    }
    std::sort(eqs.begin(), eqs.end(), [](const Row& a, const Row& b) {
      return a.coeffs != b.coeffs ? a.coeffs < b.coeffs : a.constant < b.constant;
    });
    for (std::size_t i = 1; i < eqs.size(); ++i) {
      if (eqs[i].coeffs == eqs[i - 1].coeffs && eqs[i].constant != eqs[i - 1].constant) {
        infeasible = true;
        return;
      }
    }
    eqs.erase(std::unique(eqs.begin(), eqs.end()), eqs.end());
    eq = std::move(eqs);

    ge.clear();
    ge.reserve(best.size());
    std::vector<Value> neg;
    for (const auto& [coeffs, c] : best) {
      neg.assign(coeffs.begin(), coeffs.end());
      for (Value& x : neg) x = -x;
      auto it = best.find(neg);
      // a.x + c1 >= 0 and -a.x + c2 >= 0 require c1 + c2 >= 0.
      if (it != best.end() && checked_add(c, it->second) < 0) {
        infeasible = true;
        return;
      }
      ge.push_back(Row{coeffs, c});
    }
    // Deterministic order keeps the search reproducible.
    std::sort(ge.begin(), ge.end(), [](const Row& a, const Row& b) {
      return a.coeffs != b.coeffs ? a.coeffs < b.coeffs : a.constant < b.constant;
    });
  }
};

// r := |b| * r - sign(b) * a * e, eliminating the variable where e has
// coefficient b and r has coefficient a.
Row combine_with_eq(const Row& r, const Row& e, std::size_t var) {
  Value a = r.coeffs[var];
  Value b = e.coeffs[var];
  Value sb = b > 0 ? 1 : -1;
  Value ab = abs_checked(b);
  Row out;
  out.coeffs.resize(r.coeffs.size());
  for (std::size_t i = 0; i < r.coeffs.size(); ++i) {
    out.coeffs[i] = checked_sub(checked_mul(ab, r.coeffs[i]), checked_mul(sb * a, e.coeffs[i]));
  }
  out.constant = checked_sub(checked_mul(ab, r.constant), checked_mul(sb * a, e.constant));
  out.coeffs[var] = 0;
  return out;
}

// Eliminates `var` from the work system (rational projection).
void eliminate(Work& w, std::size_t var) {
  // Prefer an equality: exact substitution, no row blow-up.
  auto eq_it = std::find_if(w.eq.begin(), w.eq.end(),
                            [var](const Row& r) { return r.coeffs[var] != 0; });
  if (eq_it != w.eq.end()) {
    Row e = *eq_it;
    w.eq.erase(eq_it);
    for (Row& r : w.eq)
      if (r.coeffs[var] != 0) r = combine_with_eq(r, e, var);
    for (Row& r : w.ge)
      if (r.coeffs[var] != 0) r = combine_with_eq(r, e, var);
    return;
  }
  std::vector<Row> pos, neg, rest;
  for (Row& r : w.ge) {
    Value c = r.coeffs[var];
    if (c > 0)
      pos.push_back(std::move(r));
    else if (c < 0)
      neg.push_back(std::move(r));
    else
      rest.push_back(std::move(r));
  }
  for (const Row& p : pos) {
    for (const Row& n : neg) {
      Value a = p.coeffs[var];
      Value b = -n.coeffs[var];
      Value g = std::gcd(a, b);
      Value mp = b / g, mn = a / g;
      Row out;
      out.coeffs.resize(p.coeffs.size());
      for (std::size_t i = 0; i < p.coeffs.size(); ++i) {
        out.coeffs[i] = checked_add(checked_mul(mp, p.coeffs[i]), checked_mul(mn, n.coeffs[i]));
      }
      out.constant = checked_add(checked_mul(mp, p.constant), checked_mul(mn, n.constant));
      out.coeffs[var] = 0;
      rest.push_back(std::move(out));
    }
  }
  w.ge = std::move(rest);
}

struct Range {
  bool infeasible = false;
  Value lo = 0;
  Value hi = 0;
};

// Integer bounds of `var` over the projection of `w` eliminating every
// variable in [from, n) except `var`.
Range project_bounds(Work w, std::size_t var, std::size_t from, std::size_t n) {
  w.simplify();
  if (w.infeasible) return {true};
  // Greedy elimination order: cheapest Fourier-Motzkin step first.
  std::vector<std::size_t> todo;
  for (std::size_t v = from; v < n; ++v)
    if (v != var) todo.push_back(v);
  while (!todo.empty()) {
    std::size_t best_i = 0;
    long best_cost = -1;
    for (std::size_t i = 0; i < todo.size(); ++i) {
      std::size_t v = todo[i];
      bool in_eq = std::any_of(w.eq.begin(), w.eq.end(), [v](const Row& r) { return r.coeffs[v] != 0; });
      long cost;
      if (in_eq) {
        cost = 0;
      } else {
        long p = 0, q = 0;
        for (const Row& r : w.ge) {
          if (r.coeffs[v] > 0) ++p;
          if (r.coeffs[v] < 0) ++q;
        }
        cost = p * q - p - q + 1;
      }
      if (best_cost < 0 || cost < best_cost) {
        best_cost = cost;
        best_i = i;
      }
    }
    eliminate(w, todo[best_i]);
    todo.erase(todo.begin() + static_cast<long>(best_i));
    w.simplify();
    if (w.infeasible) return {true};
  }
  bool has_lo = false, has_hi = false;
  Value lo = 0, hi = 0;
  for (const Row& r : w.eq) {
    Value a = r.coeffs[var];
    // Only `var` remains with a nonzero coefficient.
    if (a == 0) continue;
    if (r.constant % a != 0) return {true};
    Value x = -r.constant / a;
    if (!has_lo || x > lo) lo = x;
    if (!has_hi || x < hi) hi = x;
    has_lo = has_hi = true;
  }
  for (const Row& r : w.ge) {
    Value a = r.coeffs[var];
    if (a > 0) {
      Value x = ceil_div(-r.constant, a);
      if (!has_lo || x > lo) lo = x;
      has_lo = true;
    } else if (a < 0) {
      Value x = floor_div(r.constant, -a);
      if (!has_hi || x < hi) hi = x;
      has_hi = true;
    }
  }
  if (!has_lo || !has_hi) throw UnboundedSet("unbounded set");
  if (lo > hi) return {true};
  return {false, lo, hi};
}

void substitute(Work& w, std::size_t var, Value v) {
  for (Row& r : w.ge) {
    if (r.coeffs[var] != 0) {
      r.constant = checked_add(r.constant, checked_mul(r.coeffs[var], v));
      r.coeffs[var] = 0;
    }
  }
  for (Row& r : w.eq) {
    if (r.coeffs[var] != 0) {
      r.constant = checked_add(r.constant, checked_mul(r.coeffs[var], v));
      r.coeffs[var] = 0;
    }
  }
}

bool search(Work w, std::size_t k, std::size_t n, std::size_t n_ordered, LexKind kind,
            std::vector<Value>& out) {
  w.simplify();
  if (w.infeasible) return false;
  if (k == n) return true;
  Range range = project_bounds(w, k, k, n);
  if (range.infeasible) return false;
  bool descending = k < n_ordered && kind == LexKind::Max;
  for (Value step = 0;; ++step) {
    Value v = descending ? range.hi - step : range.lo + step;
    if (v < range.lo || v > range.hi) break;
    Work next = w;
    substitute(next, k, v);
    out[k] = v;
    if (search(std::move(next), k + 1, n, n_ordered, kind, out)) return true;
  }
  return false;
}

}  // namespace

std::size_t LinearSystem::add_var() {
  ++num_vars_;
  for (Row& r : ge_) r.coeffs.push_back(0);
  for (Row& r : eq_) r.coeffs.push_back(0);
  return num_vars_ - 1;
}

void LinearSystem::widen(Row& r) const {
  if (r.coeffs.size() > num_vars_) throw DimensionMismatch("row wider than system");
  r.coeffs.resize(num_vars_, 0);
}

void LinearSystem::add_ge(Row row) {
  widen(row);
  ge_.push_back(std::move(row));
}

void LinearSystem::add_eq(Row row) {
  widen(row);
  eq_.push_back(std::move(row));
}

void LinearSystem::add_lower(std::size_t var, Value lo) {
  Row r = zero_row();
  r.coeffs[var] = 1;
  r.constant = checked_sub(0, lo);
  add_ge(std::move(r));
}

void LinearSystem::add_upper(std::size_t var, Value hi) {
  Row r = zero_row();
  r.coeffs[var] = -1;
  r.constant = hi;
  add_ge(std::move(r));
}

std::size_t LinearSystem::add_floor(const Row& numerator, Value divisor) {
  if (divisor < 1) throw Error("divisor must be positive");
  std::size_t q = add_var();
  Row lower = numerator;  // num - d*q >= 0
  widen(lower);
  lower.coeffs[q] = checked_sub(lower.coeffs[q], divisor);
  Row upper;  // d*q + d - 1 - num >= 0
  upper.coeffs.assign(num_vars_, 0);
  for (std::size_t i = 0; i < numerator.coeffs.size(); ++i) upper.coeffs[i] = -numerator.coeffs[i];
  upper.coeffs[q] = checked_add(upper.coeffs[q], divisor);
  upper.constant = checked_sub(divisor - 1, numerator.constant);
  add_ge(std::move(lower));
  add_ge(std::move(upper));
  return q;
}

std::optional<std::vector<Value>> LinearSystem::lexopt(std::size_t n_ordered, LexKind kind) const {
  if (n_ordered > num_vars_) throw DimensionMismatch("more ordered variables than variables");
  Work w;
  w.ge = ge_;
  w.eq = eq_;
  std::vector<Value> out(num_vars_, 0);
  if (!search(std::move(w), 0, num_vars_, n_ordered, kind, out)) return std::nullopt;
  return out;
}

bool LinearSystem::feasible() const { return lexopt(0, LexKind::Min).has_value(); }

}  // namespace warpsim
