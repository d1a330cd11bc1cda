#pragma once

// Exhaustive-enumeration oracle over random bounded sets.

#include <algorithm>
#include <cstdint>
#include <random>

#include "warpsim/intset.hpp"

namespace props {

using namespace warpsim;


constexpr Value kBox = 5;

struct RandomSet {
  BasicSet set;
  std::vector<IterVec> points;  // enumerated members, lexicographic
};

inline std::vector<IterVec> box_points(std::size_t dim) {
  const Value side = 2 * kBox + 1;
  Value total = 1;
  for (std::size_t k = 0; k < dim; ++k) total *= side;
  std::vector<IterVec> out;
  for (Value n = 0; n < total; ++n) {
    std::vector<Value> v(dim);
    Value r = n;
    for (std::size_t k = dim; k-- > 0;) {
      v[k] = r % side - kBox;
      r /= side;
    }
    out.emplace_back(std::move(v));
  }
  return out;
}

// Direct evaluation of a constraint list given as (coeffs, constant, eq,
// optional floor) tuples, independent of BasicSet::contains.
struct RawConstraint {
  std::vector<Value> a;
  Value c = 0;
  bool eq = false;
  Value floor_coeff = 0;  // coefficient of floor((a_f.x + c_f) / den)
  std::vector<Value> af;
  Value cf = 0, den = 1;
};

inline Value fdiv(Value n, Value d) {
  Value q = n / d;
  return (n % d != 0 && (n < 0) != (d < 0)) ? q - 1 : q;
}

inline bool raw_holds(const std::vector<RawConstraint>& cs, const IterVec& p) {
  for (const auto& c : cs) {
    Value v = c.c;
    for (std::size_t k = 0; k < p.dim(); ++k) v += c.a[k] * p[k];
    if (c.floor_coeff) {
      Value n = c.cf;
      for (std::size_t k = 0; k < p.dim(); ++k) n += c.af[k] * p[k];
      v += c.floor_coeff * fdiv(n, c.den);
    }
    if (c.eq ? v != 0 : v < 0) return false;
  }
  return true;
}

inline RandomSet random_set(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_int_distribution<Value> coef(-8, 8), cst(-12, 12), ncons(1, 3), pick(0, 9), den(2, 4);
  std::vector<std::string> dims = default_dims(dim);
  BasicSet s(dims);
  std::vector<RawConstraint> raw;
  for (std::size_t k = 0; k < dim; ++k) {
    Value lo = std::uniform_int_distribution<Value>(-kBox, 1)(rng);
    Value hi = std::uniform_int_distribution<Value>(-1, kBox)(rng);
    RawConstraint l{std::vector<Value>(dim, 0), -lo};
    l.a[k] = 1;
    RawConstraint h{std::vector<Value>(dim, 0), hi};
    h.a[k] = -1;
    raw.push_back(l);
    raw.push_back(h);
  }
  // Always bound by the box so enumeration is exhaustive.
  for (std::size_t k = 0; k < dim; ++k) {
    RawConstraint l{std::vector<Value>(dim, 0), kBox};
    l.a[k] = 1;
    RawConstraint h{std::vector<Value>(dim, 0), kBox};
    h.a[k] = -1;
    raw.push_back(l);
    raw.push_back(h);
  }
  Value extra = ncons(rng);
  for (Value e = 0; e < extra; ++e) {
    RawConstraint c{std::vector<Value>(dim, 0), cst(rng)};
    for (auto& x : c.a) x = coef(rng);
    c.eq = pick(rng) == 0;
    if (pick(rng) < 3) {
      c.floor_coeff = coef(rng);
      if (c.floor_coeff == 0) c.floor_coeff = 1;
      c.af.assign(dim, 0);
      for (auto& x : c.af) x = coef(rng);
      c.cf = cst(rng);
      c.den = den(rng);
    }
    raw.push_back(c);
  }
  for (const auto& c : raw) {
    Row r{std::vector<Value>(s.num_vars(), 0), c.c};
    for (std::size_t k = 0; k < dim; ++k) r.coeffs[k] = c.a[k];
    if (c.floor_coeff) {
      Row num{std::vector<Value>(s.num_vars(), 0), c.cf};
      for (std::size_t k = 0; k < dim; ++k) num.coeffs[k] = c.af[k];
      std::size_t q = s.add_div(num, c.den);
      r.coeffs.resize(s.num_vars(), 0);
      r.coeffs[q] = c.floor_coeff;
    }
    s.add_constraint(r, c.eq);
  }
  RandomSet out{s, {}};
  for (const auto& p : box_points(dim))
    if (raw_holds(raw, p)) out.points.push_back(p);
  return out;
}

// Violations over `trials` random set pairs of dimension 1 to 3.
inline int intset_violations(std::uint64_t seed, int trials) {
  std::mt19937_64 rng(seed);
  int violations = 0;
  for (int t = 0; t < trials; ++t) {
    std::size_t dim = 1 + static_cast<std::size_t>(t % 3);
    RandomSet a = random_set(rng, dim);
    RandomSet b = random_set(rng, dim);
    auto all = box_points(dim);
    std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);

    // member on a sample of points (all of them for small dims).
    std::size_t samples = dim < 3 ? all.size() : 60;
    for (std::size_t k = 0; k < samples; ++k) {
      const IterVec& p = dim < 3 ? all[k] : all[pick(rng)];
      bool expect = std::binary_search(a.points.begin(), a.points.end(), p);
      if (member(a.set, p) != expect) ++violations;
    }
    if (is_empty(a.set) != a.points.empty()) ++violations;
    auto mn = lexmin(a.set);
    auto mx = lexmax(a.set);
    if (a.points.empty()) {
      if (mn || mx) ++violations;
    } else {
      if (!mn || *mn != a.points.front()) ++violations;
      if (!mx || *mx != a.points.back()) ++violations;
    }

    // Union and intersection.
    UnionSet u = union_with(a.set, b.set);
    UnionSet x = intersect(a.set, b.set);
    const IterVec& p = all[pick(rng)];
    bool in_a = std::binary_search(a.points.begin(), a.points.end(), p);
    bool in_b = std::binary_search(b.points.begin(), b.points.end(), p);
    if (member(u, p) != (in_a || in_b)) ++violations;
    if (member(x, p) != (in_a && in_b)) ++violations;
    std::vector<IterVec> both;
    std::set_intersection(a.points.begin(), a.points.end(), b.points.begin(), b.points.end(),
                          std::back_inserter(both));
    if (is_empty(x) != both.empty()) ++violations;
    auto umin = lexmin(u);
    if (!a.points.empty() || !b.points.empty()) {
      IterVec want = a.points.empty()                ? b.points.front()
                     : b.points.empty()              ? a.points.front()
                                                     : std::min(a.points.front(), b.points.front());
      if (!umin || *umin != want) ++violations;
    } else if (umin) {
      ++violations;
    }

    // interval(i, j) restricted to the set.
    IterVec i = all[pick(rng)], j = all[pick(rng)];
    UnionSet iv = intersect(interval(default_dims(dim), i, j), a.set);
    std::vector<IterVec> want;
    for (const auto& q : a.points)
      if (i <= q && q < j) want.push_back(q);
    auto imin = lexmin(iv);
    auto imax = lexmax(iv);
    if (want.empty()) {
      if (imin || imax) ++violations;
    } else {
      if (!imin || *imin != want.front()) ++violations;
      if (!imax || *imax != want.back()) ++violations;
    }
    if (member(interval(i, j), p) != (i <= p && p < j)) ++violations;

    // Bounds under a fixed prefix.
    if (dim > 1) {
      IterVec pre({all[pick(rng)][0]});
      std::optional<IterVec> lo, hi;
      for (const auto& q : a.points)
        if (q[0] == pre[0]) {
          if (!lo) lo = q;
          hi = q;
        }
      if (lex_bound_with_prefix(a.set, pre, LexKind::Min) != lo) ++violations;
      if (lex_bound_with_prefix(a.set, pre, LexKind::Max) != hi) ++violations;
    }
  }
  return violations;
}

}  // namespace props
