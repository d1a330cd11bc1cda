#include "warpsim/intset.hpp"

#include <algorithm>
#include <sstream>

namespace warpsim {

Value checked_add(Value a, Value b) {
  Value r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("integer overflow in addition");
  return r;
}

Value checked_sub(Value a, Value b) {
  Value r;
  if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("integer overflow in subtraction");
  return r;
}

Value checked_mul(Value a, Value b) {
  Value r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("integer overflow in multiplication");
  return r;
}

Value floor_div(Value n, Value d) {
  Value q = n / d;
  if ((n % d != 0) && ((n < 0) != (d < 0))) --q;
  return q;
}

Value ceil_div(Value n, Value d) { return -floor_div(-n, d); }

Value floor_mod(Value n, Value d) { return n - floor_div(n, d) * d; }

std::vector<std::string> default_dims(std::size_t n) {
  std::vector<std::string> dims;
  dims.reserve(n);
  for (std::size_t i = 0; i < n; ++i) dims.push_back("x" + std::to_string(i));
  return dims;
}

// ---------------------------------------------------------------- IterVec

std::strong_ordering IterVec::compare(const IterVec& other) const {
  if (dim() != other.dim()) {
    throw DimensionMismatch("comparing iteration vectors of dimension " + std::to_string(dim()) +
                            " and " + std::to_string(other.dim()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] != other.values_[i]) return values_[i] <=> other.values_[i];
  }
  return std::strong_ordering::equal;
}

std::string IterVec::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < values_.size(); ++i) os << (i ? "," : "") << values_[i];
  os << ')';
  return os.str();
}

IterVec operator+(const IterVec& a, const IterVec& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("adding vectors of different dimension");
  IterVec r = a;
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = checked_add(a[i], b[i]);
  return r;
}

IterVec operator-(const IterVec& a, const IterVec& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("subtracting vectors of different dimension");
  IterVec r = a;
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = checked_sub(a[i], b[i]);
  return r;
}

// ------------------------------------------------------------- AffineExpr

AffineExpr AffineExpr::var(const std::string& name, Value coeff) {
  AffineExpr e;
  e.add_term(name, coeff);
  return e;
}

Value AffineExpr::coeff(const std::string& name) const {
  auto it = coeffs_.find(name);
  return it == coeffs_.end() ? 0 : it->second;
}

AffineExpr& AffineExpr::add_term(const std::string& name, Value coeff) {
  Value c = checked_add(this->coeff(name), coeff);
  if (c == 0)
    coeffs_.erase(name);
  else
    coeffs_[name] = c;
  return *this;
}

AffineExpr& AffineExpr::add_constant(Value c) {
  constant_ = checked_add(constant_, c);
  return *this;
}

AffineExpr AffineExpr::operator+(const AffineExpr& o) const {
  AffineExpr r = *this;
  for (const auto& [n, c] : o.coeffs_) r.add_term(n, c);
  r.add_constant(o.constant_);
  return r;
}

AffineExpr AffineExpr::operator-(const AffineExpr& o) const { return *this + o * -1; }

AffineExpr AffineExpr::operator*(Value k) const {
  AffineExpr r;
  if (k == 0) return r;
  for (const auto& [n, c] : coeffs_) r.coeffs_[n] = checked_mul(c, k);
  r.constant_ = checked_mul(constant_, k);
  return r;
}

Value AffineExpr::evaluate(std::span<const std::string> names, std::span<const Value> point) const {
  if (names.size() != point.size()) throw DimensionMismatch("binding size mismatch");
  Value acc = constant_;
  for (const auto& [n, c] : coeffs_) {
    auto it = std::find(names.begin(), names.end(), n);
    if (it == names.end()) throw Error("unbound variable '" + n + "'");
    acc = checked_add(acc, checked_mul(c, point[static_cast<std::size_t>(it - names.begin())]));
  }
  return acc;
}

std::string AffineExpr::str() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [n, c] : coeffs_) {
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << '-';
    Value a = c < 0 ? -c : c;
    if (a != 1) os << a << '*';
    os << n;
    first = false;
  }
  if (first) {
    os << constant_;
  } else if (constant_ != 0) {
    os << (constant_ < 0 ? " - " : " + ") << (constant_ < 0 ? -constant_ : constant_);
  }
  return os.str();
}

// -------------------------------------------------------------------- Row

Value Row::eval(std::span<const Value> x) const {
  Value acc = constant;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] != 0) acc = checked_add(acc, checked_mul(coeffs[i], x[i]));
  }
  return acc;
}

// --------------------------------------------------------------- BasicSet

BasicSet::BasicSet(std::vector<std::string> dims) : dims_(std::move(dims)) {
  for (std::size_t i = 0; i < dims_.size(); ++i)
    for (std::size_t j = i + 1; j < dims_.size(); ++j)
      if (dims_[i] == dims_[j]) throw Error("duplicate dimension name '" + dims_[i] + "'");
}

std::size_t BasicSet::var_index(const std::string& name) const {
  for (std::size_t i = 0; i < dims_.size(); ++i)
    if (dims_[i] == name) return i;
  for (std::size_t i = 0; i < div_names_.size(); ++i)
    if (div_names_[i] == name) return dims_.size() + i;
  throw Error("undeclared variable '" + name + "'");
}

Row BasicSet::to_row(const AffineExpr& e) const {
  Row r{std::vector<Value>(num_vars(), 0), e.constant()};
  for (const auto& [n, c] : e.coeffs()) r.coeffs[var_index(n)] = c;
  return r;
}

AffineExpr BasicSet::to_expr(const Row& r) const {
  AffineExpr e(r.constant);
  for (std::size_t i = 0; i < r.coeffs.size(); ++i) {
    if (r.coeffs[i] == 0) continue;
    e.add_term(i < dims_.size() ? dims_[i] : div_names_[i - dims_.size()], r.coeffs[i]);
  }
  return e;
}

std::size_t BasicSet::add_div(const DivTerm& term) {
  if (term.name.empty()) throw Error("div variable needs a name");
  for (const auto& d : dims_)
    if (d == term.name) throw Error("div name clashes with dimension '" + d + "'");
  for (const auto& d : div_names_)
    if (d == term.name) throw Error("duplicate div name '" + d + "'");
  Row num = to_row(term.numerator);
  std::size_t idx = add_div(std::move(num), term.divisor);
  div_names_.back() = term.name;
  return idx;
}

std::size_t BasicSet::add_div(Row numerator, Value divisor) {
  if (divisor < 1) throw Error("divisor must be positive");
  if (numerator.coeffs.size() > num_vars()) throw DimensionMismatch("div numerator too wide");
  numerator.coeffs.resize(num_vars(), 0);
  divs_.push_back(Div{std::move(numerator), divisor});
  div_names_.push_back("_q" + std::to_string(divs_.size() - 1));
  for (auto& c : constraints_) c.row.coeffs.push_back(0);
  for (auto& d : divs_) d.numerator.coeffs.resize(num_vars(), 0);
  return num_vars() - 1;
}

BasicSet& BasicSet::add_ge(const AffineExpr& e) { return add_constraint(to_row(e), false); }

BasicSet& BasicSet::add_eq(const AffineExpr& e) { return add_constraint(to_row(e), true); }

BasicSet& BasicSet::add_constraint(Row row, bool equality) {
  if (row.coeffs.size() > num_vars()) throw DimensionMismatch("constraint too wide");
  row.coeffs.resize(num_vars(), 0);
  constraints_.push_back(Constraint{std::move(row), equality});
  return *this;
}

std::vector<Value> BasicSet::complete(std::span<const Value> point) const {
  if (point.size() != dims_.size()) throw DimensionMismatch("point dimension mismatch");
  std::vector<Value> x(point.begin(), point.end());
  x.resize(num_vars(), 0);
  for (std::size_t k = 0; k < divs_.size(); ++k) {
    x[dims_.size() + k] = floor_div(divs_[k].numerator.eval(x), divs_[k].divisor);
  }
  return x;
}

bool BasicSet::contains(std::span<const Value> point) const {
  std::vector<Value> x = complete(point);
  for (const auto& c : constraints_) {
    Value v = c.row.eval(x);
    if (c.equality ? v != 0 : v < 0) return false;
  }
  return true;
}

bool BasicSet::row_depends_on(const Row& row, std::size_t var) const {
  if (var < row.coeffs.size() && row.coeffs[var] != 0) return true;
  for (std::size_t k = 0; k < divs_.size(); ++k) {
    std::size_t idx = dims_.size() + k;
    if (idx < row.coeffs.size() && row.coeffs[idx] != 0 && idx != var &&
        row_depends_on(divs_[k].numerator, var))
      return true;
  }
  return false;
}

BasicSet BasicSet::intersect(const BasicSet& other) const {
  if (dims_ != other.dims_) throw DimensionMismatch("intersecting sets over different dimensions");
  BasicSet out = *this;
  std::size_t nd = dims_.size();
  std::size_t shift = divs_.size();
  // Remaps a row of `other` into `out`'s variable numbering.
  auto remap = [&](const Row& r) {
    Row m{std::vector<Value>(out.num_vars(), 0), r.constant};
    for (std::size_t i = 0; i < r.coeffs.size(); ++i) {
      if (r.coeffs[i] == 0) continue;
      std::size_t j = i < nd ? i : i + shift;
      m.coeffs[j] = r.coeffs[i];
    }
    return m;
  };
  for (std::size_t k = 0; k < other.divs_.size(); ++k) {
    std::size_t idx = out.add_div(remap(other.divs_[k].numerator), other.divs_[k].divisor);
    std::string name = other.div_names_[k];
    if (std::find(out.div_names_.begin(), out.div_names_.end(), name) != out.div_names_.end())
      name = "_q" + std::to_string(idx - nd);
    out.div_names_.back() = name;
  }
  for (const auto& c : other.constraints_) out.add_constraint(remap(c.row), c.equality);
  return out;
}

// --------------------------------------------------------------- UnionSet

UnionSet::UnionSet(BasicSet piece) : dims_(piece.dims()) { pieces_.push_back(std::move(piece)); }

void UnionSet::add_piece(BasicSet piece) {
  if (piece.dims() != dims_) throw DimensionMismatch("piece dimensions differ from union");
  pieces_.push_back(std::move(piece));
}

// ------------------------------------------------------------- operations

namespace {

void check_dims(const UnionSet& a, const UnionSet& b) {
  if (a.dims() != b.dims()) throw DimensionMismatch("sets have different dimensions");
}

// Builds the solver system for one basic set, optionally pinning a prefix.
LinearSystem system_for(const BasicSet& s, const IterVec* prefix) {
  LinearSystem sys(s.dim());
  std::vector<Row> dim_exprs;
  for (std::size_t d = 0; d < s.dim(); ++d) {
    Row r{std::vector<Value>(s.dim(), 0), 0};
    r.coeffs[d] = 1;
    dim_exprs.push_back(std::move(r));
  }
  for (auto& c : embed(sys, s, dim_exprs)) {
    if (c.equality)
      sys.add_eq(std::move(c.row));
    else
      sys.add_ge(std::move(c.row));
  }
  if (prefix) {
    for (std::size_t d = 0; d < prefix->dim(); ++d) {
      Row r = sys.zero_row();
      r.coeffs[d] = 1;
      r.constant = -(*prefix)[d];
      sys.add_eq(std::move(r));
    }
  }
  return sys;
}

std::optional<IterVec> solve(const BasicSet& s, const IterVec* prefix, LexKind kind) {
  LinearSystem sys = system_for(s, prefix);
  auto sol = sys.lexopt(s.dim(), kind);
  if (!sol) return std::nullopt;
  sol->resize(s.dim());
  return IterVec(std::move(*sol));
}

std::optional<IterVec> best_of(const UnionSet& s, const IterVec* prefix, LexKind kind) {
  std::optional<IterVec> best;
  for (const auto& p : s.pieces()) {
    auto r = solve(p, prefix, kind);
    if (!r) continue;
    if (!best || (kind == LexKind::Min ? *r < *best : *r > *best)) best = std::move(r);
  }
  return best;
}

}  // namespace

std::vector<BasicSet::Constraint> embed(LinearSystem& sys, const BasicSet& set,
                                        std::span<const Row> dim_exprs) {
  if (dim_exprs.size() != set.dim()) throw DimensionMismatch("embedding needs one row per dim");
  // var_rows[v]: row over sys variables for variable v of `set`.
  std::vector<Row> var_rows(dim_exprs.begin(), dim_exprs.end());
  auto translate = [&](const Row& r) {
    Row out = sys.zero_row();
    out.constant = r.constant;
    for (std::size_t i = 0; i < r.coeffs.size(); ++i) {
      Value c = r.coeffs[i];
      if (c == 0) continue;
      const Row& vr = var_rows.at(i);
      for (std::size_t j = 0; j < vr.coeffs.size(); ++j)
        out.coeffs[j] = checked_add(out.coeffs[j], checked_mul(c, vr.coeffs[j]));
      out.constant = checked_add(out.constant, checked_mul(c, vr.constant));
    }
    return out;
  };
  for (const auto& div : set.divs()) {
    Row num = translate(div.numerator);
    std::size_t q = sys.add_floor(num, div.divisor);
    for (Row& r : var_rows) r.coeffs.resize(sys.num_vars(), 0);
    Row qr = sys.zero_row();
    qr.coeffs[q] = 1;
    var_rows.push_back(std::move(qr));
  }
  std::vector<BasicSet::Constraint> out;
  out.reserve(set.constraints().size());
  for (const auto& c : set.constraints()) out.push_back({translate(c.row), c.equality});
  return out;
}

bool member(const UnionSet& s, const IterVec& p) {
  if (p.dim() != s.dim()) throw DimensionMismatch("point dimension differs from set");
  return std::any_of(s.pieces().begin(), s.pieces().end(),
                     [&](const BasicSet& b) { return b.contains(p.values()); });
}

UnionSet intersect(const UnionSet& a, const UnionSet& b) {
  check_dims(a, b);
  UnionSet out(a.dims());
  for (const auto& pa : a.pieces())
    for (const auto& pb : b.pieces()) out.add_piece(pa.intersect(pb));
  return out;
}

UnionSet union_with(const UnionSet& a, const UnionSet& b) {
  check_dims(a, b);
  UnionSet out = a;
  for (const auto& p : b.pieces()) out.add_piece(p);
  return out;
}

bool is_empty(const BasicSet& s) { return !system_for(s, nullptr).feasible(); }

bool is_empty(const UnionSet& s) {
  return std::all_of(s.pieces().begin(), s.pieces().end(),
                     [](const BasicSet& b) { return is_empty(b); });
}

std::optional<IterVec> lexopt(const BasicSet& s, LexKind kind) { return solve(s, nullptr, kind); }

std::optional<IterVec> lexmin(const UnionSet& s) { return best_of(s, nullptr, LexKind::Min); }

std::optional<IterVec> lexmax(const UnionSet& s) { return best_of(s, nullptr, LexKind::Max); }

std::optional<IterVec> lex_bound_with_prefix(const UnionSet& s, const IterVec& prefix, LexKind kind) {
  if (prefix.dim() >= s.dim() && s.dim() > 0)
    throw DimensionMismatch("prefix must be shorter than the set dimension");
  return best_of(s, &prefix, kind);
}

std::optional<IterVec> lex_bound_with_prefix(const BasicSet& s, const IterVec& prefix, LexKind kind) {
  if (prefix.dim() >= s.dim() && s.dim() > 0)
    throw DimensionMismatch("prefix must be shorter than the set dimension");
  return solve(s, &prefix, kind);
}

UnionSet interval(const std::vector<std::string>& dims, const IterVec& i, const IterVec& j) {
  if (i.dim() != j.dim() || i.dim() != dims.size())
    throw DimensionMismatch("interval bounds of different dimension");
  std::size_t n = dims.size();
  UnionSet out(dims);
  if (n == 0) return out;  // the single 0-tuple never satisfies k < j
  auto var = [&](std::size_t d) { return AffineExpr::var(dims[d]); };
  // Lower part: k >= i  <=>  exists p: k[0..p) = i[0..p), k[p] > i[p]  or  k = i.
  // Upper part: k <  j  <=>  exists q: k[0..q) = j[0..q), k[q] < j[q].
  // Each combination (p, q) is one conjunction; infeasible ones are skipped
  // cheaply since they only involve fixed equalities.
  for (std::size_t p = 0; p <= n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      BasicSet piece(dims);
      for (std::size_t d = 0; d < std::min(p, n); ++d) piece.add_eq(var(d) - AffineExpr(i[d]));
      if (p < n) piece.add_ge(var(p) - AffineExpr(checked_add(i[p], 1)));
      for (std::size_t d = 0; d < q; ++d) piece.add_eq(var(d) - AffineExpr(j[d]));
      piece.add_ge(AffineExpr(checked_sub(j[q], 1)) - var(q));
      // Discard pieces whose pinned prefixes already contradict each other.
      bool ok = true;
      std::size_t common = std::min(p, q);
      for (std::size_t d = 0; d < common && ok; ++d) ok = i[d] == j[d];
      if (ok && p < q) ok = i[p] + 1 <= j[p];  // k[p] pinned to j[p] must exceed i[p]
      if (ok && q < p) ok = i[q] <= j[q] - 1;  // k[q] pinned to i[q] must be below j[q]
      if (ok && p == q && p < n) ok = i[p] + 1 <= j[p] - 1;
      if (ok) out.add_piece(std::move(piece));
    }
  }
  return out;
}

UnionSet interval(const IterVec& i, const IterVec& j) { return interval(default_dims(i.dim()), i, j); }

}  // namespace warpsim
