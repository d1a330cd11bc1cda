#pragma once

// Minimal Presburger-style integer sets: bounded quasi-affine sets over named
// loop iterators, with membership, intersection, union, emptiness and
// lexicographic optimisation. Everything is decided exactly with 64-bit
// checked arithmetic.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace warpsim {

using Value = std::int64_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class UnboundedSet : public Error {
 public:
  using Error::Error;
};

Value checked_add(Value a, Value b);
Value checked_sub(Value a, Value b);
Value checked_mul(Value a, Value b);
/// Floored division; `d` must be positive.
Value floor_div(Value n, Value d);
Value ceil_div(Value n, Value d);
/// Non-negative remainder, `d` positive.
Value floor_mod(Value n, Value d);

/// A loop-iterator valuation. Ordering is lexicographic and only defined
/// between vectors of equal dimension.
class IterVec {
 public:
  IterVec() = default;
  IterVec(std::initializer_list<Value> v) : values_(v) {}
  explicit IterVec(std::vector<Value> v) : values_(std::move(v)) {}

  std::size_t dim() const { return values_.size(); }
  Value operator[](std::size_t i) const { return values_[i]; }
  Value& operator[](std::size_t i) { return values_[i]; }
  const std::vector<Value>& values() const { return values_; }
  std::vector<Value>& values() { return values_; }
  Value back() const { return values_.back(); }
  void push_back(Value v) { values_.push_back(v); }
  void pop_back() { values_.pop_back(); }

  /// Throws DimensionMismatch for vectors of different dimension.
  std::strong_ordering compare(const IterVec& other) const;

  friend bool operator==(const IterVec&, const IterVec&) = default;
  friend std::strong_ordering operator<=>(const IterVec& a, const IterVec& b) {
    return a.compare(b);
  }

  std::string str() const;

 private:
  std::vector<Value> values_;
};

IterVec operator+(const IterVec& a, const IterVec& b);
IterVec operator-(const IterVec& a, const IterVec& b);

/// Integer affine expression over named variables. Zero coefficients are
/// never stored, so structural equality is semantic equality.
class AffineExpr {
 public:
  AffineExpr() = default;
  AffineExpr(Value constant) : constant_(constant) {}  // NOLINT implicit
  static AffineExpr var(const std::string& name, Value coeff = 1);

  Value constant() const { return constant_; }
  Value coeff(const std::string& name) const;
  const std::map<std::string, Value>& coeffs() const { return coeffs_; }
  bool is_constant() const { return coeffs_.empty(); }

  AffineExpr& add_term(const std::string& name, Value coeff);
  AffineExpr& add_constant(Value c);

  AffineExpr operator+(const AffineExpr& o) const;
  AffineExpr operator-(const AffineExpr& o) const;
  AffineExpr operator*(Value k) const;
  AffineExpr operator-() const { return *this * -1; }

  /// Evaluates with `names[i]` bound to `point[i]`. Unbound variables are an
  /// error.
  Value evaluate(std::span<const std::string> names, std::span<const Value> point) const;

  friend bool operator==(const AffineExpr&, const AffineExpr&) = default;

  std::string str() const;

 private:
  std::map<std::string, Value> coeffs_;
  Value constant_ = 0;
};

/// floor(numerator / divisor), where the numerator may mention dims and
/// previously declared div variables by name.
struct DivTerm {
  std::string name;
  AffineExpr numerator;
  Value divisor = 1;

  friend bool operator==(const DivTerm&, const DivTerm&) = default;
};

/// Dense row `coeffs . x + constant` over a fixed variable list.
struct Row {
  std::vector<Value> coeffs;
  Value constant = 0;

  Value eval(std::span<const Value> x) const;
  friend bool operator==(const Row&, const Row&) = default;
};

/// A conjunction of affine constraints over dims plus existential quotient
/// variables. Variables are numbered dims first, then divs.
class BasicSet {
 public:
  struct Constraint {
    Row row;
    bool equality = false;  // row == 0, otherwise row >= 0
    friend bool operator==(const Constraint&, const Constraint&) = default;
  };
  struct Div {
    Row numerator;  // over dims and earlier divs only
    Value divisor = 1;
    friend bool operator==(const Div&, const Div&) = default;
  };

  BasicSet() = default;
  explicit BasicSet(std::vector<std::string> dims);

  static BasicSet universe(std::vector<std::string> dims) { return BasicSet(std::move(dims)); }

  const std::vector<std::string>& dims() const { return dims_; }
  std::size_t dim() const { return dims_.size(); }
  std::size_t num_divs() const { return divs_.size(); }
  std::size_t num_vars() const { return dims_.size() + divs_.size(); }
  const std::vector<Div>& divs() const { return divs_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<std::string>& div_names() const { return div_names_; }

  /// Declares floor(numerator/divisor) under `term.name`. Returns the
  /// variable index of the new div.
  std::size_t add_div(const DivTerm& term);
  std::size_t add_div(Row numerator, Value divisor);

  BasicSet& add_ge(const AffineExpr& e);  // e >= 0
  BasicSet& add_eq(const AffineExpr& e);  // e == 0
  BasicSet& add_constraint(Row row, bool equality);

  /// Converts a named expression to a row over this set's variables.
  Row to_row(const AffineExpr& e) const;
  AffineExpr to_expr(const Row& r) const;

  bool contains(std::span<const Value> point) const;
  /// Computes every div value for `point`.
  std::vector<Value> complete(std::span<const Value> point) const;

  /// Whether `var` (dim or div index) influences the row, directly or
  /// through a div definition.
  bool row_depends_on(const Row& row, std::size_t var) const;

  BasicSet intersect(const BasicSet& other) const;

  friend bool operator==(const BasicSet&, const BasicSet&) = default;

 private:
  std::size_t var_index(const std::string& name) const;

  std::vector<std::string> dims_;
  std::vector<std::string> div_names_;
  std::vector<Div> divs_;
  std::vector<Constraint> constraints_;
};

/// Finite union of basic sets over identical dims. Pieces may overlap.
class UnionSet {
 public:
  UnionSet() = default;
  explicit UnionSet(std::vector<std::string> dims) : dims_(std::move(dims)) {}
  UnionSet(BasicSet piece);  // NOLINT implicit

  static UnionSet empty(std::vector<std::string> dims) { return UnionSet(std::move(dims)); }

  const std::vector<std::string>& dims() const { return dims_; }
  std::size_t dim() const { return dims_.size(); }
  const std::vector<BasicSet>& pieces() const { return pieces_; }
  void add_piece(BasicSet piece);

 private:
  std::vector<std::string> dims_;
  std::vector<BasicSet> pieces_;
};

enum class LexKind { Min, Max };

bool member(const UnionSet& s, const IterVec& p);
UnionSet intersect(const UnionSet& a, const UnionSet& b);
UnionSet union_with(const UnionSet& a, const UnionSet& b);
bool is_empty(const UnionSet& s);
bool is_empty(const BasicSet& s);
/// Lexicographic optima require a bounded set; UnboundedSet is thrown
/// otherwise, even when the requested optimum would exist.
std::optional<IterVec> lexmin(const UnionSet& s);
std::optional<IterVec> lexmax(const UnionSet& s);
std::optional<IterVec> lexopt(const BasicSet& s, LexKind kind);
std::optional<IterVec> lex_bound_with_prefix(const UnionSet& s, const IterVec& prefix, LexKind kind);
std::optional<IterVec> lex_bound_with_prefix(const BasicSet& s, const IterVec& prefix, LexKind kind);
/// {k | i <= k < j} in lexicographic order. Pieces are disjoint: one per pair
/// of positions at which k first departs from i and from j.
UnionSet interval(const std::vector<std::string>& dims, const IterVec& i, const IterVec& j);
UnionSet interval(const IterVec& i, const IterVec& j);

/// Default dimension names x0, x1, ...
std::vector<std::string> default_dims(std::size_t n);

/// Integer linear system with exact lexicographic optimisation. This is the
/// solver behind every set query; it is exposed so callers can assemble
/// problems mixing several sets (conflict sets, block-equality queries).
class LinearSystem {
 public:
  explicit LinearSystem(std::size_t num_vars = 0) : num_vars_(num_vars) {}

  std::size_t num_vars() const { return num_vars_; }
  std::size_t add_var();
  void add_ge(Row row);
  void add_eq(Row row);
  /// Adds `row` with `constant` and a single coefficient, a shorthand for
  /// bound constraints.
  void add_lower(std::size_t var, Value lo);  // x >= lo
  void add_upper(std::size_t var, Value hi);  // x <= hi

  /// Introduces q = floor(numerator/divisor) and returns its index.
  std::size_t add_floor(const Row& numerator, Value divisor);

  /// Variables [0, n_ordered) are optimised lexicographically; the rest are
  /// existential. Returns values for all variables.
  std::optional<std::vector<Value>> lexopt(std::size_t n_ordered, LexKind kind) const;
  bool feasible() const;

  Row zero_row() const { return Row{std::vector<Value>(num_vars_, 0), 0}; }
  const std::vector<Row>& inequalities() const { return ge_; }
  const std::vector<Row>& equalities() const { return eq_; }

 private:
  void widen(Row& r) const;

  std::size_t num_vars_;
  std::vector<Row> ge_;
  std::vector<Row> eq_;
};

/// Translates the constraints of `set` into `sys`, substituting each dim of
/// `set` by `dim_exprs[d]` (a row over `sys` variables). Divs of `set` become
/// fresh variables of `sys` with their defining constraints added. Returns the
/// translated constraints of `set` without adding them, so a caller can add
/// them all or negate one.
std::vector<BasicSet::Constraint> embed(LinearSystem& sys, const BasicSet& set,
                                        std::span<const Row> dim_exprs);

}  // namespace warpsim
