#pragma once

// Static control programs as a tree of loop and access nodes, read from and
// written to a JSON exchange format.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "warpsim/cache.hpp"
#include "warpsim/intset.hpp"

namespace warpsim {

/// Maximum loop nesting depth.
inline constexpr std::size_t kMaxDepth = 6;

class ParseError : public Error {
 public:
  using Error::Error;
};

struct Diagnostic {
  enum class Severity { Warning, Error };
  Severity severity = Severity::Error;
  std::string message;
  std::string str() const;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

/// coeff * floor(num / den), allowed in bounds and guards.
struct FloorTerm {
  AffineExpr num;
  Value den = 1;
  Value coeff = 1;
  friend bool operator==(const FloorTerm&, const FloorTerm&) = default;
};

/// `expr (>= | ==) 0` where expr is affine plus optional floor terms.
struct ConstraintSpec {
  AffineExpr linear;
  std::vector<FloorTerm> floors;
  bool equality = false;
  friend bool operator==(const ConstraintSpec&, const ConstraintSpec&) = default;
};

struct ArrayDecl {
  std::string name;
  Value elem_size = 1;
  std::vector<Value> dims;  // empty for scalars
  Value base = 0;
  bool explicit_base = false;

  Value size_bytes() const;
  friend bool operator==(const ArrayDecl&, const ArrayDecl&) = default;
};

/// Byte address as an affine function of the enclosing iterators (outermost
/// first).
struct ByteExpr {
  std::array<Value, kMaxDepth> coeffs{};
  Value constant = 0;

  Value eval(std::span<const Value> iters) const;
  friend bool operator==(const ByteExpr&, const ByteExpr&) = default;
};

struct AccessNode {
  AccessKind kind = AccessKind::Read;
  std::string array;
  std::vector<AffineExpr> index;
  std::vector<ConstraintSpec> guard;

  // Derived by analyze().
  std::size_t depth = 0;
  std::size_t id = 0;      // preorder number among access nodes
  BasicSet dom;            // enclosing loop domains plus guard
  ByteExpr bytes;
  bool guarded_by_loops_only = true;  // dom adds nothing to the enclosing loop
  Value min_byte = 0, max_byte = -1;  // address range over dom (empty if max < min)
};

struct Node;

struct LoopNode {
  std::string iter;
  Value stride = 1;
  std::vector<ConstraintSpec> bounds;
  std::vector<Node> body;

  // Derived by analyze().
  std::size_t depth = 0;  // number of enclosing loops
  std::size_t id = 0;     // preorder number among loop nodes
  BasicSet dom;           // over enclosing iterators plus `iter`
  std::vector<std::size_t> accesses;  // ids of descendant access nodes
};

struct Node {
  std::variant<LoopNode, AccessNode> v;

  bool is_loop() const { return std::holds_alternative<LoopNode>(v); }
  const LoopNode& loop() const { return std::get<LoopNode>(v); }
  LoopNode& loop() { return std::get<LoopNode>(v); }
  const AccessNode& access() const { return std::get<AccessNode>(v); }
  AccessNode& access() { return std::get<AccessNode>(v); }
};

struct Program {
  std::vector<ArrayDecl> arrays;
  std::vector<Node> roots;

  // Derived by analyze(); pointers into `roots`, invalidated by copying.
  std::vector<const AccessNode*> access_nodes;
  std::vector<const LoopNode*> loop_nodes;

  Program() = default;
  Program(const Program& o);
  Program& operator=(const Program& o);
  Program(Program&&) = default;
  Program& operator=(Program&&) = default;

  const ArrayDecl* find_array(const std::string& name) const;
};

struct ParseOptions {
  Value line_size = 64;  // base address alignment
  Value array_gap = 0;   // bytes left between auto-placed arrays
  bool validate = true;  // throw ValidationError on error diagnostics
};

/// Parses and analyzes a program. Throws ParseError on malformed input and
/// ValidationError when `opts.validate` is set and errors were found.
Program parse_program(std::string_view text, const ParseOptions& opts = {});

/// Computes derived fields and returns all diagnostics.
std::vector<Diagnostic> analyze(Program& p, const ParseOptions& opts = {});
std::vector<Diagnostic> validate(const Program& p, const ParseOptions& opts = {});

/// Pretty-prints in the exchange format; base addresses are always written.
std::string print_program(const Program& p, int indent = 2);

/// Lexicographically first/last point of `loop.dom` extending `prefix`.
std::optional<IterVec> initial(const LoopNode& loop, const IterVec& prefix);
std::optional<IterVec> final_point(const LoopNode& loop, const IterVec& prefix);

BlockId access_block(const AccessNode& a, std::span<const Value> iters, Value line_size);

/// min/max of `row` (over the set's dims) on `set`, absent if the set is
/// empty.
std::optional<std::pair<Value, Value>> expr_range(const BasicSet& set, const Row& row);

}  // namespace warpsim
