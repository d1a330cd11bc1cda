#include "warpsim/scop.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "json.hpp"

namespace warpsim {

using nlohmann::json;

std::string Diagnostic::str() const {
  return std::string(severity == Severity::Error ? "error: " : "warning: ") + message;
}

namespace {

std::string join_errors(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (d.severity != Diagnostic::Severity::Error) continue;
    if (!out.empty()) out += "; ";
    out += d.message;
  }
  return out.empty() ? "validation failed" : out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diags)
    : Error(join_errors(diags)), diags_(std::move(diags)) {}

Value ArrayDecl::size_bytes() const {
  Value n = elem_size;
  for (Value d : dims) n = checked_mul(n, d);
  return n;
}

Value ByteExpr::eval(std::span<const Value> iters) const {
  Value acc = constant;
  for (std::size_t d = 0; d < iters.size(); ++d)
    if (coeffs[d] != 0) acc = checked_add(acc, checked_mul(coeffs[d], iters[d]));
  return acc;
}

// ------------------------------------------------------------- traversal

namespace {

void collect(std::vector<Node>& nodes, std::vector<const AccessNode*>& acc,
             std::vector<const LoopNode*>& loops) {
  for (auto& n : nodes) {
    if (n.is_loop()) {
      loops.push_back(&n.loop());
      collect(n.loop().body, acc, loops);
    } else {
      acc.push_back(&n.access());
    }
  }
}

}  // namespace

Program::Program(const Program& o) : arrays(o.arrays), roots(o.roots) {
  collect(roots, access_nodes, loop_nodes);
}

Program& Program::operator=(const Program& o) {
  if (this == &o) return *this;
  arrays = o.arrays;
  roots = o.roots;
  access_nodes.clear();
  loop_nodes.clear();
  collect(roots, access_nodes, loop_nodes);
  return *this;
}

const ArrayDecl* Program::find_array(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return &a;
  return nullptr;
}

// ----------------------------------------------------------------- parse

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ParseError(msg); }

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  if (!j.is_object()) fail(what + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; });
    if (!ok) fail("unknown key '" + k + "' in " + what);
  }
}

const json& require(const json& j, const char* key, const std::string& what) {
  auto it = j.find(key);
  if (it == j.end()) fail(std::string("missing key '") + key + "' in " + what);
  return *it;
}

Value as_int(const json& j, const std::string& what) {
  if (!j.is_number_integer()) fail(what + " must be an integer");
  return j.get<Value>();
}

AffineExpr parse_affine(const json& j, const std::string& what, std::vector<FloorTerm>* floors) {
  if (!j.is_object()) fail("non-affine " + what + ": expected a coefficient map");
  AffineExpr e;
  for (const auto& [k, v] : j.items()) {
    if (k == "_const") {
      e.add_constant(as_int(v, what + " constant"));
    } else if (k == "_floor") {
      if (!floors) fail("floor terms are not allowed in " + what);
      if (!v.is_array()) fail("_floor must be a list");
      for (const auto& f : v) {
        check_keys(f, {"num", "den", "coeff"}, "floor term");
        FloorTerm t;
        t.num = parse_affine(require(f, "num", "floor term"), "floor numerator", nullptr);
        t.den = as_int(require(f, "den", "floor term"), "floor divisor");
        if (t.den < 1) fail("floor divisor must be positive");
        if (f.contains("coeff")) t.coeff = as_int(f["coeff"], "floor coefficient");
        floors->push_back(std::move(t));
      }
    } else {
      if (!v.is_number_integer()) fail("non-affine " + what + ": coefficient of '" + k + "' is not an integer");
      e.add_term(k, v.get<Value>());
    }
  }
  return e;
}

ConstraintSpec parse_constraint(const json& j, const std::string& what) {
  check_keys(j, {"expr", "rel"}, what);
  ConstraintSpec c;
  c.linear = parse_affine(require(j, "expr", what), what, &c.floors);
  std::string rel = require(j, "rel", what).get<std::string>();
  if (rel == ">=0")
    c.equality = false;
  else if (rel == "=0")
    c.equality = true;
  else
    fail("relation must be \">=0\" or \"=0\", got \"" + rel + "\"");
  return c;
}

std::vector<ConstraintSpec> parse_constraints(const json& j, const std::string& what) {
  if (!j.is_array()) fail(what + " must be a list");
  std::vector<ConstraintSpec> out;
  for (const auto& c : j) out.push_back(parse_constraint(c, what));
  return out;
}

Node parse_node(const json& j);

std::vector<Node> parse_body(const json& j) {
  if (!j.is_array()) fail("loop body must be a list");
  std::vector<Node> out;
  for (const auto& n : j) out.push_back(parse_node(n));
  return out;
}

Node parse_node(const json& j) {
  if (!j.is_object()) fail("node must be an object");
  std::string type = require(j, "type", "node").get<std::string>();
  if (type == "loop") {
    check_keys(j, {"type", "iter", "stride", "bounds", "body"}, "loop node");
    LoopNode l;
    l.iter = require(j, "iter", "loop node").get<std::string>();
    if (l.iter.empty() || l.iter[0] == '_') fail("invalid iterator name '" + l.iter + "'");
    if (j.contains("stride")) l.stride = as_int(j["stride"], "stride");
    l.bounds = parse_constraints(require(j, "bounds", "loop node"), "loop bound");
    l.body = parse_body(require(j, "body", "loop node"));
    return Node{std::move(l)};
  }
  if (type == "access") {
    check_keys(j, {"type", "kind", "array", "idx", "guard"}, "access node");
    AccessNode a;
    std::string kind = require(j, "kind", "access node").get<std::string>();
    if (kind == "read")
      a.kind = AccessKind::Read;
    else if (kind == "write")
      a.kind = AccessKind::Write;
    else
      fail("access kind must be read or write");
    a.array = require(j, "array", "access node").get<std::string>();
    const json& idx = require(j, "idx", "access node");
    if (!idx.is_array()) fail("idx must be a list");
    for (const auto& e : idx) a.index.push_back(parse_affine(e, "index", nullptr));
    if (j.contains("guard")) a.guard = parse_constraints(j["guard"], "guard");
    return Node{std::move(a)};
  }
  fail("unknown node type '" + type + "'");
}

ArrayDecl parse_array(const json& j) {
  check_keys(j, {"name", "elem_size", "dims", "base"}, "array");
  ArrayDecl a;
  a.name = require(j, "name", "array").get<std::string>();
  a.elem_size = as_int(require(j, "elem_size", "array"), "elem_size");
  const json& dims = require(j, "dims", "array");
  if (!dims.is_array()) fail("dims must be a list");
  for (const auto& d : dims) a.dims.push_back(as_int(d, "extent"));
  if (j.contains("base")) {
    a.base = as_int(j["base"], "base");
    a.explicit_base = true;
  }
  return a;
}

}  // namespace

Program parse_program(std::string_view text, const ParseOptions& opts) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  Program p;
  try {
    check_keys(j, {"arrays", "root"}, "program");
    const json& arrays = require(j, "arrays", "program");
    if (!arrays.is_array()) fail("arrays must be a list");
    for (const auto& a : arrays) p.arrays.push_back(parse_array(a));
    const json& root = require(j, "root", "program");
    if (root.is_array())
      p.roots = parse_body(root);
    else
      p.roots.push_back(parse_node(root));
  } catch (const json::exception& e) {
    throw ParseError(std::string("schema violation: ") + e.what());
  }
  auto diags = analyze(p, opts);
  if (opts.validate &&
      std::any_of(diags.begin(), diags.end(),
                  [](const Diagnostic& d) { return d.severity == Diagnostic::Severity::Error; }))
    throw ValidationError(std::move(diags));
  return p;
}

// --------------------------------------------------------------- analyze

namespace {

struct Analyzer {
  Program& p;
  const ParseOptions& opts;
  std::vector<Diagnostic> diags;
  std::vector<std::string> iters;
  std::vector<const ConstraintSpec*> path;  // enclosing constraints
  std::size_t next_loop = 0, next_access = 0;
  std::size_t floor_count = 0;

  void error(std::string m) { diags.push_back({Diagnostic::Severity::Error, std::move(m)}); }
  void warn(std::string m) { diags.push_back({Diagnostic::Severity::Warning, std::move(m)}); }

  bool known(const AffineExpr& e, const std::string& where) {
    for (const auto& [n, c] : e.coeffs()) {
      if (std::find(iters.begin(), iters.end(), n) == iters.end()) {
        error("unknown iterator '" + n + "' in " + where);
        return false;
      }
    }
    return true;
  }

  bool known(const ConstraintSpec& c, const std::string& where) {
    bool ok = known(c.linear, where);
    for (const auto& f : c.floors) ok = known(f.num, where) && ok;
    return ok;
  }

  void add_spec(BasicSet& s, const ConstraintSpec& c) {
    AffineExpr e = c.linear;
    for (const auto& f : c.floors) {
      std::string name = "_f" + std::to_string(floor_count++);
      s.add_div(DivTerm{name, f.num, f.den});
      e.add_term(name, f.coeff);
    }
    if (c.equality)
      s.add_eq(e);
    else
      s.add_ge(e);
  }

  BasicSet build_dom(const std::vector<ConstraintSpec>& extra) {
    BasicSet s(iters);
    for (const auto* c : path) add_spec(s, *c);
    for (const auto& c : extra) add_spec(s, c);
    return s;
  }

  // Returns false when some descendant's domain is unusable.
  void visit(std::vector<Node>& nodes, LoopNode* parent);
  void visit_loop(LoopNode& l);
  void visit_access(AccessNode& a);
};

void Analyzer::visit(std::vector<Node>& nodes, LoopNode* parent) {
  for (auto& n : nodes) {
    if (n.is_loop()) {
      visit_loop(n.loop());
      if (parent) {
        const auto& acc = n.loop().accesses;
        parent->accesses.insert(parent->accesses.end(), acc.begin(), acc.end());
      }
    } else {
      visit_access(n.access());
      if (parent) parent->accesses.push_back(n.access().id);
    }
  }
}

void Analyzer::visit_loop(LoopNode& l) {
  l.id = next_loop++;
  l.depth = iters.size();
  l.accesses.clear();
  std::string where = "loop '" + l.iter + "'";
  if (iters.size() >= kMaxDepth) {
    error("nesting deeper than " + std::to_string(kMaxDepth) + " at " + where);
    return;
  }
  if (std::find(iters.begin(), iters.end(), l.iter) != iters.end()) {
    error("iterator '" + l.iter + "' shadows an enclosing loop");
    return;
  }
  if (l.stride <= 0) error("non-positive stride in " + where);
  iters.push_back(l.iter);
  bool ok = true;
  for (const auto& c : l.bounds) ok = known(c, "bounds of " + where) && ok;
  if (ok) {
    l.dom = build_dom(l.bounds);
    try {
      if (is_empty(l.dom)) warn("empty domain in " + where);
      // Unbounded domains make lexmin/lexmax throw.
      lexopt(l.dom, LexKind::Min);
      lexopt(l.dom, LexKind::Max);
    } catch (const UnboundedSet&) {
      error("unbounded domain in " + where);
      ok = false;
    } catch (const OverflowError&) {
      error("arithmetic overflow while analysing " + where);
      ok = false;
    }
  }
  if (ok) {
    for (const auto& c : l.bounds) path.push_back(&c);
    visit(l.body, &l);
    for (std::size_t k = 0; k < l.bounds.size(); ++k) path.pop_back();
  }
  iters.pop_back();
}

void Analyzer::visit_access(AccessNode& a) {
  a.id = next_access++;
  a.depth = iters.size();
  a.bytes = ByteExpr{};
  a.min_byte = 0;
  a.max_byte = -1;
  std::string where = "access to '" + a.array + "'";
  const ArrayDecl* arr = p.find_array(a.array);
  bool ok = true;
  for (const auto& c : a.guard) ok = known(c, "guard of " + where) && ok;
  for (const auto& e : a.index) ok = known(e, "index of " + where) && ok;
  if (!arr) {
    error("unknown array '" + a.array + "'");
    ok = false;
  } else if (arr->dims.size() != a.index.size()) {
    error("rank mismatch in " + where + ": " + std::to_string(a.index.size()) +
          " indices for rank " + std::to_string(arr->dims.size()));
    ok = false;
  }
  if (!ok) return;
  a.dom = build_dom(a.guard);
  a.guarded_by_loops_only = a.guard.empty();
  // Row-major linearisation.
  Value stride = arr->elem_size;
  AffineExpr bytes(arr->base);
  for (std::size_t k = arr->dims.size(); k-- > 0;) {
    bytes = bytes + a.index[k] * stride;
    stride = checked_mul(stride, arr->dims[k]);
  }
  a.bytes.constant = bytes.constant();
  for (std::size_t d = 0; d < iters.size(); ++d) a.bytes.coeffs[d] = bytes.coeff(iters[d]);
  try {
    if (is_empty(a.dom)) return;
    for (std::size_t k = 0; k < a.index.size(); ++k) {
      auto r = expr_range(a.dom, a.dom.to_row(a.index[k]));
      if (r && (r->first < 0 || r->second >= arr->dims[k])) {
        error("index " + std::to_string(k) + " of " + where + " out of bounds: range [" +
              std::to_string(r->first) + ", " + std::to_string(r->second) + "] vs extent " +
              std::to_string(arr->dims[k]));
      }
    }
    Row row = a.dom.to_row(bytes);
    row.coeffs.resize(a.dom.num_vars(), 0);
    if (auto r = expr_range(a.dom, row)) {
      a.min_byte = r->first;
      a.max_byte = r->second;
    }
  } catch (const OverflowError&) {
    error("arithmetic overflow while analysing " + where);
  }
}

Value align_up(Value v, Value a) { return ceil_div(v, a) * a; }

}  // namespace

std::vector<Diagnostic> analyze(Program& p, const ParseOptions& opts) {
  Analyzer an{p, opts, {}, {}, {}};
  if (opts.line_size < 1) an.error("line size must be positive");
  std::set<std::string> names;
  Value cursor = 0;
  for (auto& arr : p.arrays) {
    if (!names.insert(arr.name).second) an.error("duplicate array '" + arr.name + "'");
    if (arr.elem_size < 1) an.error("array '" + arr.name + "' has non-positive element size");
    bool extents_ok = true;
    for (Value d : arr.dims) {
      if (d < 1) {
        an.error("array '" + arr.name + "' has an extent below 1");
        extents_ok = false;
      }
    }
    if (arr.elem_size < 1 || !extents_ok || opts.line_size < 1) continue;
    if (arr.explicit_base) {
      if (arr.base < 0 || floor_mod(arr.base, opts.line_size) != 0)
        an.error("base of array '" + arr.name + "' is not line aligned");
    } else {
      arr.base = align_up(cursor, opts.line_size);
    }
    cursor = std::max(cursor, checked_add(checked_add(arr.base, arr.size_bytes()), opts.array_gap));
  }
  an.visit(p.roots, nullptr);
  p.access_nodes.clear();
  p.loop_nodes.clear();
  collect(p.roots, p.access_nodes, p.loop_nodes);
  return an.diags;
}

std::vector<Diagnostic> validate(const Program& p, const ParseOptions& opts) {
  Program copy = p;
  return analyze(copy, opts);
}

// ----------------------------------------------------------------- print

namespace {

json affine_json(const AffineExpr& e, const std::vector<FloorTerm>* floors = nullptr) {
  json j = json::object();
  for (const auto& [n, c] : e.coeffs()) j[n] = c;
  if (e.constant() != 0 || e.is_constant()) j["_const"] = e.constant();
  if (floors && !floors->empty()) {
    json fl = json::array();
    for (const auto& f : *floors) fl.push_back({{"num", affine_json(f.num)}, {"den", f.den}, {"coeff", f.coeff}});
    j["_floor"] = fl;
  }
  return j;
}

json constraints_json(const std::vector<ConstraintSpec>& cs) {
  json out = json::array();
  for (const auto& c : cs) out.push_back({{"expr", affine_json(c.linear, &c.floors)}, {"rel", c.equality ? "=0" : ">=0"}});
  return out;
}

json node_json(const Node& n) {
  if (n.is_loop()) {
    const auto& l = n.loop();
    json body = json::array();
    for (const auto& c : l.body) body.push_back(node_json(c));
    return {{"type", "loop"}, {"iter", l.iter}, {"stride", l.stride}, {"bounds", constraints_json(l.bounds)}, {"body", body}};
  }
  const auto& a = n.access();
  json idx = json::array();
  for (const auto& e : a.index) idx.push_back(affine_json(e));
  json j = {{"type", "access"}, {"kind", a.kind == AccessKind::Read ? "read" : "write"}, {"array", a.array}, {"idx", idx}};
  if (!a.guard.empty()) j["guard"] = constraints_json(a.guard);
  return j;
}

}  // namespace

std::string print_program(const Program& p, int indent) {
  json arrays = json::array();
  for (const auto& a : p.arrays)
    arrays.push_back({{"name", a.name}, {"elem_size", a.elem_size}, {"dims", a.dims}, {"base", a.base}});
  json root;
  if (p.roots.size() == 1) {
    root = node_json(p.roots[0]);
  } else {
    root = json::array();
    for (const auto& n : p.roots) root.push_back(node_json(n));
  }
  json j = {{"arrays", arrays}, {"root", root}};
  return j.dump(indent);
}

// ------------------------------------------------------------ iteration

std::optional<IterVec> initial(const LoopNode& loop, const IterVec& prefix) {
  return lex_bound_with_prefix(loop.dom, prefix, LexKind::Min);
}

std::optional<IterVec> final_point(const LoopNode& loop, const IterVec& prefix) {
  return lex_bound_with_prefix(loop.dom, prefix, LexKind::Max);
}

BlockId access_block(const AccessNode& a, std::span<const Value> iters, Value line_size) {
  Value addr = a.bytes.eval(iters.first(a.depth));
  if (addr < 0) throw Error("negative address in access to '" + a.array + "'");
  return floor_div(addr, line_size);
}

std::optional<std::pair<Value, Value>> expr_range(const BasicSet& set, const Row& row) {
  LinearSystem sys(1 + set.dim());
  std::vector<Row> dims;
  for (std::size_t d = 0; d < set.dim(); ++d) {
    Row r = sys.zero_row();
    r.coeffs[1 + d] = 1;
    dims.push_back(std::move(r));
  }
  for (auto& c : embed(sys, set, dims)) {
    if (c.equality)
      sys.add_eq(std::move(c.row));
    else
      sys.add_ge(std::move(c.row));
  }
  // t - row(x) == 0, with row possibly mentioning divs of `set`: only the dim
  // part is used here.
  Row t = sys.zero_row();
  t.coeffs[0] = 1;
  t.constant = -row.constant;
  for (std::size_t d = 0; d < set.dim() && d < row.coeffs.size(); ++d) t.coeffs[1 + d] = -row.coeffs[d];
  for (std::size_t k = set.dim(); k < row.coeffs.size(); ++k)
    if (row.coeffs[k] != 0) throw Error("expr_range: expression may not mention divs");
  sys.add_eq(std::move(t));
  auto lo = sys.lexopt(1, LexKind::Min);
  if (!lo) return std::nullopt;
  auto hi = sys.lexopt(1, LexKind::Max);
  return std::make_pair((*lo)[0], (*hi)[0]);
}

}  // namespace warpsim
