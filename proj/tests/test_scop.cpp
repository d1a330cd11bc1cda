#include <gtest/gtest.h>

#include <random>
#include <set>

#include "json.hpp"
#include "warpsim/corpus.hpp"
#include "warpsim/scop.hpp"

using namespace warpsim;
using nlohmann::json;

namespace {

json range(const std::string& it, Value lo, Value hi_excl) {
  return json::array({{{"expr", {{it, 1}, {"_const", -lo}}}, {"rel", ">=0"}},
                      {{"expr", {{it, -1}, {"_const", hi_excl - 1}}}, {"rel", ">=0"}}});
}

json acc(const std::string& arr, json idx, const std::string& kind = "read") {
  return {{"type", "access"}, {"kind", kind}, {"array", arr}, {"idx", std::move(idx)}};
}

json loop(const std::string& it, json bounds, json body, Value stride = 1) {
  return {{"type", "loop"}, {"iter", it}, {"stride", stride}, {"bounds", std::move(bounds)}, {"body", std::move(body)}};
}

std::string prog(json arrays, json root) { return json{{"arrays", arrays}, {"root", root}}.dump(); }

json arr1(const std::string& name, Value n, Value elem = 8) {
  return {{"name", name}, {"elem_size", elem}, {"dims", {n}}};
}

bool has_diag(const std::vector<Diagnostic>& ds, const std::string& needle, Diagnostic::Severity sev) {
  for (const auto& d : ds)
    if (d.severity == sev && d.message.find(needle) != std::string::npos) return true;
  return false;
}

std::vector<Diagnostic> diagnose(const std::string& text) {
  ParseOptions o;
  o.validate = false;
  Program p = parse_program(text, o);
  return validate(p, o);
}

}  // namespace

TEST(Scop, StencilStructure) {
  Program p = parse_program(corpus_get("stencil1d"));
  ASSERT_EQ(p.roots.size(), 1u);
  const LoopNode& l = p.roots[0].loop();
  EXPECT_EQ(l.iter, "i");
  ASSERT_EQ(l.body.size(), 3u);
  EXPECT_EQ(p.access_nodes.size(), 3u);
  EXPECT_EQ(p.access_nodes[2]->kind, AccessKind::Write);
  EXPECT_EQ(*initial(l, {}), IterVec({1}));
  EXPECT_EQ(*final_point(l, {}), IterVec({998}));
}

TEST(Scop, TriangularMatvecStructure) {
  Program p = parse_program(corpus_get("trimatvec"));
  const LoopNode& li = p.roots[0].loop();
  ASSERT_EQ(li.body.size(), 2u);
  EXPECT_FALSE(li.body[0].is_loop());
  const LoopNode& lj = li.body[1].loop();
  EXPECT_EQ(lj.body.size(), 4u);
  EXPECT_EQ(lj.accesses.size(), 4u);
  EXPECT_EQ(li.accesses.size(), 5u);
  // L_j.dom = {(i,j) | 0 <= i < 100, i <= j < 100}
  for (Value i = -1; i <= 100; ++i)
    for (Value j = -1; j <= 100; ++j) {
      std::vector<Value> pt{i, j};
      ASSERT_EQ(lj.dom.contains(pt), i >= 0 && i < 100 && i <= j && j < 100);
    }
  EXPECT_EQ(*initial(lj, {42}), IterVec({42, 42}));
  EXPECT_EQ(*final_point(lj, {42}), IterVec({42, 99}));
  EXPECT_FALSE(initial(lj, {100}).has_value());
  EXPECT_TRUE(validate(p).empty());
}

TEST(Scop, NonAffineIndexIsRejected) {
  json idx = json::array({{{"i", "j"}}});
  std::string text = prog(json::array({arr1("A", 10)}), loop("i", range("i", 0, 10), json::array({acc("A", idx)})));
  try {
    parse_program(text);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("non-affine"), std::string::npos);
  }
}

TEST(Scop, MalformedJson) {
  EXPECT_THROW(parse_program("{\"arrays\": ["), ParseError);
  EXPECT_THROW(parse_program("{\"arrays\": [], \"root\": [], \"extra\": 1}"), ParseError);
}

TEST(Scop, ByteExpressions) {
  json arrays = json::array({{{"name", "A"}, {"elem_size", 4}, {"dims", {23, 42}}, {"base", 1024}}});
  json idx = json::array({{{"i", 1}}, {{"j", 1}}});
  json root = loop("i", range("i", 0, 23), json::array({loop("j", range("j", 0, 42), json::array({acc("A", idx)}))}));
  Program p = parse_program(prog(arrays, root));
  const ByteExpr& e = p.access_nodes[0]->bytes;
  EXPECT_EQ(e.coeffs[0], 168);
  EXPECT_EQ(e.coeffs[1], 4);
  EXPECT_EQ(e.constant, 1024);
}

TEST(Scop, AccessBlock) {
  auto one = [](Value elem, Value index) {
    json arrays = json::array({{{"name", "A"}, {"elem_size", elem}, {"dims", {16}}, {"base", 0}}});
    json root = loop("i", range("i", 0, 16), json::array({acc("A", json::array({{{"i", 1}}}))}));
    Program p = parse_program(prog(arrays, root));
    std::vector<Value> it{index};
    return access_block(*p.access_nodes[0], it, 64);
  };
  EXPECT_EQ(one(64, 5), 5);
  EXPECT_EQ(one(8, 7), 0);
  EXPECT_EQ(one(8, 8), 1);
}

TEST(Scop, ValidationDiagnostics) {
  using S = Diagnostic::Severity;
  json a = json::array({arr1("A", 10)});
  json i0 = json::array({{{"i", 1}}});
  EXPECT_TRUE(has_diag(diagnose(prog(a, loop("i", range("i", 5, 3), json::array({acc("A", i0)})))),
                       "empty domain", S::Warning));
  json three = json::array({{{"i", 1}}, {{"i", 1}}, {{"i", 1}}});
  json a2 = json::array({{{"name", "A"}, {"elem_size", 8}, {"dims", {10, 10}}}});
  EXPECT_TRUE(has_diag(diagnose(prog(a2, loop("i", range("i", 0, 10), json::array({acc("A", three)})))),
                       "rank mismatch", S::Error));
  EXPECT_TRUE(has_diag(diagnose(prog(a, loop("i", range("i", 0, 11), json::array({acc("A", i0)})))),
                       "out of bounds", S::Error));
  EXPECT_TRUE(has_diag(diagnose(prog(a, loop("i", range("i", 0, 10), json::array({acc("B", i0)})))),
                       "unknown array", S::Error));
  json ij = json::array({{{"j", 1}}});
  EXPECT_TRUE(has_diag(diagnose(prog(a, loop("i", range("i", 0, 10), json::array({acc("A", ij)})))),
                       "unknown iterator", S::Error));
  json half = json::array({{{"expr", {{"i", 1}}}, {"rel", ">=0"}}});
  EXPECT_TRUE(has_diag(diagnose(prog(a, loop("i", half, json::array({acc("A", i0)})))), "unbounded domain",
                       S::Error));
  EXPECT_TRUE(has_diag(diagnose(prog(a, loop("i", range("i", 0, 10), json::array({acc("A", i0)}), 0))),
                       "non-positive stride", S::Error));
  json inner = loop("i", range("i", 0, 10), json::array({acc("A", i0)}));
  EXPECT_TRUE(has_diag(diagnose(prog(a, loop("i", range("i", 0, 10), json::array({inner})))), "shadows",
                       S::Error));

  json deep = acc("A", json::array({{{"_const", 0}}}));
  for (int d = 7; d >= 0; --d) {
    std::string it = "i" + std::to_string(d);
    deep = loop(it, range(it, 0, 2), json::array({deep}));
  }
  EXPECT_TRUE(has_diag(diagnose(prog(a, deep)), "nesting deeper", S::Error));

  EXPECT_THROW(parse_program(prog(a, loop("i", range("i", 0, 11), json::array({acc("A", i0)})))),
               ValidationError);
}

TEST(Scop, FloorGuard) {
  Program p = parse_program(corpus_get("guarded-stencil"));
  const AccessNode& c = *p.access_nodes[3];
  EXPECT_FALSE(c.guarded_by_loops_only);
  for (Value i = 1; i < 20; ++i) {
    std::vector<Value> pt{i};
    EXPECT_EQ(c.dom.contains(pt), i % 2 == 0) << i;
  }
  const AccessNode& b = *p.access_nodes[2];
  std::vector<Value> in{498}, out{499};
  EXPECT_TRUE(b.dom.contains(in));
  EXPECT_FALSE(b.dom.contains(out));
}

TEST(Scop, RoundTripCorpus) {
  for (const auto& name : corpus_list())
    for (const auto& size : corpus_sizes()) {
      Program p = parse_program(corpus_get(name, size));
      std::string once = print_program(p);
      Program q = parse_program(once);
      EXPECT_EQ(print_program(q), once) << name;
      ASSERT_EQ(q.arrays.size(), p.arrays.size());
      for (std::size_t k = 0; k < p.arrays.size(); ++k) {
        EXPECT_EQ(q.arrays[k].base, p.arrays[k].base) << name;
        EXPECT_EQ(q.arrays[k].dims, p.arrays[k].dims) << name;
        EXPECT_EQ(q.arrays[k].elem_size, p.arrays[k].elem_size) << name;
      }
      ASSERT_EQ(q.access_nodes.size(), p.access_nodes.size());
      for (std::size_t k = 0; k < p.access_nodes.size(); ++k) {
        EXPECT_EQ(q.access_nodes[k]->bytes, p.access_nodes[k]->bytes) << name;
        EXPECT_EQ(q.access_nodes[k]->dom, p.access_nodes[k]->dom) << name;
      }
    }
}

TEST(Scop, CopyKeepsDerivedPointers) {
  Program p = parse_program(corpus_get("matmul-mini"));
  Program q = p;
  ASSERT_EQ(q.access_nodes.size(), 4u);
  EXPECT_NE(q.access_nodes[0], p.access_nodes[0]);
  EXPECT_EQ(q.access_nodes[0]->bytes, p.access_nodes[0]->bytes);
}

TEST(Scop, AutoPlacementIsLineAlignedAndDisjoint) {
  json arrays = json::array({arr1("A", 3, 8), arr1("B", 5, 4), arr1("C", 1, 8)});
  json root = loop("i", range("i", 0, 1), json::array({acc("A", json::array({{{"i", 1}}}))}));
  ParseOptions o;
  o.line_size = 32;
  Program p = parse_program(prog(arrays, root), o);
  Value prev_end = 0;
  for (const auto& a : p.arrays) {
    EXPECT_EQ(a.base % 32, 0) << a.name;
    EXPECT_GE(a.base, prev_end);
    prev_end = a.base + a.size_bytes();
  }
}

TEST(Scop, LinearizationIsInjective) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<Value> ext(1, 6), el(1, 16);
    std::vector<Value> dims;
    std::size_t rank = 1 + static_cast<std::size_t>(trial % 3);
    for (std::size_t k = 0; k < rank; ++k) dims.push_back(ext(rng));
    Value elem = el(rng);
    json arrays = json::array({{{"name", "A"}, {"elem_size", elem}, {"dims", dims}}});
    json idx = json::array();
    json body = json::array();
    for (std::size_t k = 0; k < rank; ++k) idx.push_back({{"x" + std::to_string(k), 1}});
    json node = acc("A", idx);
    for (std::size_t k = rank; k-- > 0;) {
      std::string it = "x" + std::to_string(k);
      node = loop(it, range(it, 0, dims[k]), json::array({node}));
    }
    Program p = parse_program(prog(arrays, node));
    const AccessNode& a = *p.access_nodes[0];
    const ArrayDecl& decl = p.arrays[0];
    std::set<Value> seen;
    std::vector<Value> it(rank, 0);
    for (;;) {
      Value addr = a.bytes.eval(it);
      EXPECT_TRUE(seen.insert(addr).second);
      EXPECT_GE(addr, decl.base);
      EXPECT_LE(addr + elem, decl.base + decl.size_bytes());
      std::size_t k = rank;
      while (k > 0 && ++it[k - 1] == dims[k - 1]) it[--k] = 0;
      if (k == 0) break;
    }
    EXPECT_EQ(a.min_byte, decl.base);
    EXPECT_EQ(a.max_byte, decl.base + decl.size_bytes() - elem);
  }
}

TEST(Corpus, ListAndLookup) {
  auto names = corpus_list();
  for (const char* want : {"stencil1d", "trimatvec", "jacobi2d-mini", "matmul-mini", "seidel2d-mini",
                           "guarded-stencil", "aliasing-stride"})
    EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want;
  EXPECT_THROW(corpus_get("nope"), UnknownKernel);
  EXPECT_THROW(corpus_get("stencil1d", "huge"), UnknownKernel);
  for (const auto& n : names)
    for (const auto& s : corpus_sizes()) EXPECT_NO_THROW(parse_program(corpus_get(n, s))) << n << " " << s;
}
