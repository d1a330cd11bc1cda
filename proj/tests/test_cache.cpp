#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracle/ref_cache.hpp"
#include "props/data_independence.hpp"
#include "warpsim/cache.hpp"

using namespace warpsim;

namespace {

CacheConfig geom(std::int64_t sets, std::int64_t assoc, Policy pol = Policy::LRU, bool wa = true) {
  CacheConfig c;
  c.num_sets = sets;
  c.assoc = assoc;
  c.line_size = 64;
  c.policy = pol;
  c.write_allocate = wa;
  return c;
}

SetState lines(std::vector<BlockId> ls) {
  SetState s;
  s.dirty.assign(ls.size(), 0);
  s.lines = std::move(ls);
  return s;
}

oracle::Pol ref_pol(Policy p) {
  switch (p) {
    case Policy::LRU: return oracle::Pol::LRU;
    case Policy::FIFO: return oracle::Pol::FIFO;
    case Policy::PLRU: return oracle::Pol::PLRU;
    case Policy::QLRU: return oracle::Pol::QLRU;
  }
  return oracle::Pol::LRU;
}

const Policy kPolicies[] = {Policy::LRU, Policy::FIFO, Policy::PLRU, Policy::QLRU};

}  // namespace

TEST(Cache, Index) {
  CacheConfig c = geom(4, 2);
  EXPECT_EQ(c.index(13), 1);
  EXPECT_EQ(geom(8, 2).index(0), 0);
  EXPECT_EQ(c.index(9), 1);
  EXPECT_EQ(c.index(5), 1);
  EXPECT_EQ(c.index(-1), 3);
}

TEST(Cache, ConfigValidation) {
  EXPECT_THROW(geom(3, 2).validate(), ConfigError);
  EXPECT_THROW(geom(4, 3, Policy::PLRU).validate(), ConfigError);
  EXPECT_NO_THROW(geom(4, 3, Policy::LRU).validate());
  CacheConfig bad = geom(4, 2);
  bad.line_size = 48;
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_EQ(parse_policy("QLRU"), Policy::QLRU);
  EXPECT_THROW(parse_policy("MRU"), ConfigError);
}

TEST(Cache, ClSet) {
  EXPECT_TRUE(cl_set(lines({2, 5}), 5));
  EXPECT_FALSE(cl_set(lines({2, 5}), 7));
  EXPECT_FALSE(cl_set(lines({kEmpty, kEmpty}), 0));
}

TEST(Cache, UpSetLru) {
  CacheConfig c = geom(1, 2);
  SetState s = lines({2, 5});
  EXPECT_TRUE(up_set(c, s, 5).hit);
  EXPECT_EQ(s.lines, (std::vector<BlockId>{5, 2}));
  s = lines({2, 5});
  SetAccess a = up_set(c, s, 7);
  EXPECT_FALSE(a.hit);
  EXPECT_EQ(a.evicted, 5);
  EXPECT_EQ(s.lines, (std::vector<BlockId>{7, 2}));
}

TEST(Cache, UpSetFifo) {
  CacheConfig c = geom(1, 2, Policy::FIFO);
  SetState s = lines({2, 5});
  EXPECT_TRUE(up_set(c, s, 5).hit);
  EXPECT_EQ(s.lines, (std::vector<BlockId>{2, 5}));
  up_set(c, s, 7);
  EXPECT_EQ(s.lines, (std::vector<BlockId>{7, 2}));
}

TEST(Cache, QlruHandSimulation) {
  CacheConfig c = geom(1, 2, Policy::QLRU);
  SetState s = empty_set(c);
  EXPECT_FALSE(up_set(c, s, 'a').hit);
  EXPECT_FALSE(up_set(c, s, 'b').hit);
  SetAccess m = up_set(c, s, 'c');
  EXPECT_FALSE(m.hit);
  EXPECT_EQ(m.evicted, 'a');
  // c replaced a in line 0 with age 2; b aged to 3 while searching.
  EXPECT_EQ(s.lines, (std::vector<BlockId>{'c', 'b'}));
  EXPECT_EQ(s.meta, (std::vector<std::uint8_t>{2, 3}));
  EXPECT_TRUE(up_set(c, s, 'b').hit);
  EXPECT_EQ(s.meta, (std::vector<std::uint8_t>{2, 0}));
}

TEST(Cache, PolicyDivergenceWitness) {
  auto misses = [](Policy p) {
    CacheConfig c = geom(1, 2, p);
    SetState s = empty_set(c);
    int m = 0;
    for (BlockId b : {'a', 'b', 'a', 'c', 'a'}) m += !up_set(c, s, b).hit;
    return m;
  };
  EXPECT_EQ(misses(Policy::LRU), 3);
  EXPECT_EQ(misses(Policy::FIFO), 4);
}

TEST(Cache, WriteNoAllocateBypasses) {
  CacheConfig c = geom(2, 2, Policy::LRU, false);
  CacheState st = empty_cache(c);
  up_cache(c, st, 4);
  CacheState before = st;
  SetAccess a = up_cache(c, st, 6, AccessKind::Write);
  EXPECT_TRUE(a.bypassed);
  EXPECT_EQ(st, before);
}

TEST(Cache, ReadMissIntoEmptySet) {
  CacheConfig c = geom(2, 4);
  CacheState st = empty_cache(c);
  up_cache(c, st, 3);
  EXPECT_EQ(st.sets[1].lines, (std::vector<BlockId>{3, kEmpty, kEmpty, kEmpty}));
  EXPECT_TRUE(cl_cache(c, st, 3));
  EXPECT_FALSE(cl_cache(c, st, 5));
}

TEST(Cache, DirtyEvictionCountsWriteback) {
  CacheConfig c = geom(1, 1);
  CacheState st = empty_cache(c);
  up_cache(c, st, 1, AccessKind::Write);
  SetAccess a = up_cache(c, st, 2);
  EXPECT_EQ(a.evicted, 1);
  EXPECT_TRUE(a.evicted_dirty);
  EXPECT_FALSE(up_cache(c, st, 3).evicted_dirty);
}

TEST(Cache, TwoLevel) {
  HierarchyConfig h;
  h.levels = {geom(2, 1), geom(4, 2)};
  h.validate();
  HierarchyState st = empty_hierarchy(h);
  HierarchyAccess a = up_hierarchy(h, st, 8);
  EXPECT_FALSE(a.hit[0]);
  EXPECT_TRUE(a.consulted[1]);
  EXPECT_FALSE(a.hit[1]);
  EXPECT_TRUE(cl_cache(h.levels[0], st.levels[0], 8));
  EXPECT_TRUE(cl_cache(h.levels[1], st.levels[1], 8));

  HierarchyState before = st;
  a = up_hierarchy(h, st, 8);
  EXPECT_TRUE(a.hit[0]);
  EXPECT_FALSE(a.consulted[1]);
  EXPECT_EQ(st.levels[1], before.levels[1]);

  up_hierarchy(h, st, 10);  // evicts 8 from L1 only
  EXPECT_FALSE(cl_cache(h.levels[0], st.levels[0], 8));
  a = up_hierarchy(h, st, 8);
  EXPECT_FALSE(a.hit[0]);
  EXPECT_TRUE(a.hit[1]);
  EXPECT_TRUE(cl_cache(h.levels[0], st.levels[0], 8));
}

TEST(Cache, HierarchyValidation) {
  HierarchyConfig h;
  h.levels = {geom(8, 1), geom(4, 2)};
  EXPECT_THROW(h.validate(), ConfigError);
  h.levels = {};
  EXPECT_THROW(h.validate(), ConfigError);
}

TEST(Bijection, Basics) {
  BlockBijection pi;
  pi.add(1, 2);
  pi.add(2, 3);
  EXPECT_EQ(*pi.forward(1), 2);
  EXPECT_EQ(*pi.inverse(3), 2);
  EXPECT_FALSE(pi.forward(9).has_value());
  EXPECT_THROW(pi.add(1, 4), Error);
  EXPECT_THROW(pi.add(5, 2), Error);
  EXPECT_NO_THROW(pi.add(1, 2));
}

TEST(Bijection, IdentityLeavesStateUnchanged) {
  CacheConfig c = geom(4, 2, Policy::PLRU);
  CacheState st = empty_cache(c);
  BlockBijection id;
  for (BlockId b : {0, 1, 5, 6, 11}) {
    up_cache(c, st, b);
    id.add(b, b);
  }
  EXPECT_EQ(apply_bijection(c, id, st), st);
}

TEST(Bijection, StencilBlocksShiftByOne) {
  // Stencil on 4 sets, assoc 2: A[i] is block i, B[i] is block 1024 + i.
  CacheConfig c = geom(4, 2);
  CacheState st = empty_cache(c);
  auto iteration = [&](BlockId i) {
    up_cache(c, st, i - 1);
    up_cache(c, st, i);
    up_cache(c, st, 1024 + i - 1, AccessKind::Write);
  };
  for (BlockId i = 1; i <= 4; ++i) iteration(i);
  CacheState c5 = st;
  iteration(5);
  CacheState c6 = st;

  BlockBijection pi;
  for (const auto& s : c5.sets)
    for (BlockId b : s.lines)
      if (b != kEmpty) pi.add(b, b + 1);
  auto perm = pi.set_permutation(4);
  EXPECT_EQ(perm, (std::vector<std::int64_t>{1, 2, 3, 0}));
  EXPECT_EQ(apply_bijection(c, pi, c5), c6);

  BlockBijection pi2;
  for (const auto& s : c5.sets)
    for (BlockId b : s.lines)
      if (b != kEmpty) pi2.add(b, b + 2);
  BlockBijection step;
  for (const auto& s : c6.sets)
    for (BlockId b : s.lines)
      if (b != kEmpty) step.add(b, b + 1);
  EXPECT_EQ(apply_bijection(c, step, apply_bijection(c, pi, c5)), apply_bijection(c, pi2, c5));
}

TEST(Bijection, SplitSetThrows) {
  BlockBijection pi;
  pi.add(0, 0);
  pi.add(4, 1);  // 0 and 4 share set 0 but land in sets 0 and 1
  EXPECT_THROW(pi.set_permutation(4), Error);
}

TEST(CacheOracle, AgreesWithReferenceModel) {
  std::mt19937_64 rng(7);
  int violations = 0;
  for (Policy pol : kPolicies) {
    for (int trial = 0; trial < 400; ++trial) {
      std::int64_t sets = std::int64_t{1} << (trial % 3);
      std::int64_t assoc = std::int64_t{1} << (1 + trial % 3);
      bool wa = trial % 5 != 0;
      CacheConfig c = geom(sets, assoc, pol, wa);
      oracle::RefCache ref({sets, assoc, ref_pol(pol), wa});
      CacheState st = empty_cache(c);
      std::uniform_int_distribution<BlockId> blk(0, 4 * sets * assoc);
      std::bernoulli_distribution wr(0.3);
      for (int k = 0; k < 200; ++k) {
        BlockId b = blk(rng);
        bool w = wr(rng);
        SetAccess a = up_cache(c, st, b, w ? AccessKind::Write : AccessKind::Read);
        oracle::Outcome o = ref.access(b, w);
        if (a.hit != o.hit || a.evicted_dirty != o.writeback) ++violations;
        check_invariants(c, st);
      }
      for (std::int64_t s = 0; s < sets; ++s) {
        auto want = ref.contents(s);
        std::vector<BlockId> got;
        for (BlockId b : st.sets[static_cast<std::size_t>(s)].lines)
          if (b != kEmpty) got.push_back(b);
        std::sort(want.begin(), want.end());
        std::sort(got.begin(), got.end());
        if (want != got) ++violations;
      }
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(CacheOracle, PlruTwoWayMatchesLru) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    CacheConfig lru = geom(2, 2), plru = geom(2, 2, Policy::PLRU);
    CacheState a = empty_cache(lru), b = empty_cache(plru);
    std::uniform_int_distribution<BlockId> blk(0, 9);
    for (int k = 0; k < 100; ++k) {
      BlockId x = blk(rng);
      ASSERT_EQ(up_cache(lru, a, x).hit, up_cache(plru, b, x).hit);
    }
  }
}

TEST(CacheOracle, LruStackInclusion) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    std::int64_t sets = std::int64_t{1} << (trial % 3);
    std::int64_t k = 1 + trial % 4;
    CacheConfig small = geom(sets, k), large = geom(sets, k + 1);
    CacheState a = empty_cache(small), b = empty_cache(large);
    std::uniform_int_distribution<BlockId> blk(0, 3 * sets * k);
    for (int n = 0; n < 120; ++n) {
      BlockId x = blk(rng);
      bool hit_small = up_cache(small, a, x).hit;
      bool hit_large = up_cache(large, b, x).hit;
      ASSERT_TRUE(!hit_small || hit_large);
      for (const auto& s : a.sets)
        for (BlockId y : s.lines)
          if (y != kEmpty) ASSERT_TRUE(cl_cache(large, b, y));
    }
  }
}

TEST(DataIndependence, SingleLevel) {
  for (Policy pol : kPolicies) EXPECT_EQ(props::data_independence_violations(pol, 17, 10000), 0) << to_string(pol);
}

TEST(DataIndependence, Hierarchy) {
  for (Policy pol : kPolicies)
    EXPECT_EQ(props::hierarchy_independence_violations(pol, 19, 10000), 0) << to_string(pol);
}
