#include "warpsim/cache.hpp"

#include <algorithm>
#include <bit>

namespace warpsim {

std::string to_string(Policy p) {
  switch (p) {
    case Policy::LRU: return "LRU";
    case Policy::FIFO: return "FIFO";
    case Policy::PLRU: return "PLRU";
    case Policy::QLRU: return "QLRU";
  }
  return "?";
}

Policy parse_policy(const std::string& s) {
  if (s == "LRU") return Policy::LRU;
  if (s == "FIFO") return Policy::FIFO;
  if (s == "PLRU") return Policy::PLRU;
  if (s == "QLRU") return Policy::QLRU;
  throw ConfigError("unknown replacement policy '" + s + "'");
}

namespace {

bool pow2(std::int64_t v) { return v > 0 && std::has_single_bit(static_cast<std::uint64_t>(v)); }

constexpr std::uint8_t kQlruInsertAge = 2;
constexpr std::uint8_t kQlruMaxAge = 3;

// Ordered policies keep lines sorted by recency/insertion, empties last.
SetAccess up_ordered(SetState& s, BlockId b, bool is_write, bool move_on_hit) {
  SetAccess r;
  if (auto pos = find_line(s, b)) {
    r.hit = true;
    std::size_t p = *pos;
    if (is_write) s.dirty[p] = 1;
    if (move_on_hit) {
      std::rotate(s.lines.begin(), s.lines.begin() + p, s.lines.begin() + p + 1);
      std::rotate(s.dirty.begin(), s.dirty.begin() + p, s.dirty.begin() + p + 1);
    }
    r.line = move_on_hit ? 0 : p;
    return r;
  }
  r.evicted = s.lines.back();
  r.evicted_dirty = r.evicted != kEmpty && s.dirty.back();
  std::rotate(s.lines.rbegin(), s.lines.rbegin() + 1, s.lines.rend());
  std::rotate(s.dirty.rbegin(), s.dirty.rbegin() + 1, s.dirty.rend());
  s.lines[0] = b;
  s.dirty[0] = is_write ? 1 : 0;
  r.line = 0;
  return r;
}

void plru_touch(SetState& s, std::size_t line) {
  std::size_t k = s.lines.size();
  std::size_t node = 0, lo = 0, width = k;
  while (width > 1) {
    std::size_t half = width / 2;
    bool left = line < lo + half;
    s.meta[node] = left ? 1 : 0;  // point away from the accessed line
    node = 2 * node + (left ? 1 : 2);
    if (!left) lo += half;
    width = half;
  }
}

std::size_t plru_victim(const SetState& s) {
  std::size_t k = s.lines.size();
  std::size_t node = 0, lo = 0, width = k;
  while (width > 1) {
    std::size_t half = width / 2;
    bool right = s.meta[node] != 0;
    node = 2 * node + (right ? 2 : 1);
    if (right) lo += half;
    width = half;
  }
  return lo;
}

std::size_t qlru_victim(SetState& s) {
  auto empty = std::find(s.lines.begin(), s.lines.end(), kEmpty);
  if (empty != s.lines.end()) return static_cast<std::size_t>(empty - s.lines.begin());
  std::uint8_t oldest = *std::max_element(s.meta.begin(), s.meta.end());
  std::uint8_t bump = kQlruMaxAge - oldest;
  for (auto& a : s.meta) a = static_cast<std::uint8_t>(std::min<int>(a + bump, kQlruMaxAge));
  return static_cast<std::size_t>(std::find(s.meta.begin(), s.meta.end(), kQlruMaxAge) - s.meta.begin());
}

}  // namespace

void CacheConfig::validate() const {
  if (!pow2(num_sets)) throw ConfigError("number of sets must be a positive power of two");
  if (assoc < 1) throw ConfigError("associativity must be positive");
  if (!pow2(line_size)) throw ConfigError("line size must be a positive power of two");
  if (policy == Policy::PLRU && !pow2(assoc))
    throw ConfigError("PLRU requires a power-of-two associativity");
}

SetState empty_set(const CacheConfig& cfg) {
  SetState s;
  auto k = static_cast<std::size_t>(cfg.assoc);
  s.lines.assign(k, kEmpty);
  s.dirty.assign(k, 0);
  if (cfg.policy == Policy::PLRU) s.meta.assign(k - 1, 0);
  if (cfg.policy == Policy::QLRU) s.meta.assign(k, 0);
  return s;
}

std::optional<std::size_t> find_line(const SetState& s, BlockId b) {
  if (b == kEmpty) return std::nullopt;
  auto it = std::find(s.lines.begin(), s.lines.end(), b);
  if (it == s.lines.end()) return std::nullopt;
  return static_cast<std::size_t>(it - s.lines.begin());
}

bool cl_set(const SetState& s, BlockId b) { return find_line(s, b).has_value(); }

SetAccess up_set(const CacheConfig& cfg, SetState& s, BlockId b, AccessKind kind) {
  if (b < 0) throw Error("negative block id " + std::to_string(b));
  bool is_write = kind == AccessKind::Write;
  if (is_write && !cfg.write_allocate && !cl_set(s, b)) {
    SetAccess r;
    r.bypassed = true;
    return r;
  }
  switch (cfg.policy) {
    case Policy::LRU: return up_ordered(s, b, is_write, true);
    case Policy::FIFO: return up_ordered(s, b, is_write, false);
    case Policy::PLRU:
    case Policy::QLRU: break;
  }
  SetAccess r;
  if (auto pos = find_line(s, b)) {
    r.hit = true;
    r.line = *pos;
    if (is_write) s.dirty[r.line] = 1;
  } else {
    r.line = cfg.policy == Policy::PLRU ? plru_victim(s) : qlru_victim(s);
    r.evicted = s.lines[r.line];
    r.evicted_dirty = r.evicted != kEmpty && s.dirty[r.line];
    s.lines[r.line] = b;
    s.dirty[r.line] = is_write ? 1 : 0;
  }
  if (cfg.policy == Policy::PLRU)
    plru_touch(s, r.line);
  else
    s.meta[r.line] = r.hit ? 0 : kQlruInsertAge;
  return r;
}

CacheState empty_cache(const CacheConfig& cfg) {
  CacheState c;
  c.sets.assign(static_cast<std::size_t>(cfg.num_sets), empty_set(cfg));
  return c;
}

bool cl_cache(const CacheConfig& cfg, const CacheState& c, BlockId b) {
  return cl_set(c.sets[static_cast<std::size_t>(cfg.index(b))], b);
}

SetAccess up_cache(const CacheConfig& cfg, CacheState& c, BlockId b, AccessKind kind) {
  return up_set(cfg, c.sets[static_cast<std::size_t>(cfg.index(b))], b, kind);
}

void check_invariants(const CacheConfig& cfg, const CacheState& c) {
  if (c.sets.size() != static_cast<std::size_t>(cfg.num_sets)) throw Error("wrong number of sets");
  for (std::size_t s = 0; s < c.sets.size(); ++s) {
    const auto& lines = c.sets[s].lines;
    if (lines.size() != static_cast<std::size_t>(cfg.assoc)) throw Error("wrong associativity");
    for (std::size_t l = 0; l < lines.size(); ++l) {
      if (lines[l] == kEmpty) continue;
      if (cfg.index(lines[l]) != static_cast<std::int64_t>(s))
        throw Error("block " + std::to_string(lines[l]) + " stored in wrong set");
      for (std::size_t m = l + 1; m < lines.size(); ++m)
        if (lines[m] == lines[l]) throw Error("block " + std::to_string(lines[l]) + " cached twice");
    }
  }
}

void HierarchyConfig::validate() const {
  if (levels.empty() || levels.size() > 2) throw ConfigError("one or two cache levels are supported");
  for (const auto& l : levels) l.validate();
  if (levels.size() == 2) {
    if (levels[1].num_sets % levels[0].num_sets != 0)
      throw ConfigError("L2 set count must be a multiple of the L1 set count");
    if (levels[1].line_size != levels[0].line_size)
      throw ConfigError("both levels must use the same line size");
  }
}

HierarchyState empty_hierarchy(const HierarchyConfig& cfg) {
  HierarchyState h;
  for (const auto& l : cfg.levels) h.levels.push_back(empty_cache(l));
  return h;
}

HierarchyAccess up_hierarchy(const HierarchyConfig& cfg, HierarchyState& h, BlockId b, AccessKind kind) {
  HierarchyAccess r;
  std::size_t n = cfg.levels.size();
  r.consulted.assign(n, false);
  r.hit.assign(n, false);
  r.writeback.assign(n, false);
  for (std::size_t l = 0; l < n; ++l) {
    r.consulted[l] = true;
    SetAccess a = up_cache(cfg.levels[l], h.levels[l], b, kind);
    r.hit[l] = a.hit;
    r.writeback[l] = a.evicted_dirty;
    if (a.hit) break;
  }
  return r;
}

void BlockBijection::add(BlockId b, BlockId c) {
  auto f = fwd_.find(b);
  if (f != fwd_.end()) {
    if (f->second != c) throw Error("block map is not functional at " + std::to_string(b));
    return;
  }
  if (inv_.count(c)) throw Error("block map is not injective at " + std::to_string(c));
  fwd_.emplace(b, c);
  inv_.emplace(c, b);
}

std::optional<BlockId> BlockBijection::forward(BlockId b) const {
  auto it = fwd_.find(b);
  if (it == fwd_.end()) return std::nullopt;
  return it->second;
}

std::optional<BlockId> BlockBijection::inverse(BlockId c) const {
  auto it = inv_.find(c);
  if (it == inv_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::int64_t> BlockBijection::set_permutation(std::int64_t num_sets) const {
  auto n = static_cast<std::size_t>(num_sets);
  std::vector<std::int64_t> perm(n, -1);
  std::vector<bool> used(n, false);
  for (const auto& [b, c] : fwd_) {
    auto s = static_cast<std::size_t>(floor_mod(b, num_sets));
    std::int64_t t = floor_mod(c, num_sets);
    if (perm[s] == -1) {
      if (used[static_cast<std::size_t>(t)]) throw Error("block map merges cache sets");
      perm[s] = t;
      used[static_cast<std::size_t>(t)] = true;
    } else if (perm[s] != t) {
      throw Error("block map splits cache set " + std::to_string(s));
    }
  }
  std::size_t next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (perm[s] != -1) continue;
    while (used[next]) ++next;
    perm[s] = static_cast<std::int64_t>(next);
    used[next] = true;
  }
  return perm;
}

CacheState apply_bijection(const CacheConfig& cfg, const BlockBijection& pi, const CacheState& c) {
  auto perm = pi.set_permutation(cfg.num_sets);
  CacheState out;
  out.sets.resize(c.sets.size());
  for (std::size_t s = 0; s < c.sets.size(); ++s) {
    SetState mapped = c.sets[s];
    for (auto& line : mapped.lines) {
      if (line == kEmpty) continue;
      auto img = pi.forward(line);
      if (!img) throw Error("bijection undefined on cached block " + std::to_string(line));
      line = *img;
    }
    out.sets[static_cast<std::size_t>(perm[s])] = std::move(mapped);
  }
  return out;
}

}  // namespace warpsim
