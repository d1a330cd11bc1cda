#include "warpsim/symcache.hpp"

#include <bit>
#include <sstream>
#include <unordered_map>

namespace warpsim {

Value SymBlock::address(std::span<const Value> iters) const {
  Value acc = constant;
  for (std::size_t d = 0; d < iters.size() && d < kMaxDepth; ++d)
    if (coeffs[d] != 0) acc = checked_add(acc, checked_mul(coeffs[d], iters[d]));
  return acc;
}

SymCache::SymCache(const CacheConfig& cfg) : cfg_(cfg) {
  SetState proto = empty_set(cfg);
  SymSetState s;
  s.lines.assign(proto.lines.size(), SymBlock{});
  s.meta = proto.meta;
  s.dirty = proto.dirty;
  sets_.assign(static_cast<std::size_t>(cfg.num_sets), s);
}

SymCache SymCache::from_concrete(const CacheConfig& cfg, const CacheState& c, std::size_t mru) {
  SymCache out(cfg);
  for (std::size_t s = 0; s < c.sets.size(); ++s) {
    auto& dst = out.sets_[s];
    const auto& src = c.sets[s];
    for (std::size_t l = 0; l < src.lines.size(); ++l) {
      if (src.lines[l] == kEmpty) continue;
      dst.lines[l].valid = true;
      dst.lines[l].constant = checked_mul(src.lines[l], cfg.line_size);
    }
    dst.meta = src.meta;
    dst.dirty = src.dirty;
  }
  out.mru_ = mru;
  return out;
}

SymBlock SymCache::effective(const SymBlock& stored) const {
  if (!stored.valid) return stored;
  SymBlock e = stored;
  for (std::size_t d = 0; d < kMaxDepth; ++d)
    if (e.coeffs[d] != 0 && pending_[d] != 0)
      e.constant = checked_sub(e.constant, checked_mul(e.coeffs[d], pending_[d]));
  return e;
}

SymBlock SymCache::stored_form(const SymBlock& sb) const {
  SymBlock s = sb;
  for (std::size_t d = 0; d < kMaxDepth; ++d)
    if (s.coeffs[d] != 0 && pending_[d] != 0)
      s.constant = checked_add(s.constant, checked_mul(s.coeffs[d], pending_[d]));
  return s;
}

BlockId SymCache::concretize(const SymBlock& stored, std::span<const Value> iters) const {
  if (!stored.valid) return kEmpty;
  Value addr = effective(stored).address(iters);
  if (addr < 0) throw Error("symbolic line concretizes to a negative address");
  return floor_div(addr, cfg_.line_size);
}

CacheState SymCache::gamma(std::span<const Value> iters) const {
  CacheState c;
  c.sets.resize(sets_.size());
  for (std::size_t s = 0; s < sets_.size(); ++s) {
    auto& dst = c.sets[s];
    const auto& src = sets_[s];
    dst.lines.reserve(src.lines.size());
    for (const auto& l : src.lines) dst.lines.push_back(concretize(l, iters));
    dst.meta = src.meta;
    dst.dirty = src.dirty;
  }
  return c;
}

bool SymCache::contains(const SymBlock& sb, std::span<const Value> iters) const {
  BlockId b = floor_div(sb.address(iters), cfg_.line_size);
  const auto& set = sets_[static_cast<std::size_t>(cfg_.index(b))];
  for (const auto& l : set.lines)
    if (l.valid && concretize(l, iters) == b) return true;
  return false;
}

SetAccess SymCache::access(const SymBlock& sb, std::span<const Value> iters, AccessKind kind) {
  Value addr = sb.address(iters);
  if (addr < 0) throw Error("access to a negative address");
  BlockId b = floor_div(addr, cfg_.line_size);
  auto s_idx = static_cast<std::size_t>(cfg_.index(b));
  SymSetState& sym = sets_[s_idx];

  // Concretize the touched set and remember each block's label.
  SetState conc;
  conc.lines.reserve(sym.lines.size());
  std::unordered_map<BlockId, SymBlock> label;
  for (const auto& l : sym.lines) {
    BlockId cb = concretize(l, iters);
    conc.lines.push_back(cb);
    if (cb == kEmpty) continue;
    if (!label.emplace(cb, l).second)
      throw Error("ambiguous symbolic state: two lines hold block " + std::to_string(cb));
  }
  conc.meta = sym.meta;
  conc.dirty = sym.dirty;

  SetAccess r = up_set(cfg_, conc, b, kind);
  if (r.bypassed) return r;
  SymBlock inserted = stored_form(sb);
  inserted.valid = true;
  for (std::size_t l = 0; l < conc.lines.size(); ++l) {
    BlockId cb = conc.lines[l];
    if (cb == kEmpty)
      sym.lines[l] = SymBlock{};
    else if (cb == b)
      sym.lines[l] = inserted;
    else
      sym.lines[l] = label.at(cb);
  }
  sym.meta = std::move(conc.meta);
  sym.dirty = std::move(conc.dirty);
  mru_ = s_idx;
  return r;
}

void SymCache::shift(std::size_t d, Value delta) { pending_[d] = checked_add(pending_[d], delta); }

void SymCache::kill(std::size_t d, Value value) {
  Value rel = checked_sub(value, pending_[d]);
  for (auto& set : sets_) {
    for (auto& l : set.lines) {
      if (!l.valid || l.coeffs[d] == 0) continue;
      l.constant = checked_add(l.constant, checked_mul(l.coeffs[d], rel));
      l.coeffs[d] = 0;
    }
  }
  pending_[d] = 0;
}

void SymCache::rotate(std::int64_t k) {
  auto n = static_cast<std::int64_t>(sets_.size());
  std::int64_t r = floor_mod(k, n);
  if (r == 0) return;
  std::vector<SymSetState> out(sets_.size());
  for (std::int64_t s = 0; s < n; ++s) out[static_cast<std::size_t>((s + r) % n)] = std::move(sets_[static_cast<std::size_t>(s)]);
  sets_ = std::move(out);
  mru_ = static_cast<std::size_t>((static_cast<std::int64_t>(mru_) + r) % n);
}

std::vector<Value> SymCache::canonical_key() const {
  std::vector<Value> key;
  append_canonical_key(key);
  return key;
}

void SymCache::append_canonical_key(std::vector<Value>& key) const {
  std::size_t n = sets_.size();
  key.reserve(key.size() + 2 + n * (sets_.empty() ? 0 : sets_[0].lines.size() * (kMaxDepth + 4)));
  key.push_back(static_cast<Value>(cfg_.policy));
  key.push_back(cfg_.assoc);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& set = sets_[(mru_ + t) % n];
    for (const auto& l : set.lines) {
      if (!l.valid) {
        key.push_back(0);
        continue;
      }
      key.push_back(1);
      SymBlock e = effective(l);
      key.insert(key.end(), e.coeffs.begin(), e.coeffs.end());
      key.push_back(e.constant);
    }
    key.insert(key.end(), set.meta.begin(), set.meta.end());
    key.insert(key.end(), set.dirty.begin(), set.dirty.end());
  }
}

std::uint64_t hash_values(std::span<const Value> v) {
  // Multiply-rotate over the sequence, then a splitmix64 finalizer.
  std::uint64_t h = 0x9e3779b97f4a7c15ull ^ v.size();
  for (Value x : v) h = std::rotl(h ^ static_cast<std::uint64_t>(x), 27) * 0x9e3779b97f4a7c15ull;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
  return h ^ (h >> 31);
}

std::uint64_t SymCache::hash() const {
  auto key = canonical_key();
  return hash_values(key);
}

std::string SymCache::dump(const std::vector<std::string>& names, std::span<const Value> iters) const {
  std::ostringstream os;
  for (std::size_t s = 0; s < sets_.size(); ++s) {
    os << "set " << s << (s == mru_ ? " (mru)" : "") << ":";
    for (const auto& l : sets_[s].lines) {
      if (!l.valid) {
        os << " [-]";
        continue;
      }
      SymBlock e = effective(l);
      AffineExpr x(e.constant);
      for (std::size_t d = 0; d < names.size() && d < kMaxDepth; ++d)
        if (e.coeffs[d] != 0) x.add_term(names[d], e.coeffs[d]);
      os << " [(" << x.str() << ")/" << cfg_.line_size << " = " << concretize(l, iters) << "]";
    }
    if (!sets_[s].meta.empty()) {
      os << " meta=";
      for (auto m : sets_[s].meta) os << int(m);
    }
    os << '\n';
  }
  return os.str();
}

SymHierarchy::SymHierarchy(const HierarchyConfig& cfg) {
  for (const auto& l : cfg.levels) levels.emplace_back(l);
}

SymHierarchy::SymHierarchy(const HierarchyConfig& cfg, const HierarchyState& init) {
  for (std::size_t l = 0; l < cfg.levels.size(); ++l)
    levels.push_back(SymCache::from_concrete(cfg.levels[l], init.levels[l]));
}

HierarchyAccess SymHierarchy::access(const SymBlock& sb, std::span<const Value> iters, AccessKind kind) {
  HierarchyAccess r;
  std::size_t n = levels.size();
  r.consulted.assign(n, false);
  r.hit.assign(n, false);
  r.writeback.assign(n, false);
  for (std::size_t l = 0; l < n; ++l) {
    r.consulted[l] = true;
    SetAccess a = levels[l].access(sb, iters, kind);
    r.hit[l] = a.hit;
    r.writeback[l] = a.evicted_dirty;
    if (a.hit) break;
  }
  return r;
}

HierarchyState SymHierarchy::gamma(std::span<const Value> iters) const {
  HierarchyState h;
  for (const auto& l : levels) h.levels.push_back(l.gamma(iters));
  return h;
}

void SymHierarchy::shift(std::size_t d, Value delta) {
  for (auto& l : levels) l.shift(d, delta);
}

void SymHierarchy::kill(std::size_t d, Value value) {
  for (auto& l : levels) l.kill(d, value);
}

}  // namespace warpsim
