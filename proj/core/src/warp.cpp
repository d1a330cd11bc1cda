#include "warpsim/warp.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace warpsim {

IterVec WarpSite::point(Value v) const {
  IterVec i = prefix;
  i.push_back(v);
  return i;
}

namespace {

// ------------------------------------------------------ system building

Row var_row(const LinearSystem& sys, std::size_t v) {
  Row r = sys.zero_row();
  r.coeffs[v] = 1;
  return r;
}

Row const_row(Value c) { return Row{{}, c}; }

// acc += k * r, growing acc as needed.
void axpy(Row& acc, Value k, const Row& r) {
  if (acc.coeffs.size() < r.coeffs.size()) acc.coeffs.resize(r.coeffs.size(), 0);
  for (std::size_t i = 0; i < r.coeffs.size(); ++i)
    if (r.coeffs[i] != 0) acc.coeffs[i] = checked_add(acc.coeffs[i], checked_mul(k, r.coeffs[i]));
  acc.constant = checked_add(acc.constant, checked_mul(k, r.constant));
}

Row negate(const Row& r) {
  Row out;
  axpy(out, -1, r);
  return out;
}

// a - b
Row diff(const Row& a, const Row& b) {
  Row out = a;
  axpy(out, -1, b);
  return out;
}

void add_constraint(LinearSystem& sys, const BasicSet::Constraint& c) {
  if (c.equality)
    sys.add_eq(c.row);
  else
    sys.add_ge(c.row);
}

// Rows for one iteration point of `a`: enclosing dims fixed to the site
// prefix, the warped dim given, deeper dims fresh variables (or `deeper` if
// provided).
std::vector<Row> point_rows(LinearSystem& sys, const AccessNode& a, const WarpSite& s, const Row& dim_d,
                            const std::vector<Row>* deeper = nullptr) {
  std::size_t d = s.loop->depth;
  std::vector<Row> rows;
  for (std::size_t k = 0; k < d; ++k) rows.push_back(const_row(s.prefix[k]));
  rows.push_back(dim_d);
  for (std::size_t k = d + 1; k < a.depth; ++k)
    rows.push_back(deeper ? (*deeper)[k - d - 1] : var_row(sys, sys.add_var()));
  for (auto& r : rows) r.coeffs.resize(sys.num_vars(), 0);
  return rows;
}

std::vector<BasicSet::Constraint> embed_point(LinearSystem& sys, const AccessNode& a, std::vector<Row>& rows) {
  for (auto& r : rows) r.coeffs.resize(sys.num_vars(), 0);
  return embed(sys, a.dom, rows);
}

Row address_row(const AccessNode& a, const std::vector<Row>& rows) {
  Row out = const_row(a.bytes.constant);
  for (std::size_t k = 0; k < rows.size(); ++k)
    if (a.bytes.coeffs[k] != 0) axpy(out, a.bytes.coeffs[k], rows[k]);
  return out;
}

// lo <= row <= hi
void add_range(LinearSystem& sys, const Row& row, Value lo, Value hi) {
  Row l = row;
  l.constant = checked_sub(l.constant, lo);
  sys.add_ge(l);
  Row h = negate(row);
  h.constant = checked_add(h.constant, hi);
  sys.add_ge(h);
}

// L*q <= addr <= L*q + L - 1 for the block variable q.
void add_block_eq(LinearSystem& sys, const Row& addr, std::size_t q, Value line) {
  Row lo = addr;
  lo.coeffs.resize(sys.num_vars(), 0);
  lo.coeffs[q] = checked_sub(lo.coeffs[q], line);
  sys.add_ge(lo);  // addr - L q >= 0
  Row hi = negate(addr);
  hi.coeffs.resize(sys.num_vars(), 0);
  hi.coeffs[q] = checked_add(hi.coeffs[q], line);
  hi.constant = checked_add(hi.constant, line - 1);
  sys.add_ge(hi);  // L q + L - 1 - addr >= 0
}

// Point of `a` with warped dim in [from, until): rows of the point.
std::vector<Row> window_point(LinearSystem& sys, const AccessNode& a, const WarpSite& s, Value from, Value until) {
  std::size_t j = sys.add_var();
  sys.add_lower(j, from);
  sys.add_upper(j, until - 1);
  std::vector<Row> rows = point_rows(sys, a, s, var_row(sys, j));
  for (const auto& c : embed_point(sys, a, rows)) add_constraint(sys, c);
  return rows;
}

bool node_active(const AccessNode& a) { return a.max_byte >= a.min_byte; }

}  // namespace

// ---------------------------------------------------------- domains

Value furthest_by_domains(const Program& p, const WarpSite& s) {
  const std::size_t d = s.loop->depth;
  const Value lo = s.v1, end = s.end(), delta = s.delta();
  Value best = end;
  if (delta <= 0) return s.v1;
  for (std::size_t id : s.loop->accesses) {
    const AccessNode& a = *p.access_nodes[id];
    std::vector<std::size_t> dep;
    for (std::size_t r = 0; r < a.dom.constraints().size(); ++r)
      if (a.dom.row_depends_on(a.dom.constraints()[r].row, d)) dep.push_back(r);
    for (std::size_t r : dep) {
      const bool eq = a.dom.constraints()[r].equality;
      for (int side = 0; side < 2; ++side) {
        for (int sign = 0; sign < (eq ? 2 : 1); ++sign) {
          if (best - 1 < lo) return best;
          LinearSystem sys(1);
          sys.add_lower(0, lo);
          sys.add_upper(0, best - 1);
          // q = floor((w - v1) / delta); w' = v0 + (w - v1) - delta * q.
          std::size_t q = sys.add_var();
          Row off = var_row(sys, 0);
          off.constant = -s.v1;
          Row qd = var_row(sys, q);
          qd.coeffs[q] = delta;
          Row rem = diff(off, qd);  // in [0, delta)
          add_range(sys, rem, 0, delta - 1);
          Row wp = rem;
          wp.constant = checked_add(wp.constant, s.v0);
          std::vector<Row> ic = point_rows(sys, a, s, var_row(sys, 0));
          std::vector<Row> deeper(ic.begin() + static_cast<long>(d) + 1, ic.end());
          std::vector<Row> icp = point_rows(sys, a, s, wp, &deeper);
          auto ca = embed_point(sys, a, ic);
          auto cb = embed_point(sys, a, icp);
          // side 0: ic in dom, ic' violates r; side 1: the reverse.
          auto& holds = side == 0 ? ca : cb;
          auto& breaks = side == 0 ? cb : ca;
          for (const auto& c : holds) add_constraint(sys, c);
          Row v = breaks[r].row;
          if (eq && sign == 0) {
            v.constant = checked_sub(v.constant, 1);  // v >= 1
            sys.add_ge(v);
          } else {
            Row nv = negate(v);  // v <= -1
            nv.constant = checked_sub(nv.constant, 1);
            sys.add_ge(nv);
          }
          auto sol = sys.lexopt(1, LexKind::Min);
          if (sol) best = std::min(best, (*sol)[0]);
        }
      }
    }
  }
  return best;
}

// ---------------------------------------------------------- overlap

Value furthest_by_overlap(const Program& p, const WarpSite& s, Value line) {
  const std::size_t d = s.loop->depth;
  const Value lo = s.v0, end = s.end();
  Value best = end;
  const auto& ids = s.loop->accesses;
  for (std::size_t x = 0; x < ids.size(); ++x) {
    const AccessNode& a = *p.access_nodes[ids[x]];
    if (!node_active(a)) continue;
    for (std::size_t y = x + 1; y < ids.size(); ++y) {
      const AccessNode& b = *p.access_nodes[ids[y]];
      if (!node_active(b)) continue;
      if (a.bytes.coeffs[d] == b.bytes.coeffs[d]) continue;
      if (floor_div(a.max_byte, line) < floor_div(b.min_byte, line) ||
          floor_div(b.max_byte, line) < floor_div(a.min_byte, line))
        continue;
      if (best - 1 < lo) return best;
      LinearSystem sys(1);
      sys.add_lower(0, lo);
      sys.add_upper(0, best - 1);
      std::vector<Row> ja = window_point(sys, a, s, lo, best);
      std::vector<Row> jb = window_point(sys, b, s, lo, best);
      sys.add_ge(diff(var_row(sys, 0), ja[d]));  // ja_d <= w
      sys.add_ge(diff(var_row(sys, 0), jb[d]));  // jb_d <= w
      std::size_t q = sys.add_var();
      add_block_eq(sys, address_row(a, ja), q, line);
      add_block_eq(sys, address_row(b, jb), q, line);
      auto sol = sys.lexopt(1, LexKind::Min);
      if (sol) best = std::min(best, (*sol)[0]);
    }
  }
  return best;
}

// ---------------------------------------------------------- mapping

namespace {

std::optional<std::pair<Value, Value>> window_address_range(const WarpSite& s, const AccessNode& a, Value span) {
  LinearSystem sys(1);
  std::vector<Row> j = window_point(sys, a, s, s.v0, s.v0 + span);
  Row t = diff(var_row(sys, 0), address_row(a, j));
  sys.add_eq(t);
  auto lo = sys.lexopt(1, LexKind::Min);
  if (!lo) return std::nullopt;
  auto hi = sys.lexopt(1, LexKind::Max);
  return std::make_pair((*lo)[0], (*hi)[0]);
}

// Some ja of a and jb of b in the window with block(a(ja)) + sa == block(b(jb)) + sb.
bool blocks_meet(const WarpSite& s, const AccessNode& a, Value sa, const AccessNode& b, Value sb, Value span,
                 Value line) {
  LinearSystem sys;
  std::vector<Row> ja = window_point(sys, a, s, s.v0, s.v0 + span);
  std::vector<Row> jb = window_point(sys, b, s, s.v0, s.v0 + span);
  std::size_t qa = sys.add_var();
  std::size_t qb = sys.add_var();
  add_block_eq(sys, address_row(a, ja), qa, line);
  add_block_eq(sys, address_row(b, jb), qb, line);
  Row e = var_row(sys, qa);
  e.coeffs[qb] = -1;
  e.constant = checked_sub(sa, sb);
  sys.add_eq(e);
  return sys.feasible();
}

}  // namespace

bool touches_block(const WarpSite& s, const AccessNode& a, Value span, Value line, BlockId b) {
  LinearSystem sys;
  std::vector<Row> j = window_point(sys, a, s, s.v0, s.v0 + span);
  add_range(sys, address_row(a, j), checked_mul(b, line), checked_add(checked_mul(b, line), line - 1));
  return sys.feasible();
}

AccessMapping construct_access_mapping(const Program& p, const WarpSite& s, Value span, Value line,
                                       const MappingOptions& opts) {
  AccessMapping m;
  m.span = span;
  const std::size_t d = s.loop->depth;
  const Value delta = s.delta();
  for (std::size_t id : s.loop->accesses) {
    const AccessNode& a = *p.access_nodes[id];
    if (!node_active(a)) continue;
    auto range = window_address_range(s, a, span);
    if (!range) continue;
    Value moved = checked_mul(a.bytes.coeffs[d], delta);
    if (floor_mod(moved, line) != 0) {
      m.uniform = false;
      m.problem = "access " + std::to_string(a.id) + " does not move by whole blocks";
      return m;
    }
    m.pieces.push_back({&a, moved / line, floor_div(range->first, line), floor_div(range->second, line)});
  }
  if (opts.trust_overlap) return m;
  for (std::size_t x = 0; x < m.pieces.size(); ++x) {
    for (std::size_t y = x + 1; y < m.pieces.size(); ++y) {
      const auto& pa = m.pieces[x];
      const auto& pb = m.pieces[y];
      if (pa.shift == pb.shift) continue;
      bool dom_overlap = pa.min_block <= pb.max_block && pb.min_block <= pa.max_block;
      if (dom_overlap && blocks_meet(s, *pa.node, 0, *pb.node, 0, span, line)) {
        m.functional = false;
        m.problem = "accesses " + std::to_string(pa.node->id) + " and " + std::to_string(pb.node->id) +
                    " map a shared block differently";
        return m;
      }
      bool ran_overlap = pa.min_block + pa.shift <= pb.max_block + pb.shift &&
                         pb.min_block + pb.shift <= pa.max_block + pa.shift;
      if (ran_overlap && blocks_meet(s, *pa.node, pa.shift, *pb.node, pb.shift, span, line)) {
        m.injective = false;
        m.problem = "accesses " + std::to_string(pa.node->id) + " and " + std::to_string(pb.node->id) +
                    " map different blocks to one";
        return m;
      }
    }
  }
  return m;
}

// ---------------------------------------------------------- agreement

bool cache_agrees(const SymHierarchy& sym, const std::vector<std::int64_t>& rotation, const WarpSite& s,
                  const AccessMapping& m, Value line, std::string* why) {
  auto veto = [&](std::string r) {
    if (why) *why = std::move(r);
    return false;
  };
  if (!m.usable()) return veto(m.problem);
  IterVec i0 = s.point(s.v0), i1 = s.point(s.v1);
  for (std::size_t l = 0; l < sym.levels.size(); ++l) {
    const SymCache& c = sym.levels[l];
    const Value sets = c.config().num_sets;
    for (const auto& pc : m.pieces)
      if (floor_mod(pc.shift - rotation[l], sets) != 0)
        return veto("access " + std::to_string(pc.node->id) + " shifts sets by " + std::to_string(pc.shift) +
                    ", states are rotated by " + std::to_string(rotation[l]));
    for (const auto& set : c.sets()) {
      for (const auto& ln : set.lines) {
        if (!ln.valid) continue;
        BlockId b0 = c.concretize(ln, i0.values());
        BlockId b1 = c.concretize(ln, i1.values());
        for (const auto& pc : m.pieces) {
          if (b1 - b0 == pc.shift) continue;
          if (b0 >= pc.min_block && b0 <= pc.max_block &&
              touches_block(s, *pc.node, m.span, line, b0))
            return veto("block " + std::to_string(b0) + " maps inconsistently with the cache");
          BlockId pre = b1 - pc.shift;
          if (pre >= pc.min_block && pre <= pc.max_block &&
              touches_block(s, *pc.node, m.span, line, pre))
            return veto("block " + std::to_string(b1) + " has an inconsistent preimage");
        }
      }
    }
  }
  return true;
}

}  // namespace warpsim

namespace warpsim {

WarpDecision iterations_to_warp(const Program& p, const SymHierarchy& sym, const std::vector<std::int64_t>& rotation,
                                const WarpSite& s, Value line) {
  WarpDecision out;
  const Value delta = s.delta();
  if (delta <= 0 || delta % s.loop->stride != 0) {
    out.reason = "period is not a positive multiple of the stride";
    return out;
  }
  Value f_dom = furthest_by_domains(p, s);
  Value f_ov = furthest_by_overlap(p, s, line);
  out.bound = std::min(f_dom, f_ov);
  // Every warped iteration must lie strictly before the first conflict.
  Value n = floor_div(out.bound - s.v1, delta);
  if (n <= 0) {
    out.reason = f_dom <= f_ov ? "domain conflict at " + std::to_string(f_dom)
                               : "access overlap at " + std::to_string(f_ov);
    return out;
  }
  MappingOptions mo;
  mo.trust_overlap = true;
  AccessMapping m = construct_access_mapping(p, s, checked_mul(n, delta), line, mo);
  std::string why;
  if (!cache_agrees(sym, rotation, s, m, line, &why)) {
    out.reason = why;
    return out;
  }
  out.n = static_cast<Counter>(n);
  return out;
}

namespace {

struct HistoryEntry {
  std::uint64_t hash = 0;
  std::vector<Value> key;
  Value v = 0;
  SimStats stats;
  std::vector<std::size_t> mru;
};

class Engine {
 public:
  Engine(const Program& p, const HierarchyConfig& cfg, const HierarchyState* init, const WarpOptions& opts)
      : p_(p), cfg_(cfg), opts_(opts), sym_(init ? SymHierarchy(cfg, *init) : SymHierarchy(cfg)),
        line_(cfg.levels.front().line_size) {
    res_.stats = make_stats(cfg, p, opts.per_node);
  }

  WarpResult run() {
    IterVec root;
    run_nodes(p_.roots, root);
    res_.state = sym_.gamma({});
    return std::move(res_);
  }

 private:
  void run_nodes(const std::vector<Node>& nodes, IterVec& iv) {
    for (const auto& n : nodes) {
      if (n.is_loop())
        run_loop(n.loop(), iv);
      else
        run_access(n.access(), iv);
    }
  }

  void run_access(const AccessNode& a, const IterVec& iv) {
    if (!a.dom.contains(iv.values())) return;
    record_access(res_.stats, sym_.access(SymBlock::of(a.bytes), iv.values(), a.kind), a.id);
  }

  void run_loop(const LoopNode& l, IterVec& prefix) {
    auto first = initial(l, prefix);
    if (!first) return;
    auto last = final_point(l, prefix);
    const std::size_t d = l.depth;
    IterVec i = std::move(*first);
    History history;
    bool warped = false;
    while (i[d] <= (*last)[d]) {
      if (opts_.enable && !warped && !l.accesses.empty()) {
        if (try_warp(l, i, (*last)[d], history)) {
          warped = true;
          continue;
        }
      }
      warped = false;
      if (l.dom.contains(i.values())) {
        res_.stats.explicit_iterations = add_counter(res_.stats.explicit_iterations, 1);
        run_nodes(l.body, i);
      }
      i[d] = checked_add(i[d], l.stride);
      sym_.shift(d, l.stride);
    }
    sym_.kill(d, i[d]);
  }

  struct History {
    std::deque<HistoryEntry> entries;
    std::size_t bytes = 0;
  };

  void remember(History& history, std::uint64_t h, std::vector<Value> key, Value v) {
    if (opts_.history == 0) return;
    HistoryEntry e{h, std::move(key), v, res_.stats, {}};
    for (const auto& c : sym_.levels) e.mru.push_back(c.mru_set());
    history.bytes += e.key.size() * sizeof(Value);
    history.entries.push_back(std::move(e));
    while (history.entries.size() > opts_.history ||
           (history.entries.size() > 1 && history.bytes > opts_.history_bytes)) {
      history.bytes -= history.entries.front().key.size() * sizeof(Value);
      history.entries.pop_front();
    }
  }

  std::vector<Value> state_key() const {
    std::vector<Value> key;
    for (const auto& c : sym_.levels) {
      std::size_t at = key.size();
      key.push_back(0);
      c.append_canonical_key(key);
      key[at] = static_cast<Value>(key.size() - at - 1);
    }
    return key;
  }

  // Looks for earlier equivalent states and warps from the most recent one
  // that allows it. Records the current state either way.
  bool try_warp(const LoopNode& l, IterVec& i, Value last, History& history) {
    const std::size_t d = l.depth;
    std::vector<Value> key = state_key();
    std::uint64_t h = hash_values(key);
    std::size_t attempts = 0;
    for (auto it = history.entries.rbegin(); it != history.entries.rend() && attempts < opts_.max_attempts; ++it) {
      if (it->hash != h || it->key != key) continue;
      ++attempts;
      WarpSite site;
      site.loop = &l;
      site.prefix = IterVec(std::vector<Value>(i.values().begin(), i.values().begin() + static_cast<long>(d)));
      site.v0 = it->v;
      site.v1 = i[d];
      site.last = last;
      std::vector<std::int64_t> rot;
      for (std::size_t lv = 0; lv < sym_.levels.size(); ++lv) {
        auto sets = static_cast<std::int64_t>(sym_.levels[lv].config().num_sets);
        rot.push_back(floor_mod(static_cast<std::int64_t>(sym_.levels[lv].mru_set()) -
                                    static_cast<std::int64_t>(it->mru[lv]),
                                sets));
      }
      WarpDecision dec = iterations_to_warp(p_, sym_, rot, site, line_);
      WarpEvent ev{l.id, site.point(site.v0), site.point(site.v1), site.delta(), dec.n, rot, dec.reason, {}};
      if (dec.n == 0) {
        if (opts_.on_event) opts_.on_event(ev);
        continue;
      }
      apply_warp(l, site, *it, dec.n, rot, i, ev);
      if (opts_.on_event) opts_.on_event(ev);
      std::vector<Value> after = state_key();
      std::uint64_t ha = hash_values(after);
      remember(history, ha, std::move(after), i[d]);
      return true;
    }
    remember(history, h, std::move(key), i[d]);
    return false;
  }

  void apply_warp(const LoopNode& l, const WarpSite& site, const HistoryEntry& from, Counter n,
                  const std::vector<std::int64_t>& rot, IterVec& i, WarpEvent& ev) {
    const std::size_t d = l.depth;
    std::optional<SymHierarchy> before;
    if (opts_.on_warp) before = sym_;
    HierarchyState pre_state;
    SimStats pre_stats;
    if (opts_.self_check) {
      pre_state = sym_.gamma(i.values());
      pre_stats = res_.stats;
    }
    for (std::size_t lv = 0; lv < sym_.levels.size(); ++lv) {
      auto sets = static_cast<std::int64_t>(sym_.levels[lv].config().num_sets);
      auto times = static_cast<std::int64_t>(n % static_cast<Counter>(sets));
      sym_.levels[lv].rotate(floor_mod(times * rot[lv], sets));
    }
    std::vector<Counter> misses_before;
    for (const auto& lv : res_.stats.levels) misses_before.push_back(lv.misses);
    extrapolate(res_.stats, from.stats, n);
    for (std::size_t lv = 0; lv < misses_before.size(); ++lv)
      ev.misses.push_back(res_.stats.levels[lv].misses - misses_before[lv]);
    res_.stats.warps = add_counter(res_.stats.warps, 1);
    Value advance = checked_mul(static_cast<Value>(n), site.delta());
    i[d] = checked_add(i[d], advance);
    if (opts_.self_check) self_check(l, site, advance, std::move(pre_state), std::move(pre_stats), i);
    if (opts_.on_warp) opts_.on_warp(ev, *before, sym_);
  }

  void self_check(const LoopNode& l, const WarpSite& site, Value advance, HierarchyState state, SimStats stats,
                  const IterVec& i) {
    res_.self_checks = add_counter(res_.self_checks, 1);
    simulate_iterations(p_, l, site.prefix, site.v1, site.v1 + advance, cfg_, state, stats);
    std::string problem;
    if (state != sym_.gamma(i.values()))
      problem = "cache state differs";
    else if (!stats.same_counts(res_.stats))
      problem = "miss counts differ";
    if (problem.empty()) return;
    res_.self_check_failures = add_counter(res_.self_check_failures, 1);
    res_.self_check_messages.push_back("loop " + std::to_string(l.id) + " warp from " + site.point(site.v1).str() +
                                       " by " + std::to_string(advance) + ": " + problem);
  }

  const Program& p_;
  const HierarchyConfig& cfg_;
  const WarpOptions& opts_;
  SymHierarchy sym_;
  Value line_;
  WarpResult res_;
};

}  // namespace

WarpResult simulate_warping(const Program& p, const HierarchyConfig& cfg, const HierarchyState* init,
                            const WarpOptions& opts) {
  cfg.validate();
  Engine e(p, cfg, init, opts);
  return e.run();
}

}  // namespace warpsim
