#include "warpsim/simulate.hpp"

namespace warpsim {

Counter add_counter(Counter a, Counter b) {
  Counter r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("counter overflow");
  return r;
}

Counter mul_counter(Counter a, Counter b) {
  Counter r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("counter overflow");
  return r;
}

SimStats make_stats(const HierarchyConfig& cfg, const Program& p, bool per_node) {
  SimStats s;
  s.levels.resize(cfg.levels.size());
  if (per_node) s.node_misses.assign(p.access_nodes.size(), 0);
  return s;
}

void record_access(SimStats& s, const HierarchyAccess& a, std::size_t node_id) {
  s.explicit_accesses = add_counter(s.explicit_accesses, 1);
  for (std::size_t l = 0; l < s.levels.size(); ++l) {
    if (!a.consulted[l]) break;
    auto& lv = s.levels[l];
    lv.accesses = add_counter(lv.accesses, 1);
    if (a.hit[l])
      lv.hits = add_counter(lv.hits, 1);
    else
      lv.misses = add_counter(lv.misses, 1);
    if (a.writeback[l]) lv.writebacks = add_counter(lv.writebacks, 1);
  }
  if (!s.node_misses.empty() && !a.hit[0]) s.node_misses[node_id] = add_counter(s.node_misses[node_id], 1);
}

namespace {

Counter scaled(Counter now, Counter then, Counter n) { return add_counter(now, mul_counter(n, now - then)); }

}  // namespace

void extrapolate(SimStats& s, const SimStats& snap, Counter n) {
  for (std::size_t l = 0; l < s.levels.size(); ++l) {
    auto& a = s.levels[l];
    const auto& b = snap.levels[l];
    a.accesses = scaled(a.accesses, b.accesses, n);
    a.hits = scaled(a.hits, b.hits, n);
    a.misses = scaled(a.misses, b.misses, n);
    a.writebacks = scaled(a.writebacks, b.writebacks, n);
  }
  for (std::size_t k = 0; k < s.node_misses.size(); ++k)
    s.node_misses[k] = scaled(s.node_misses[k], snap.node_misses[k], n);
  Counter period = (s.explicit_accesses - snap.explicit_accesses) + (s.warped_accesses - snap.warped_accesses);
  s.warped_accesses = add_counter(s.warped_accesses, mul_counter(n, period));
}

namespace {

struct Walker {
  const Program& p;
  const HierarchyConfig& cfg;
  const SimOptions& opts;
  HierarchyState state;
  SimStats stats;
  Value line;

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
    BlockId b = access_block(a, iv.values(), line);
    if (opts.trace) opts.trace(a, iv.values(), b);
    record_access(stats, up_hierarchy(cfg, state, b, a.kind), a.id);
  }

  void run_loop(const LoopNode& l, IterVec& prefix) {
    auto first = initial(l, prefix);
    if (!first) return;
    auto last = final_point(l, prefix);
    IterVec i = std::move(*first);
    while (i <= *last) {
      if (l.dom.contains(i.values())) {
        stats.explicit_iterations = add_counter(stats.explicit_iterations, 1);
        run_nodes(l.body, i);
      }
      i[l.depth] = checked_add(i[l.depth], l.stride);
    }
  }
};

}  // namespace

void simulate_iterations(const Program& p, const LoopNode& loop, const IterVec& prefix, Value from,
                         Value until, const HierarchyConfig& cfg, HierarchyState& state, SimStats& stats) {
  SimOptions opts;
  Walker w{p, cfg, opts, std::move(state), std::move(stats), cfg.levels.front().line_size};
  IterVec i = prefix;
  i.push_back(from);
  while (i[loop.depth] < until) {
    if (loop.dom.contains(i.values())) {
      w.stats.explicit_iterations = add_counter(w.stats.explicit_iterations, 1);
      w.run_nodes(loop.body, i);
    }
    i[loop.depth] = checked_add(i[loop.depth], loop.stride);
  }
  state = std::move(w.state);
  stats = std::move(w.stats);
}

SimResult simulate_nonwarping(const Program& p, const HierarchyConfig& cfg, const HierarchyState* init,
                              const SimOptions& opts) {
  cfg.validate();
  Walker w{p, cfg, opts, init ? *init : empty_hierarchy(cfg), make_stats(cfg, p, opts.per_node),
           cfg.levels.front().line_size};
  IterVec root;
  w.run_nodes(p.roots, root);
  return {std::move(w.state), std::move(w.stats)};
}

}  // namespace warpsim
