#pragma once

// Reference simulator: walks the program tree point by point and feeds every
// access to a concrete cache hierarchy.

#include <cstdint>
#include <functional>
#include <vector>

#include "warpsim/cache.hpp"
#include "warpsim/scop.hpp"

namespace warpsim {

using Counter = std::uint64_t;

/// Adds with overflow detection.
Counter add_counter(Counter a, Counter b);
Counter mul_counter(Counter a, Counter b);

struct LevelStats {
  Counter accesses = 0;
  Counter hits = 0;
  Counter misses = 0;
  Counter writebacks = 0;

  friend bool operator==(const LevelStats&, const LevelStats&) = default;
};

struct SimStats {
  std::vector<LevelStats> levels;
  Counter explicit_accesses = 0;
  Counter warped_accesses = 0;
  Counter explicit_iterations = 0;  // loop iterations executed one by one
  Counter warps = 0;
  std::vector<Counter> node_misses;  // first-level misses per access node, if enabled

  Counter total_accesses() const { return explicit_accesses + warped_accesses; }
  Counter misses() const { return levels.empty() ? 0 : levels.front().misses; }
  /// Counters that are reproduced exactly by warping: per-level traffic and
  /// per-node misses.
  bool same_counts(const SimStats& o) const { return levels == o.levels && node_misses == o.node_misses; }
};

SimStats make_stats(const HierarchyConfig& cfg, const Program& p, bool per_node);

/// Adds the outcome of one access to `s`.
void record_access(SimStats& s, const HierarchyAccess& a, std::size_t node_id);

/// s += n * (s - snapshot) for every traffic counter; explicit counters move
/// into warped_accesses.
void extrapolate(SimStats& s, const SimStats& snapshot, Counter n);

using TraceFn = std::function<void(const AccessNode&, std::span<const Value>, BlockId)>;

struct SimOptions {
  bool per_node = false;
  TraceFn trace;  // called for every executed access
};

struct SimResult {
  HierarchyState state;
  SimStats stats;
};

/// Runs the iterations of `loop` whose own iterator lies in [from, until),
/// stepping by the stride from `from`, under the enclosing values `prefix`.
void simulate_iterations(const Program& p, const LoopNode& loop, const IterVec& prefix, Value from,
                         Value until, const HierarchyConfig& cfg, HierarchyState& state, SimStats& stats);

SimResult simulate_nonwarping(const Program& p, const HierarchyConfig& cfg,
                              const HierarchyState* init = nullptr, const SimOptions& opts = {});

}  // namespace warpsim
